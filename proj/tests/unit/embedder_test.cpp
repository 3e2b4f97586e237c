// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <map>

#include "rtlmark/detector.hpp"
#include "rtlmark/embedder.hpp"
#include "rtlmark/equivalence.hpp"
#include "rtlmark/errors.hpp"
#include "rtlmark/harness.hpp"
#include "rtlmark/payload.hpp"
#include "rtlmark/verilog/parser.hpp"
#include "rtlmark/verilog/printer.hpp"

using namespace rtlmark;
using namespace rtlmark::vlog;

namespace {

// Small FSM with a handful of sites, so every subset can be embedded.
const char* kSmallFsm =
    "module blink(input clk, input rst, input go, output reg [7:0] led);\n"
    "  localparam OFF = 2'b00;\n"
    "  localparam ON = 2'b01;\n"
    "  reg [1:0] st;\n"
    "  always @(posedge clk) begin\n"
    "    if (rst) begin\n"
    "      st <= OFF;\n"
    "      led <= 8'h00;\n"
    "    end else begin\n"
    "      case (st)\n"
    "        OFF: if (go) st <= ON;\n"
    "        ON: begin\n"
    "          led <= led + 8'h01;\n"
    "          st <= OFF;\n"
    "        end\n"
    "        default: st <= OFF;\n"
    "      endcase\n"
    "    end\n"
    "  end\n"
    "endmodule\n";

const char* kNoSites = "module w(input a, output y);\nendmodule\n";

// Key whose payload tag is 0xA5, the carrier byte used in golden tests.
constexpr uint64_t kGoldenSeed = 877;

Ast parse_text(const std::string& s) { return parse(SourceText{s, "t.v"}); }

std::optional<double> embedded_confidence(const Ast& ast, std::vector<TransformSite> sites, const WatermarkKey& key,
                                          const Payload& payload) {
  order_for_application(sites);
  TransformPlan p;
  p.selected = sites;
  try {
    return detect(parse(embed(ast, p, key, payload).source), key, NullModel::defaults()).confidence;
  } catch (const SiteStale&) {
    return std::nullopt;
  }
}

}  // namespace

TEST(Payload, GoldenKeyStartsWithA5) {
  WatermarkKey key = WatermarkKey::from_seed(kGoldenSeed);
  Payload p = encode_payload("gpt-4", "dev-A", key);
  ASSERT_FALSE(p.encoded.empty());
  EXPECT_EQ(p.encoded[0], 0xA5);
  EXPECT_EQ(payload_tag(key), 0xA5);
}

TEST(Payload, RoundTripAndKeyDependence) {
  WatermarkKey k1 = WatermarkKey::from_seed(1), k2 = WatermarkKey::from_seed(2);
  Payload a = encode_payload("gpt-4", "dev-A", k1);
  Payload b = encode_payload("gpt-4", "dev-A", k2);
  EXPECT_NE(a.encoded, b.encoded);
  auto [m, d] = decode_payload(a.encoded, k1);
  EXPECT_EQ(m, "gpt-4");
  EXPECT_EQ(d, "dev-A");
  EXPECT_THROW(decode_payload(a.encoded, k2), BadFraming);
  Bytes truncated(a.encoded.begin(), a.encoded.begin() + 4);
  EXPECT_THROW(decode_payload(truncated, k1), BadFraming);
  EXPECT_THROW(encode_payload(std::string(200, 'm'), "d", k1), PayloadTooLarge);
}

TEST(Payload, GoldenCarrierAppearsAsA5) {
  WatermarkKey key = WatermarkKey::from_seed(kGoldenSeed);
  Payload payload = encode_payload("gpt-4", "dev-A", key);
  Ast ast = parse_text(kSmallFsm);
  auto sites = applicable_sites(ast, RuleId::T15, key);
  ASSERT_FALSE(sites.empty());
  auto [out, rec] = apply(ast, sites[0], key, payload);
  std::string text = print(out).content;
  EXPECT_NE(text.find("input watermark_trigger"), std::string::npos);
  EXPECT_NE(text.find("8'hA5"), std::string::npos) << text;
}

TEST(Objective, RejectsOutOfRangeValues) {
  EXPECT_NO_THROW(EmbedObjective{}.validate());
  EXPECT_THROW((EmbedObjective{-1.0, 0.0, 0.9}.validate()), Error);
  EXPECT_THROW((EmbedObjective{1.0, -0.5, 0.9}.validate()), Error);
  EXPECT_THROW((EmbedObjective{1.0, 0.0, 1.0}.validate()), Error);
  EXPECT_THROW((EmbedObjective{1.0, 0.0, 0.0}.validate()), Error);
}

TEST(Planner, ModuleWithoutSitesHasNoCapacity) {
  WatermarkKey key = WatermarkKey::from_seed(1);
  Payload payload = encode_payload("m", "d", key);
  Ast ast = parse_text(kNoSites);
  ASSERT_TRUE(all_applicable_sites(ast, key).empty());
  try {
    plan(ast, key, payload);
    FAIL() << "expected InsufficientCapacity";
  } catch (const InsufficientCapacity& e) {
    EXPECT_EQ(e.achieved(), 0.0);
  }
}

TEST(Planner, EmptyPlanLeavesSourceUntouched) {
  Ast ast = parse_text(kSmallFsm);
  WatermarkKey key = WatermarkKey::from_seed(1);
  WatermarkedDocument d = embed(ast, TransformPlan{}, key, encode_payload("m", "d", key));
  EXPECT_EQ(d.source.content, print(ast).content);
  EXPECT_EQ(d.source.content, kSmallFsm);
}

// Brute force over every subset of one site per rule: the plan reaches tau
// and no subset with one site removed does.
TEST(Planner, PlanIsOneMinimalAgainstBruteForce) {
  for (uint64_t seed : {1, 2, 3}) {
    WatermarkKey key = WatermarkKey::from_seed(seed);
    Payload payload = encode_payload("gpt-4", "dev-A", key);
    Ast ast = parse_text(kSmallFsm);
    std::map<RuleId, TransformSite> first;
    for (const auto& s : all_applicable_sites(ast, key)) first.emplace(s.rule, s);
    std::vector<TransformSite> pool;
    for (const auto& [r, s] : first) pool.push_back(s);
    ASSERT_LE(pool.size(), 8u);

    TransformPlan p = plan(ast, key, payload);
    ASSERT_GE(p.predicted_confidence, kDefaultTau);
    auto conf = embedded_confidence(ast, p.selected, key, payload);
    ASSERT_TRUE(conf);
    EXPECT_DOUBLE_EQ(*conf, p.predicted_confidence);
    for (size_t i = 0; i < p.selected.size(); ++i) {
      auto fewer = p.selected;
      fewer.erase(fewer.begin() + static_cast<long>(i));
      auto c = embedded_confidence(ast, fewer, key, payload);
      EXPECT_TRUE(!c || *c < kDefaultTau) << "site " << i << " is removable";
    }

    // Some subset of the pool reaches tau, and none needs more sites than the plan.
    size_t best = SIZE_MAX;
    for (unsigned m = 1; m < (1u << pool.size()); ++m) {
      std::vector<TransformSite> sub;
      for (size_t b = 0; b < pool.size(); ++b)
        if ((m >> b) & 1) sub.push_back(pool[b]);
      if (sub.size() >= best) continue;
      auto c = embedded_confidence(ast, sub, key, payload);
      if (c && *c >= kDefaultTau) best = sub.size();
    }
    ASSERT_NE(best, SIZE_MAX);
    EXPECT_LE(best, p.selected.size());
    EXPECT_LE(p.selected.size(), pool.size());
  }
}

TEST(Planner, PlansAreDeterministic) {
  WatermarkKey key = WatermarkKey::from_seed(4);
  Payload payload = encode_payload("gpt-4", "dev-A", key);
  Ast ast = parse_text(kSmallFsm);
  TransformPlan a = plan(ast, key, payload), b = plan(ast, key, payload);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(embed(ast, a, key, payload).source.content, embed(ast, b, key, payload).source.content);
}

TEST(Planner, RaisingTauNeverShrinksThePlan) {
  Corpus c = load_corpus(RTLMARK_CORPUS);
  WatermarkKey key = WatermarkKey::from_seed(1);
  Payload payload = encode_payload("gpt-4", "dev-A", key);
  for (const auto& e : c.eligible) {
    Ast ast = parse(e.source);
    size_t prev = 0;
    for (double tau : {0.55, 0.7, 0.8, 0.9, 0.95, 0.97}) {
      try {
        size_t n = plan(ast, key, payload, EmbedObjective{1.0, 0.0, tau}).selected.size();
        EXPECT_GE(n, prev) << e.file << " tau " << tau;
        prev = n;
      } catch (const InsufficientCapacity&) {
        break;
      }
    }
  }
}

TEST(Planner, SelectedCountBelowApplicableOnCorpus) {
  Corpus c = load_corpus(RTLMARK_CORPUS);
  WatermarkKey key = WatermarkKey::from_seed(1);
  Payload payload = encode_payload("gpt-4", "dev-A", key);
  double app = 0, sel = 0;
  for (const auto& e : c.eligible) {
    try {
      TransformPlan p = plan(parse(e.source), key, payload);
      app += static_cast<double>(p.applicable_rules);
      sel += static_cast<double>(p.selected.size());
    } catch (const InsufficientCapacity&) {
    }
  }
  EXPECT_LT(sel, app);
}

TEST(Planner, TriggerRuleComesFirstWhenAvailable) {
  WatermarkKey key = WatermarkKey::from_seed(1);
  Payload payload = encode_payload("gpt-4", "dev-A", key);
  Ast ast = parse_text(kSmallFsm);
  ASSERT_FALSE(applicable_sites(ast, RuleId::T15, key).empty());
  TransformPlan p = plan(ast, key, payload);
  bool has = false;
  for (const auto& s : p.selected) has |= s.rule == RuleId::T15;
  EXPECT_TRUE(has);
}

TEST(Embed, OutputIsEquivalentAndDetected) {
  Corpus c = load_corpus(RTLMARK_CORPUS);
  WatermarkKey key = WatermarkKey::from_seed(9);
  Payload payload = encode_payload("gpt-4", "dev-A", key);
  size_t done = 0;
  for (const auto& e : c.eligible) {
    if (done == 6) break;
    Ast ast = parse(e.source);
    TransformPlan p;
    try {
      p = plan(ast, key, payload);
    } catch (const InsufficientCapacity&) {
      continue;
    }
    WatermarkedDocument d = embed(ast, p, key, payload);
    Ast out = parse(d.source);
    EXPECT_TRUE(check_equivalence(ast, out).equivalent()) << e.file;
    EXPECT_TRUE(detect(out, key, NullModel::defaults()).watermarked) << e.file;
    EXPECT_EQ(d.records.size(), p.selected.size());
    ++done;
  }
  EXPECT_EQ(done, 6u);
}

TEST(Manifest, ReplayReproducesOutput) {
  WatermarkKey key = WatermarkKey::from_seed(6);
  Payload payload = encode_payload("gpt-4", "dev-A", key);
  SourceText src{kSmallFsm, "blink.v"};
  Ast ast = parse(src);
  TransformPlan p = plan(ast, key, payload);
  WatermarkedDocument d = embed(ast, p, key, payload);
  Manifest m = Manifest::from_document(src, d, key, payload, kDefaultTau);
  std::string text = m.to_json();
  EXPECT_EQ(text.find(key.to_hex()), std::string::npos) << "secret leaked into manifest";
  Manifest back = Manifest::from_json(text);
  EXPECT_EQ(back.to_json(), text);
  WatermarkedDocument again = replay(src, back, key);
  EXPECT_EQ(again.source.content, d.source.content);
  EXPECT_EQ(to_hex(sha256(again.source.content)), back.output_sha256);

  SourceText edited{std::string(kSmallFsm) + "\n", "blink.v"};
  EXPECT_THROW(replay(edited, back, key), Error);
  EXPECT_THROW(replay(src, back, WatermarkKey::from_seed(7)), Error);
  EXPECT_THROW(Manifest::from_json("{}"), Error);
}
