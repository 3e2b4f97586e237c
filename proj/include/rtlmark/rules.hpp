// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rtlmark/crypto.hpp"
#include "rtlmark/payload.hpp"
#include "rtlmark/verilog/ast.hpp"

namespace rtlmark {

enum class RuleId {
  T1 = 1, T2, T3, T4, T5, T6, T7, T8, T9, T10, T11, T12, T13, T14, T15
};
constexpr int kRuleCount = 15;

enum class Granularity { Token, Statement };

struct RuleInfo {
  RuleId id;
  const char* code;  // "T1" .. "T15"
  const char* name;
  Granularity granularity;
  bool keyed;           // signature depends on the key
  bool name_dependent;  // signature lost when identifiers are renamed
  const char* effect;
  const char* applicability;
};

const std::array<RuleInfo, kRuleCount>& rule_catalog();
const RuleInfo& rule_info(RuleId id);
inline int rule_index(RuleId id) { return static_cast<int>(id) - 1; }
std::string rule_code(RuleId id);
std::optional<RuleId> parse_rule_id(const std::string& code);

/// Where a rule applies. `path` is "category|key|ordinal", where the ordinal
/// counts earlier candidates of the module with the same category and key.
/// Paths are built from names and values rather than positions so they
/// survive edits made by other rules.
struct TransformSite {
  RuleId rule = RuleId::T1;
  std::string module;
  std::string path;
  std::string description;

  bool operator==(const TransformSite& o) const {
    return rule == o.rule && module == o.module && path == o.path;
  }
};

struct TransformationRecord {
  TransformSite site;
  std::string before;  // changed region of the pre-image
  std::string after;   // changed region of the post-image
  size_t offset = 0;   // start of the changed region
  Bytes params;        // key-derived parameters used by the edit
};

struct SignatureEvidence {
  RuleId rule = RuleId::T1;
  bool present = false;
  int strength = 0;
  bool name_dependent = false;
};

std::vector<TransformSite> applicable_sites(const vlog::Ast& ast, RuleId rule,
                                            const WatermarkKey& key);

/// Sites of every rule, in rule order.
std::vector<TransformSite> all_applicable_sites(const vlog::Ast& ast, const WatermarkKey& key);

/// Throws SiteStale when the site's path no longer resolves.
std::pair<vlog::Ast, TransformationRecord> apply(const vlog::Ast& ast, const TransformSite& site,
                                                 const WatermarkKey& key, const Payload& payload);

SignatureEvidence signature_present(const vlog::Ast& ast, RuleId rule, const WatermarkKey& key);

/// Evidence for all rules in rule order.
std::vector<SignatureEvidence> scan_signatures(const vlog::Ast& ast, const WatermarkKey& key);

/// Name of the input port added by T15.
inline constexpr const char* kTriggerPort = "watermark_trigger";

/// Application rank: statement rules first, token rules next, renames last.
int application_rank(RuleId id);

}  // namespace rtlmark
