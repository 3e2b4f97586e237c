// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "rtlmark/config.hpp"
#include "rtlmark/errors.hpp"

using namespace rtlmark;

TEST(Config, MissingFileGivesDefaults) {
  Config c = Config::load("/nonexistent/rtlmark.json");
  EXPECT_DOUBLE_EQ(c.objective.tau, 0.95);
  EXPECT_DOUBLE_EQ(c.objective.m, 1.0);
  EXPECT_DOUBLE_EQ(c.objective.n, 0.0);
  EXPECT_EQ(c.workers, 4u);
  EXPECT_EQ(c.budget.exhaustive_bits, 12);
  EXPECT_TRUE(c.key_file.empty());
}

TEST(Config, ParsesEveryField) {
  Config c = Config::parse(R"({
    "key": "k.key", "null_model": "null.json", "tau": 0.9,
    "objective": {"m": 2, "n": 0.5},
    "synth": {"command": "yosys -p x", "timeout_seconds": 30},
    "equivalence": {"exhaustive_bits": 10, "random_vectors": 50, "sequential_cycles": 60, "seed": 7},
    "workers": 2})");
  EXPECT_EQ(c.key_file, "k.key");
  EXPECT_EQ(c.null_model_file, "null.json");
  EXPECT_DOUBLE_EQ(c.objective.tau, 0.9);
  EXPECT_DOUBLE_EQ(c.objective.m, 2.0);
  EXPECT_DOUBLE_EQ(c.objective.n, 0.5);
  EXPECT_EQ(c.synth.command, "yosys -p x");
  EXPECT_EQ(c.synth.timeout_seconds, 30);
  EXPECT_EQ(c.budget.exhaustive_bits, 10);
  EXPECT_EQ(c.budget.random_vectors, 50);
  EXPECT_EQ(c.budget.sequential_cycles, 60);
  EXPECT_EQ(c.budget.seed, 7u);
  EXPECT_EQ(c.workers, 2u);
}

TEST(Config, RejectsUnknownAndInvalidFields) {
  EXPECT_THROW(Config::parse(R"({"tua": 0.9})"), Error);
  EXPECT_THROW(Config::parse(R"({"synth": {"cmd": "x"}})"), Error);
  EXPECT_THROW(Config::parse(R"({"tau": 1.0})"), Error);
  EXPECT_THROW(Config::parse(R"({"tau": 0})"), Error);
  EXPECT_THROW(Config::parse(R"({"workers": 0})"), Error);
  EXPECT_THROW(Config::parse(R"({"equivalence": {"exhaustive_bits": 40}})"), Error);
  EXPECT_THROW(Config::parse(R"({"synth": {"timeout_seconds": 0}})"), Error);
  EXPECT_THROW(Config::parse("[1, 2]"), Error);
  EXPECT_THROW(Config::parse("{"), Error);
  EXPECT_THROW(Config::parse(R"({"tau": "high"})"), Error);
}
