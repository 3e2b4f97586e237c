// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rtlmark/crypto.hpp"
#include "rtlmark/payload.hpp"
#include "rtlmark/rewrite.hpp"
#include "rtlmark/rules.hpp"
#include "rtlmark/verilog/ast.hpp"
#include "rtlmark/verilog/eval.hpp"
#include "rtlmark/verilog/symbols.hpp"

namespace rtlmark::rules {

struct Context {
  const vlog::Ast& ast;
  const vlog::SymbolTable& table;
  const vlog::ModuleDecl& mod;
  const vlog::ModuleSymbols& syms;
  const WatermarkKey& key;
  const std::string& src;
  const Payload* payload = nullptr;

  std::string text(const vlog::Span& s) const { return src.substr(s.begin, s.size()); }
  Bytes derive(std::string_view rule, std::string_view label = {}) const {
    return rtlmark::derive(key, mod.name, rule, label);
  }
  uint64_t derive_u64(std::string_view rule, std::string_view label = {}) const {
    return rtlmark::derive_u64(key, mod.name, rule, label);
  }
};

struct Candidate {
  std::string category;
  std::string key;
  std::string description;
  std::function<void(Rewriter&)> edit;
  Bytes params;
};

struct RuleImpl {
  RuleId id;
  std::vector<Candidate> (*candidates)(const Context&);
  int (*signature)(const Context&);
};

const RuleImpl& impl(RuleId id);

// Rule entry points, one pair per rule.
#define RTLMARK_DECLARE_RULE(N)                         \
  std::vector<Candidate> candidates_##N(const Context&); \
  int signature_##N(const Context&);
RTLMARK_DECLARE_RULE(T1)
RTLMARK_DECLARE_RULE(T2)
RTLMARK_DECLARE_RULE(T3)
RTLMARK_DECLARE_RULE(T4)
RTLMARK_DECLARE_RULE(T5)
RTLMARK_DECLARE_RULE(T6)
RTLMARK_DECLARE_RULE(T7)
RTLMARK_DECLARE_RULE(T8)
RTLMARK_DECLARE_RULE(T9)
RTLMARK_DECLARE_RULE(T10)
RTLMARK_DECLARE_RULE(T11)
RTLMARK_DECLARE_RULE(T12)
RTLMARK_DECLARE_RULE(T13)
RTLMARK_DECLARE_RULE(T14)
RTLMARK_DECLARE_RULE(T15)
#undef RTLMARK_DECLARE_RULE

// ------------------------------------------------------------ shared helpers

/// `n` lowercase letters drawn from key-derived bytes.
std::string keyed_letters(const Bytes& bytes, size_t n);

/// Applies `f` to every statement of every always block, pre-order.
void for_each_stmt(const vlog::ModuleDecl& m, const std::function<void(const vlog::Stmt&)>& f);

/// Applies `f` to every expression root in the module (parameter values,
/// ranges, initializers, assignments, conditions, labels, events, connections).
void for_each_expr_root(const vlog::ModuleDecl& m, const std::function<void(const vlog::Expr&)>& f);

/// True for operands that never need parentheses when embedded.
bool is_primary(const vlog::Expr& e);

/// Source text of `e`, wrapped in parentheses unless primary.
std::string operand_text(const Context& ctx, const vlog::Expr& e);

/// Lookup over declared signals, for width and signedness queries.
vlog::Lookup width_lookup(const vlog::ModuleSymbols& syms, std::vector<vlog::SignalValue>& storage);

/// Names already taken anywhere in the document (symbols, modules, keywords).
bool name_taken(const Context& ctx, const std::string& name);

/// Module-scope symbol an identifier occurrence refers to, or nullptr.
const vlog::Symbol* symbol_at(const vlog::ModuleSymbols& syms, const vlog::Expr& ident);

/// Text inserted before `offset` as a new line with the same indentation.
std::string own_line(const std::string& src, size_t offset, const std::string& text);

/// Comment text added by T13 ("//Wire signal n 1a2b"); T6 keeps it in step.
std::string t13_comment(const Context& ctx, const std::string& kind_word, const std::string& name);
std::string t13_kind_word(vlog::NetKind kind);

/// Whether any module in the document instantiates `module`.
bool instantiated(const vlog::Ast& ast, const std::string& module);

}  // namespace rtlmark::rules
