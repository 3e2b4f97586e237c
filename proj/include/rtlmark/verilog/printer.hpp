// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "rtlmark/verilog/ast.hpp"
#include "rtlmark/verilog/parser.hpp"

namespace rtlmark::vlog {

/// Prints a document. Nodes that still carry a source span print as their
/// original bytes; constructed nodes print in the canonical style.
SourceText print(const Ast& ast);

std::string print_number(const NumberLiteral& lit);
/// `src` supplies original text for spanned nodes; pass nullptr to force
/// canonical output.
std::string print_expr(const Expr& e, const std::string* src = nullptr);
std::string print_stmt(const Stmt& s, const std::string* src = nullptr, int indent = 0);
std::string print_range(const Range& r, const std::string* src = nullptr);
std::string print_event_control(const EventControl& ec, const std::string* src = nullptr);
std::string print_item(const Item& it, const std::string* src = nullptr, int indent = 1);
std::string print_module(const ModuleDecl& m, const std::string* src = nullptr);

/// Builds a literal from a value. Digits are the minimal spelling in the
/// given base (at least one digit); `upper` selects hex digit case.
NumberLiteral make_number(int width, char base_char, const BitVec& value, bool upper = false,
                          std::vector<int> separators = {});
/// Digits of `value` in `radix`, padded on the left to `min_digits`.
std::string format_digits(const BitVec& value, int radix, bool upper, size_t min_digits = 0);

/// Span-free dump used for structural comparison. Captures every
/// semantic field plus literal spelling and attached comments.
std::string dump(const Ast& ast);
std::string dump_expr(const Expr& e);
bool structurally_equal(const Ast& a, const Ast& b);

}  // namespace rtlmark::vlog
