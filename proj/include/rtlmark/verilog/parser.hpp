// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "rtlmark/verilog/ast.hpp"

namespace rtlmark::vlog {

struct SourceText {
  std::string content;
  std::string origin = "<input>";
};

/// Parses the supported synthesizable subset: ANSI-port modules, parameters,
/// wire/reg/integer declarations, continuous assigns, always blocks with edge
/// lists or @*, if/else, case/casez/casex, blocking and nonblocking
/// assignments, module instances and the usual expression operators.
/// Anything else raises ParseError with a line/column position.
Ast parse(const SourceText& source);

/// Parses a single expression or statement in isolation. Spans refer to the
/// given text.
Expr parse_expression(const std::string& text);
Stmt parse_statement(const std::string& text);

}  // namespace rtlmark::vlog
