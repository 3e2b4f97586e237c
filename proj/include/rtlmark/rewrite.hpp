// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "rtlmark/verilog/ast.hpp"
#include "rtlmark/verilog/symbols.hpp"

namespace rtlmark {

/// Collects non-overlapping text edits against an immutable source and
/// produces the edited text. Insertions at the same offset keep their
/// request order.
class Rewriter {
 public:
  explicit Rewriter(const std::string& source) : src_(source) {}

  void replace(const vlog::Span& span, std::string text);
  void insert(size_t offset, std::string text);
  bool empty() const { return edits_.empty(); }

  /// Throws Error when two replacements overlap.
  std::string result() const;

 private:
  struct Edit {
    size_t begin, end;
    std::string text;
    size_t seq;
  };
  const std::string& src_;
  std::vector<Edit> edits_;
};

/// Renames module-scope symbols at their declarations and every use.
/// `names` maps old name to new name.
void rename_symbols(Rewriter& rw, const vlog::ModuleSymbols& syms,
                    const std::map<std::string, std::string>& names);

/// Leading whitespace of the line containing `offset`, when everything
/// between the line start and `offset` is blank; otherwise empty.
std::string line_indent(const std::string& src, size_t offset);

}  // namespace rtlmark
