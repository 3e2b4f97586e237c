// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/rewrite.hpp"

#include <algorithm>

#include "rtlmark/errors.hpp"

namespace rtlmark {

void Rewriter::replace(const vlog::Span& span, std::string text) {
  if (!span.valid()) throw Error("internal: edit on a synthetic node");
  edits_.push_back({span.begin, span.end, std::move(text), edits_.size()});
}

void Rewriter::insert(size_t offset, std::string text) {
  edits_.push_back({offset, offset, std::move(text), edits_.size()});
}

std::string Rewriter::result() const {
  std::vector<Edit> sorted = edits_;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Edit& a, const Edit& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    // Pure insertions go before a replacement starting at the same offset.
    bool ai = a.begin == a.end, bi = b.begin == b.end;
    if (ai != bi) return ai;
    return a.seq < b.seq;
  });
  std::string out;
  size_t pos = 0;
  for (const auto& e : sorted) {
    if (e.begin < pos) throw Error("internal: overlapping source edits");
    out.append(src_, pos, e.begin - pos);
    out += e.text;
    pos = e.end;
  }
  out.append(src_, pos, std::string::npos);
  return out;
}

void rename_symbols(Rewriter& rw, const vlog::ModuleSymbols& syms,
                    const std::map<std::string, std::string>& names) {
  for (const auto& s : syms.symbols) {
    if (!s.scope.empty()) continue;
    auto it = names.find(s.name);
    if (it == names.end()) continue;
    rw.replace(s.decl, it->second);
    for (const auto& u : s.uses)
      if (u.valid()) rw.replace(u, it->second);
  }
}

std::string line_indent(const std::string& src, size_t offset) {
  size_t start = src.rfind('\n', offset == 0 ? 0 : offset - 1);
  start = start == std::string::npos ? 0 : start + 1;
  if (offset < start) return {};
  std::string ws = src.substr(start, offset - start);
  for (char c : ws)
    if (c != ' ' && c != '\t') return {};
  return ws;
}

}  // namespace rtlmark
