// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/verilog/lexer.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace rtlmark::vlog {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool based_digit(char c) {
  return std::isxdigit(static_cast<unsigned char>(c)) || c == 'x' || c == 'X' || c == 'z' ||
         c == 'Z' || c == '?' || c == '_';
}
bool base_letter(char c) {
  switch (c) {
    case 'b': case 'B': case 'o': case 'O': case 'd': case 'D': case 'h': case 'H':
      return true;
    default:
      return false;
  }
}

// Longest match first.
constexpr std::array<std::string_view, 27> kOperators = {
    "<<<", ">>>", "===", "!==", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "~&", "~|",
    "~^",  "^~",  "**",  "+:",  "-:", "->", "(",  ")",  "[",  "]",  "{",  "}",  ";"};

}  // namespace

SourcePos position_of(const std::string& source, size_t offset) {
  SourcePos p;
  p.offset = offset;
  for (size_t i = 0; i < offset && i < source.size(); ++i) {
    if (source[i] == '\n') {
      ++p.line;
      p.col = 1;
    } else {
      ++p.col;
    }
  }
  return p;
}

std::vector<Token> lex(const std::string& src, const std::string& origin, LexOptions opts) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError(origin, SourcePos{i, line, col}, msg);
  };

  while (true) {
    size_t trivia_begin = i;
    // Trivia: whitespace, comments, optionally attributes.
    while (i < src.size()) {
      char c = src[i];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        advance(1);
      } else if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
        while (i < src.size() && src[i] != '\n') advance(1);
      } else if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
        size_t close = src.find("*/", i + 2);
        if (close == std::string::npos) fail("unterminated block comment");
        advance(close + 2 - i);
      } else if (opts.skip_attributes && c == '(' && i + 1 < src.size() && src[i + 1] == '*' &&
                 !(i + 2 < src.size() && src[i + 2] == ')')) {
        size_t close = src.find("*)", i + 2);
        if (close == std::string::npos) fail("unterminated attribute");
        advance(close + 2 - i);
      } else {
        break;
      }
    }
    Token t;
    t.trivia = Span{trivia_begin, i};
    t.line = line;
    t.col = col;
    size_t start = i;
    if (i >= src.size()) {
      t.kind = TokenKind::End;
      t.span = Span{i, i};
      out.push_back(t);
      break;
    }
    char c = src[i];
    if (ident_start(c)) {
      while (i < src.size() && ident_char(src[i])) advance(1);
      t.kind = TokenKind::Identifier;
    } else if (c == '\\') {
      while (i < src.size() && !std::isspace(static_cast<unsigned char>(src[i]))) advance(1);
      t.kind = TokenKind::EscapedIdentifier;
    } else if (c == '$') {
      advance(1);
      while (i < src.size() && ident_char(src[i])) advance(1);
      t.kind = TokenKind::SystemName;
    } else if (c == '`') {
      advance(1);
      while (i < src.size() && ident_char(src[i])) advance(1);
      t.kind = TokenKind::Directive;
    } else if (c == '"') {
      advance(1);
      while (i < src.size() && src[i] != '"' && src[i] != '\n') advance(src[i] == '\\' ? 2 : 1);
      if (i >= src.size() || src[i] != '"') fail("unterminated string literal");
      advance(1);
      t.kind = TokenKind::String;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '\'' && i + 1 < src.size() &&
                (base_letter(src[i + 1]) ||
                 ((src[i + 1] == 's' || src[i + 1] == 'S') && i + 2 < src.size() &&
                  base_letter(src[i + 2]))))) {
      while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '_'))
        advance(1);
      if (i < src.size() && src[i] == '\'') {
        size_t j = i + 1;
        if (j < src.size() && (src[j] == 's' || src[j] == 'S')) ++j;
        if (j < src.size() && base_letter(src[j])) {
          advance(j + 1 - i);
          size_t digits_start = i;
          while (i < src.size() && based_digit(src[i])) advance(1);
          if (i == digits_start) fail("based number without digits");
        }
      }
      if (i < src.size() && src[i] == '.') fail("real numbers are not supported");
      t.kind = TokenKind::Number;
    } else {
      std::string_view rest(src.data() + i, src.size() - i);
      size_t n = 0;
      for (auto op : kOperators) {
        if (rest.substr(0, op.size()) == op) {
          n = op.size();
          break;
        }
      }
      if (n == 0) {
        static const std::string single = "+-*/%<>=!~&|^?:,.#@'";
        if (single.find(c) == std::string::npos)
          fail(std::string("unexpected character '") + c + "'");
        n = 1;
      }
      advance(n);
      t.kind = TokenKind::Operator;
    }
    t.span = Span{start, i};
    out.push_back(t);
  }
  return out;
}

std::vector<Comment> comments_in(const std::string& src, Span trivia) {
  std::vector<Comment> out;
  if (!trivia.valid()) return out;
  size_t i = trivia.begin;
  while (i < trivia.end) {
    if (src.compare(i, 2, "//") == 0) {
      size_t e = src.find('\n', i);
      if (e == std::string::npos || e > trivia.end) e = trivia.end;
      out.push_back(Comment{src.substr(i, e - i), Span{i, e}});
      i = e;
    } else if (src.compare(i, 2, "/*") == 0) {
      size_t e = src.find("*/", i + 2);
      e = (e == std::string::npos) ? trivia.end : e + 2;
      out.push_back(Comment{src.substr(i, e - i), Span{i, e}});
      i = e;
    } else {
      ++i;
    }
  }
  return out;
}

NumberLiteral parse_number(std::string_view s) {
  NumberLiteral lit;
  size_t apos = s.find('\'');
  std::string_view digits_part = s;
  if (apos != std::string_view::npos) {
    lit.based = true;
    std::string size_digits;
    for (char c : s.substr(0, apos))
      if (c != '_') size_digits.push_back(c);
    if (!size_digits.empty()) lit.width = std::stoi(size_digits);
    size_t j = apos + 1;
    if (s[j] == 's' || s[j] == 'S') {
      lit.is_signed = true;
      ++j;
    }
    lit.base_char = s[j];
    digits_part = s.substr(j + 1);
  } else {
    lit.is_signed = true;  // unbased decimal literals are signed
    lit.base_char = 'd';
  }
  for (char c : digits_part) {
    if (c == '_')
      lit.separators.push_back(static_cast<int>(lit.digits.size()));
    else
      lit.digits.push_back(c);
  }
  auto parsed = BitVec::parse_digits(lit.digits, lit.radix());
  BitVec v = parsed ? *parsed : BitVec::unknown(1);
  int width = lit.width ? *lit.width : std::max(32, v.width());
  // An unknown leading digit extends as unknown.
  bool extend_x = v.width() > 0 && v.is_x(v.width() - 1) && width > v.width();
  BitVec sized = v.resized(width);
  if (extend_x)
    for (int b = v.width(); b < width; ++b) sized.set_x(b);
  lit.value = sized;
  return lit;
}

bool is_keyword(std::string_view w) {
  static const std::unordered_set<std::string_view> kw = {
      "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1", "case",
      "casex", "casez", "cell", "cmos", "config", "deassign", "default", "defparam", "design",
      "disable", "edge", "else", "end", "endcase", "endconfig", "endfunction", "endgenerate",
      "endmodule", "endprimitive", "endspecify", "endtable", "endtask", "event", "for", "force",
      "forever", "fork", "function", "generate", "genvar", "highz0", "highz1", "if", "ifnone",
      "incdir", "include", "initial", "inout", "input", "instance", "integer", "join", "large",
      "liblist", "library", "localparam", "macromodule", "medium", "module", "nand", "negedge",
      "nmos", "nor", "noshowcancelled", "not", "notif0", "notif1", "or", "output", "parameter",
      "pmos", "posedge", "primitive", "pull0", "pull1", "pulldown", "pullup",
      "pulsestyle_onevent", "pulsestyle_ondetect", "rcmos", "real", "realtime", "reg",
      "release", "repeat", "rnmos", "rpmos", "rtran", "rtranif0", "rtranif1", "scalared",
      "showcancelled", "signed", "small", "specify", "specparam", "strong0", "strong1",
      "supply0", "supply1", "table", "task", "time", "tran", "tranif0", "tranif1", "tri",
      "tri0", "tri1", "triand", "trior", "trireg", "unsigned", "use", "uwire", "vectored",
      "wait", "wand", "weak0", "weak1", "while", "wire", "wor", "xnor", "xor",
      // SystemVerilog words commonly produced by code generators
      "logic", "always_ff", "always_comb", "always_latch", "interface", "endinterface",
      "typedef", "enum", "struct", "bit", "int"};
  return kw.count(w) > 0;
}

}  // namespace rtlmark::vlog
