// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rtlmark/bitvec.hpp"

namespace rtlmark::vlog {

/// Half-open byte range in the source text. A default-constructed span is
/// invalid and marks a synthetic (constructed) node.
struct Span {
  static constexpr size_t npos = static_cast<size_t>(-1);
  size_t begin = npos;
  size_t end = npos;

  bool valid() const { return begin != npos && end != npos; }
  size_t size() const { return valid() ? end - begin : 0; }
  bool contains(const Span& o) const {
    return valid() && o.valid() && o.begin >= begin && o.end <= end;
  }
};

/// Deep-copying owning pointer for recursive value types.
template <typename T>
class Box {
 public:
  Box() = default;
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& o) : ptr_(o.ptr_ ? std::make_unique<T>(*o.ptr_) : nullptr) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& o) {
    if (this != &o) ptr_ = o.ptr_ ? std::make_unique<T>(*o.ptr_) : nullptr;
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  explicit operator bool() const { return static_cast<bool>(ptr_); }
  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }
  const T* get() const { return ptr_.get(); }

 private:
  std::unique_ptr<T> ptr_;
};

struct Comment {
  std::string text;  // including the // or /* */ markers
  Span span;
};

enum class Base { Binary, Octal, Decimal, Hexadecimal };

struct NumberLiteral {
  std::optional<int> width;
  bool based = false;      // has an apostrophe base specifier
  bool is_signed = false;  // 's' marker, or an unbased decimal
  char base_char = 'd';    // base letter as written
  std::string digits;      // digits as written, underscores removed
  std::vector<int> separators;  // digit counts preceding each underscore
  BitVec value;            // sized to width (32 when unsized)

  Base base() const;
  int radix() const;
  int effective_width() const { return value.width(); }
  bool has_unknown() const { return value.has_unknown(); }
};

enum class ExprKind {
  Identifier,
  Number,
  Unary,
  Binary,
  Ternary,
  Concat,
  Replicate,  // operands: count, Concat
  Index,      // operands: base, index
  PartSelect,         // operands: base, msb, lsb
  IndexedPartSelect,  // operands: base, start, width; text is "+:" or "-:"
  Paren,
};

struct Expr {
  ExprKind kind = ExprKind::Identifier;
  std::string text;  // identifier name or operator spelling
  NumberLiteral number;
  std::vector<Expr> operands;
  Span span;

  static Expr ident(std::string name);
  static Expr num(NumberLiteral lit);
  static Expr unary(std::string op, Expr e);
  static Expr binary(std::string op, Expr l, Expr r);
  static Expr paren(Expr e);
  static Expr ternary(Expr c, Expr t, Expr f);

  bool is_ident() const { return kind == ExprKind::Identifier; }
  /// Strips any number of enclosing parentheses.
  const Expr& unparen() const;
};

struct Range {
  Expr msb;
  Expr lsb;
  Span span;
};

enum class Direction { Input, Output, Inout };
enum class NetKind { Wire, Reg, Integer };

struct Port {
  Direction dir = Direction::Input;
  NetKind kind = NetKind::Wire;
  bool explicit_kind = false;  // 'wire'/'reg' spelled out
  bool is_signed = false;
  std::optional<Range> range;
  std::string name;
  Span span;       // whole port declaration (header tokens + name)
  Span name_span;
  bool continuation = false;  // inherited direction/type from the previous port
  std::vector<Comment> comments;
};

struct Declarator {
  std::string name;
  Span name_span;
  std::optional<Expr> init;
};

struct NetDecl {
  NetKind kind = NetKind::Wire;
  bool is_signed = false;
  std::optional<Range> range;
  std::vector<Declarator> names;
  Span span;
};

struct ParamAssign {
  std::string name;
  Span name_span;
  Expr value;
};

struct ParamDecl {
  bool local = false;
  bool is_signed = false;
  std::optional<Range> range;
  std::vector<ParamAssign> params;
  Span span;
};

enum class Edge { Posedge, Negedge, Level };

struct EventExpr {
  Edge edge = Edge::Level;
  Expr signal;
  Span span;
};

struct EventControl {
  bool star = false;
  std::vector<EventExpr> events;
  std::vector<std::string> separators;  // "or" or "," between events
  std::vector<Span> separator_spans;
  Span span;

  enum class Style { OrKeyword, Comma, Mixed, None };
  Style separator_style() const;
  bool has_edges() const;
};

struct Stmt;

struct CaseItem {
  std::vector<Expr> labels;
  bool is_default = false;
  Box<Stmt> body;
  Span span;
};

enum class StmtKind { Block, If, Case, Assign, Null };

struct Stmt {
  StmtKind kind = StmtKind::Null;
  // Block
  std::string label;
  std::vector<NetDecl> decls;
  std::vector<Stmt> stmts;
  // If: cond; Case: subject in cond; Assign: lhs in cond
  Expr cond;
  Expr rhs;
  bool nonblocking = false;
  Box<Stmt> then_stmt;
  Box<Stmt> else_stmt;
  std::string case_keyword;
  std::vector<CaseItem> items;
  Span span;
  std::vector<Comment> comments;

  static Stmt assign(Expr lhs, Expr rhs, bool nonblocking);
  static Stmt block(std::vector<Stmt> stmts);
};

struct ContAssign {
  std::vector<std::pair<Expr, Expr>> assigns;
};

struct Always {
  EventControl control;
  Stmt body;
};

struct Connection {
  std::string port;  // empty for positional
  bool named = false;
  std::optional<Expr> expr;
  Span span;
};

struct Instance {
  std::string module_name;
  Span module_span;
  std::vector<Connection> params;
  std::string name;
  Span name_span;
  std::vector<Connection> ports;
};

enum class ItemKind { Net, Param, Assign, Always, Instance };

struct Item {
  std::variant<NetDecl, ParamDecl, ContAssign, Always, Instance> node;
  Span span;
  std::vector<Comment> comments;

  ItemKind kind() const { return static_cast<ItemKind>(node.index()); }
  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <typename T>
  T* as() {
    return std::get_if<T>(&node);
  }
};

struct ModuleDecl {
  std::string name;
  Span name_span;
  std::vector<ParamDecl> header_params;
  Span header_params_span;  // "#( ... )" when present
  std::vector<Port> ports;
  Span port_list_span;  // "( ... )" when present
  std::vector<Item> items;
  Span span;
  size_t endmodule_offset = Span::npos;

  const Port* find_port(const std::string& name) const;
};

enum class TokenKind { Identifier, EscapedIdentifier, Number, Operator, SystemName, Directive, String, End };

struct Token {
  TokenKind kind = TokenKind::End;
  Span span;
  Span trivia;  // whitespace and comments preceding the token
  int line = 1;
  int col = 1;
};

/// Parsed document. Nodes carrying a valid span are unmodified views into
/// `source`; nodes without a span were constructed and print canonically.
struct Ast {
  std::shared_ptr<const std::string> source;
  std::string origin;
  std::shared_ptr<const std::vector<Token>> tokens;
  std::vector<ModuleDecl> modules;

  const ModuleDecl* find_module(const std::string& name) const;
  std::string_view text(const Span& s) const;
};

/// Verilog-2005 reserved words.
bool is_keyword(std::string_view word);

}  // namespace rtlmark::vlog
