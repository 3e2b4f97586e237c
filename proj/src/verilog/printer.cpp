// SPDX-License-Identifier: Apache-2.0
#include "rtlmark/verilog/printer.hpp"

#include <algorithm>
#include <sstream>

namespace rtlmark::vlog {

namespace {

std::string slice(const std::string* src, const Span& s) {
  return src->substr(s.begin, s.end - s.begin);
}

bool spanned(const std::string* src, const Span& s) {
  return src != nullptr && s.valid() && s.end <= src->size();
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Ternary:
      return 0;
    case ExprKind::Binary: {
      const std::string& op = e.text;
      if (op == "||") return 1;
      if (op == "&&") return 2;
      if (op == "|") return 3;
      if (op == "^" || op == "~^" || op == "^~") return 4;
      if (op == "&") return 5;
      if (op == "==" || op == "!=" || op == "===" || op == "!==") return 6;
      if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
      if (op == "<<" || op == ">>" || op == "<<<" || op == ">>>") return 8;
      if (op == "+" || op == "-") return 9;
      if (op == "*" || op == "/" || op == "%") return 10;
      return 11;
    }
    case ExprKind::Unary:
      return 12;
    default:
      return 13;
  }
}

std::string indent_str(int n) { return std::string(static_cast<size_t>(n) * 2, ' '); }

std::string kind_word(NetKind k) {
  switch (k) {
    case NetKind::Wire: return "wire";
    case NetKind::Reg: return "reg";
    case NetKind::Integer: return "integer";
  }
  return "wire";
}

std::string dir_word(Direction d) {
  switch (d) {
    case Direction::Input: return "input";
    case Direction::Output: return "output";
    case Direction::Inout: return "inout";
  }
  return "input";
}

std::string print_comments(const std::vector<Comment>& cs, int indent) {
  std::string out;
  for (const auto& c : cs) out += indent_str(indent) + c.text + "\n";
  return out;
}

std::string print_param_decl(const ParamDecl& d, const std::string* src, bool header) {
  if (spanned(src, d.span)) return slice(src, d.span);
  std::string out = d.local ? "localparam" : "parameter";
  if (d.is_signed) out += " signed";
  if (d.range) out += " " + print_range(*d.range, src);
  for (size_t i = 0; i < d.params.size(); ++i) {
    out += i ? ", " : " ";
    out += d.params[i].name + " = " + print_expr(d.params[i].value, src);
  }
  if (!header) out += ";";
  return out;
}

std::string print_net_decl(const NetDecl& d, const std::string* src) {
  if (spanned(src, d.span)) return slice(src, d.span);
  std::string out = kind_word(d.kind);
  if (d.is_signed && d.kind != NetKind::Integer) out += " signed";
  if (d.range) out += " " + print_range(*d.range, src);
  for (size_t i = 0; i < d.names.size(); ++i) {
    out += i ? ", " : " ";
    out += d.names[i].name;
    if (d.names[i].init) out += " = " + print_expr(*d.names[i].init, src);
  }
  return out + ";";
}

std::string print_port(const Port& p, const std::string* src) {
  if (spanned(src, p.span)) return slice(src, p.span);
  if (p.continuation) return p.name;
  std::string out = dir_word(p.dir);
  if (p.explicit_kind) out += " " + kind_word(p.kind);
  if (p.is_signed) out += " signed";
  if (p.range) out += " " + print_range(*p.range, src);
  return out + " " + p.name;
}

std::string print_connections(const std::vector<Connection>& cs, const std::string* src) {
  std::string out = "(";
  for (size_t i = 0; i < cs.size(); ++i) {
    if (i) out += ", ";
    const Connection& c = cs[i];
    if (spanned(src, c.span)) {
      out += slice(src, c.span);
      continue;
    }
    if (c.named) {
      out += "." + c.port + "(";
      if (c.expr) out += print_expr(*c.expr, src);
      out += ")";
    } else if (c.expr) {
      out += print_expr(*c.expr, src);
    }
  }
  return out + ")";
}

std::string decimal_digits(BitVec v) {
  if (v.is_zero()) return "0";
  std::string out;
  BitVec ten(v.width() < 8 ? 8 : v.width(), 10);
  v = v.resized(ten.width());
  while (!v.is_zero()) {
    out.push_back(static_cast<char>('0' + v.umod(ten).to_u64()));
    v = v.udiv(ten);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

std::string format_digits(const BitVec& value, int radix, bool upper, size_t min_digits) {
  std::string out;
  if (radix == 10) {
    out = value.has_unknown() ? "x" : decimal_digits(value);
  } else {
    int bits = radix == 2 ? 1 : radix == 8 ? 3 : 4;
    int n = std::max(1, (value.width() + bits - 1) / bits);
    for (int d = n - 1; d >= 0; --d) {
      int v = 0;
      bool unk = false;
      for (int b = bits - 1; b >= 0; --b) {
        int i = d * bits + b;
        v <<= 1;
        if (i < value.width()) {
          if (value.is_x(i))
            unk = true;
          else if (value.bit(i))
            v |= 1;
        }
      }
      if (unk)
        out.push_back('x');
      else
        out.push_back((upper ? "0123456789ABCDEF" : "0123456789abcdef")[v]);
    }
    size_t first = out.find_first_not_of('0');
    out = first == std::string::npos ? "0" : out.substr(first);
  }
  if (out.size() < min_digits) out.insert(0, min_digits - out.size(), '0');
  return out;
}

NumberLiteral make_number(int width, char base_char, const BitVec& value, bool upper,
                          std::vector<int> separators) {
  NumberLiteral lit;
  lit.width = width;
  lit.based = true;
  lit.base_char = base_char;
  lit.value = value.resized(width);
  lit.digits = format_digits(lit.value, lit.radix(), upper);
  lit.separators = std::move(separators);
  return lit;
}

std::string print_number(const NumberLiteral& lit) {
  std::string digits;
  size_t s = 0;
  for (size_t i = 0; i <= lit.digits.size(); ++i) {
    while (s < lit.separators.size() && static_cast<size_t>(lit.separators[s]) == i) {
      digits.push_back('_');
      ++s;
    }
    if (i < lit.digits.size()) digits.push_back(lit.digits[i]);
  }
  if (!lit.based) return digits;
  std::string out;
  if (lit.width) out += std::to_string(*lit.width);
  out += "'";
  if (lit.is_signed) out += "s";
  out.push_back(lit.base_char);
  return out + digits;
}

std::string print_expr(const Expr& e, const std::string* src) {
  if (spanned(src, e.span)) return slice(src, e.span);
  switch (e.kind) {
    case ExprKind::Identifier:
      return e.text;
    case ExprKind::Number:
      return print_number(e.number);
    case ExprKind::Paren:
      return "(" + print_expr(e.operands[0], src) + ")";
    case ExprKind::Unary: {
      const Expr& x = e.operands[0];
      std::string inner = print_expr(x, src);
      if (precedence(x) < 13) inner = "(" + inner + ")";
      return e.text + inner;
    }
    case ExprKind::Binary: {
      int p = precedence(e);
      bool right_assoc = e.text == "**";
      const Expr& l = e.operands[0];
      const Expr& r = e.operands[1];
      std::string ls = print_expr(l, src);
      std::string rs = print_expr(r, src);
      int lp = precedence(l), rp = precedence(r);
      if (lp < p || (right_assoc && lp == p)) ls = "(" + ls + ")";
      if (rp < p || (!right_assoc && rp == p)) rs = "(" + rs + ")";
      return ls + " " + e.text + " " + rs;
    }
    case ExprKind::Ternary: {
      std::string c = print_expr(e.operands[0], src);
      if (precedence(e.operands[0]) == 0) c = "(" + c + ")";
      return c + " ? " + print_expr(e.operands[1], src) + " : " + print_expr(e.operands[2], src);
    }
    case ExprKind::Concat: {
      std::string out = "{";
      for (size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += ", ";
        out += print_expr(e.operands[i], src);
      }
      return out + "}";
    }
    case ExprKind::Replicate:
      return "{" + print_expr(e.operands[0], src) + print_expr(e.operands[1], src) + "}";
    case ExprKind::Index:
      return print_expr(e.operands[0], src) + "[" + print_expr(e.operands[1], src) + "]";
    case ExprKind::PartSelect:
      return print_expr(e.operands[0], src) + "[" + print_expr(e.operands[1], src) + ":" +
             print_expr(e.operands[2], src) + "]";
    case ExprKind::IndexedPartSelect:
      return print_expr(e.operands[0], src) + "[" + print_expr(e.operands[1], src) + " " +
             e.text + " " + print_expr(e.operands[2], src) + "]";
  }
  return {};
}

std::string print_range(const Range& r, const std::string* src) {
  if (spanned(src, r.span)) return slice(src, r.span);
  return "[" + print_expr(r.msb, src) + ":" + print_expr(r.lsb, src) + "]";
}

std::string print_event_control(const EventControl& ec, const std::string* src) {
  if (spanned(src, ec.span)) return slice(src, ec.span);
  if (ec.star) return "@*";
  std::string out = "@(";
  for (size_t i = 0; i < ec.events.size(); ++i) {
    if (i) {
      std::string sep = i - 1 < ec.separators.size() ? ec.separators[i - 1] : "or";
      out += sep == "," ? ", " : " or ";
    }
    const EventExpr& ev = ec.events[i];
    if (ev.edge == Edge::Posedge) out += "posedge ";
    if (ev.edge == Edge::Negedge) out += "negedge ";
    out += print_expr(ev.signal, src);
  }
  return out + ")";
}

std::string print_stmt(const Stmt& s, const std::string* src, int indent) {
  if (spanned(src, s.span)) return slice(src, s.span);
  std::string pad = indent_str(indent);
  switch (s.kind) {
    case StmtKind::Null:
      return ";";
    case StmtKind::Assign:
      return print_expr(s.cond, src) + (s.nonblocking ? " <= " : " = ") + print_expr(s.rhs, src) +
             ";";
    case StmtKind::Block: {
      std::string out = "begin";
      if (!s.label.empty()) out += " : " + s.label;
      out += "\n";
      for (const auto& d : s.decls) out += pad + "  " + print_net_decl(d, src) + "\n";
      for (const auto& st : s.stmts)
        out += print_comments(st.comments, indent + 1) + pad + "  " +
               print_stmt(st, src, indent + 1) + "\n";
      return out + pad + "end";
    }
    case StmtKind::If: {
      std::string out = "if (" + print_expr(s.cond, src) + ") " + print_stmt(*s.then_stmt, src, indent);
      if (s.else_stmt) {
        out += s.then_stmt->kind == StmtKind::Block ? " else " : "\n" + pad + "else ";
        out += print_stmt(*s.else_stmt, src, indent);
      }
      return out;
    }
    case StmtKind::Case: {
      std::string out = s.case_keyword.empty() ? "case" : s.case_keyword;
      out += " (" + print_expr(s.cond, src) + ")\n";
      for (const auto& ci : s.items) {
        out += pad + "  ";
        if (spanned(src, ci.span)) {
          out += slice(src, ci.span) + "\n";
          continue;
        }
        if (ci.is_default) {
          out += "default";
        } else {
          for (size_t i = 0; i < ci.labels.size(); ++i) {
            if (i) out += ", ";
            out += print_expr(ci.labels[i], src);
          }
        }
        out += ": " + print_stmt(*ci.body, src, indent + 1) + "\n";
      }
      return out + pad + "endcase";
    }
  }
  return {};
}

std::string print_item(const Item& it, const std::string* src, int indent) {
  std::string pad = indent_str(indent);
  std::string body;
  if (spanned(src, it.span)) {
    body = slice(src, it.span);
  } else if (auto* n = it.as<NetDecl>()) {
    body = print_net_decl(*n, src);
  } else if (auto* p = it.as<ParamDecl>()) {
    body = print_param_decl(*p, src, false);
  } else if (auto* a = it.as<ContAssign>()) {
    body = "assign ";
    for (size_t i = 0; i < a->assigns.size(); ++i) {
      if (i) body += ", ";
      body += print_expr(a->assigns[i].first, src) + " = " + print_expr(a->assigns[i].second, src);
    }
    body += ";";
  } else if (auto* al = it.as<Always>()) {
    body = "always " + print_event_control(al->control, src) + " " +
           print_stmt(al->body, src, indent);
  } else if (auto* in = it.as<Instance>()) {
    body = in->module_name;
    if (!in->params.empty()) body += " #" + print_connections(in->params, src);
    body += " " + in->name + " " + print_connections(in->ports, src) + ";";
  }
  return print_comments(it.comments, indent) + pad + body + "\n";
}

std::string print_module(const ModuleDecl& m, const std::string* src) {
  if (spanned(src, m.span)) return slice(src, m.span);
  std::string out = "module " + m.name;
  if (!m.header_params.empty()) {
    out += " #(";
    for (size_t i = 0; i < m.header_params.size(); ++i) {
      if (i) out += ", ";
      out += print_param_decl(m.header_params[i], src, true);
    }
    out += ")";
  }
  if (!m.ports.empty()) {
    out += " (\n";
    for (size_t i = 0; i < m.ports.size(); ++i) {
      out += print_comments(m.ports[i].comments, 1);
      out += "  " + print_port(m.ports[i], src) + (i + 1 < m.ports.size() ? ",\n" : "\n");
    }
    out += ")";
  }
  out += ";\n";
  for (const auto& it : m.items) out += print_item(it, src, 1);
  return out + "endmodule";
}

SourceText print(const Ast& ast) {
  const std::string* src = ast.source.get();
  bool pristine = src != nullptr;
  for (const auto& m : ast.modules) pristine = pristine && m.span.valid();
  if (pristine) return SourceText{*src, ast.origin};
  std::string out;
  for (size_t i = 0; i < ast.modules.size(); ++i) {
    if (i) out += "\n\n";
    out += print_module(ast.modules[i], src);
  }
  out += "\n";
  return SourceText{out, ast.origin};
}

// ------------------------------------------------------------------- dump

namespace {

void dump_comments(std::ostringstream& os, const std::vector<Comment>& cs) {
  for (const auto& c : cs) os << "(comment " << c.text << ")";
}

void dump_expr_to(std::ostringstream& os, const Expr& e) {
  switch (e.kind) {
    case ExprKind::Identifier:
      os << "(id " << e.text << ")";
      return;
    case ExprKind::Number: {
      const NumberLiteral& n = e.number;
      os << "(num w=" << (n.width ? std::to_string(*n.width) : "-") << " based=" << n.based
         << " s=" << n.is_signed << " b=" << n.base_char << " d=" << n.digits << " sep=";
      for (int s : n.separators) os << s << ",";
      os << " v=" << n.value.to_binary() << ")";
      return;
    }
    default:
      break;
  }
  static const char* names[] = {"id",    "num",   "unary", "binary",     "ternary", "concat",
                                "rep",   "index", "part",  "indexedpart", "paren"};
  os << "(" << names[static_cast<int>(e.kind)];
  if (!e.text.empty()) os << " " << e.text;
  for (const auto& o : e.operands) {
    os << " ";
    dump_expr_to(os, o);
  }
  os << ")";
}

void dump_range(std::ostringstream& os, const std::optional<Range>& r) {
  if (!r) return;
  os << "[";
  dump_expr_to(os, r->msb);
  os << ":";
  dump_expr_to(os, r->lsb);
  os << "]";
}

void dump_net(std::ostringstream& os, const NetDecl& d) {
  os << "(net " << kind_word(d.kind) << " s=" << d.is_signed;
  dump_range(os, d.range);
  for (const auto& n : d.names) {
    os << " " << n.name;
    if (n.init) {
      os << "=";
      dump_expr_to(os, *n.init);
    }
  }
  os << ")";
}

void dump_param(std::ostringstream& os, const ParamDecl& d) {
  os << "(param local=" << d.local << " s=" << d.is_signed;
  dump_range(os, d.range);
  for (const auto& p : d.params) {
    os << " " << p.name << "=";
    dump_expr_to(os, p.value);
  }
  os << ")";
}

void dump_stmt(std::ostringstream& os, const Stmt& s) {
  dump_comments(os, s.comments);
  switch (s.kind) {
    case StmtKind::Null:
      os << "(null)";
      return;
    case StmtKind::Assign:
      os << "(assign nb=" << s.nonblocking << " ";
      dump_expr_to(os, s.cond);
      os << " ";
      dump_expr_to(os, s.rhs);
      os << ")";
      return;
    case StmtKind::Block:
      os << "(block " << s.label;
      for (const auto& d : s.decls) dump_net(os, d);
      for (const auto& st : s.stmts) {
        os << " ";
        dump_stmt(os, st);
      }
      os << ")";
      return;
    case StmtKind::If:
      os << "(if ";
      dump_expr_to(os, s.cond);
      os << " ";
      dump_stmt(os, *s.then_stmt);
      if (s.else_stmt) {
        os << " else ";
        dump_stmt(os, *s.else_stmt);
      }
      os << ")";
      return;
    case StmtKind::Case:
      os << "(" << s.case_keyword << " ";
      dump_expr_to(os, s.cond);
      for (const auto& ci : s.items) {
        os << " (item" << (ci.is_default ? " default" : "");
        for (const auto& l : ci.labels) {
          os << " ";
          dump_expr_to(os, l);
        }
        os << " ";
        dump_stmt(os, *ci.body);
        os << ")";
      }
      os << ")";
      return;
  }
}

void dump_conns(std::ostringstream& os, const std::vector<Connection>& cs) {
  for (const auto& c : cs) {
    os << " (conn " << c.named << " " << c.port << " ";
    if (c.expr) dump_expr_to(os, *c.expr);
    os << ")";
  }
}

}  // namespace

std::string dump_expr(const Expr& e) {
  std::ostringstream os;
  dump_expr_to(os, e);
  return os.str();
}

std::string dump(const Ast& ast) {
  std::ostringstream os;
  for (const auto& m : ast.modules) {
    os << "(module " << m.name << "\n";
    for (const auto& p : m.header_params) {
      os << " header";
      dump_param(os, p);
      os << "\n";
    }
    for (const auto& p : m.ports) {
      dump_comments(os, p.comments);
      os << " (port " << dir_word(p.dir) << " " << kind_word(p.kind) << " ek=" << p.explicit_kind
         << " s=" << p.is_signed << " c=" << p.continuation;
      dump_range(os, p.range);
      os << " " << p.name << ")\n";
    }
    for (const auto& it : m.items) {
      dump_comments(os, it.comments);
      os << " ";
      if (auto* n = it.as<NetDecl>()) {
        dump_net(os, *n);
      } else if (auto* p = it.as<ParamDecl>()) {
        dump_param(os, *p);
      } else if (auto* a = it.as<ContAssign>()) {
        os << "(cassign";
        for (const auto& [l, r] : a->assigns) {
          os << " ";
          dump_expr_to(os, l);
          os << "=";
          dump_expr_to(os, r);
        }
        os << ")";
      } else if (auto* al = it.as<Always>()) {
        os << "(always star=" << al->control.star;
        for (size_t i = 0; i < al->control.events.size(); ++i) {
          const auto& ev = al->control.events[i];
          os << " " << static_cast<int>(ev.edge);
          dump_expr_to(os, ev.signal);
          if (i < al->control.separators.size()) os << " " << al->control.separators[i];
        }
        os << " ";
        dump_stmt(os, al->body);
        os << ")";
      } else if (auto* in = it.as<Instance>()) {
        os << "(inst " << in->module_name << " " << in->name;
        dump_conns(os, in->params);
        os << " |";
        dump_conns(os, in->ports);
        os << ")";
      }
      os << "\n";
    }
    os << ")\n";
  }
  return os.str();
}

bool structurally_equal(const Ast& a, const Ast& b) { return dump(a) == dump(b); }

}  // namespace rtlmark::vlog
