// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtlmark/verilog/ast.hpp"
#include "rtlmark/verilog/eval.hpp"

namespace rtlmark::vlog {

enum class SymbolKind { Port, Net, Parameter, Instance };

struct Symbol {
  std::string name;
  SymbolKind kind = SymbolKind::Net;
  Direction dir = Direction::Input;  // ports only
  NetKind net_kind = NetKind::Wire;
  bool is_signed = false;
  bool header_param = false;
  bool local_param = false;
  int width = 1;
  std::optional<int> left, right;  // declared range when resolvable
  Span decl;                       // name span of the declaration
  size_t order = 0;                // declaration order within the module
  std::string scope;               // block label for block-local declarations
  std::vector<Span> uses;          // every reference, including writes
  std::vector<Span> drivers;       // references in write position

  bool is_port() const { return kind == SymbolKind::Port; }
  bool is_internal_net() const { return kind == SymbolKind::Net; }
  size_t reads() const { return uses.size() - drivers.size(); }
};

struct Diagnostic {
  enum class Kind { Unresolved, Shadowed, Duplicate };
  Kind kind;
  std::string name;
  Span span;
  std::string message;
};

struct ModuleSymbols {
  std::string module;
  std::vector<Symbol> symbols;  // declaration order; block locals after module scope
  std::map<std::string, size_t> index;  // module-scope names
  std::vector<Diagnostic> diagnostics;
  ParamEnv params;

  const Symbol* find(const std::string& name) const;
};

struct SymbolTable {
  std::vector<ModuleSymbols> modules;
  const ModuleSymbols* module(const std::string& name) const;
};

/// Builds the use-def map. Unresolved or shadowed names become diagnostics.
SymbolTable resolve(const Ast& ast);
ModuleSymbols resolve_module(const Ast& ast, const ModuleDecl& m);

}  // namespace rtlmark::vlog
