#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fclloop/fcl/ast.hpp"
#include "fclloop/trace.hpp"

namespace fclloop::fcl {

struct Diagnostic {
  enum class Kind { Syntax, UnknownSet, UnknownAttribute, FreeVariable, NegativeCount, DuplicateName, TypeMismatch };

  int line = 0;
  int column = 0;
  Kind kind = Kind::Syntax;
  std::string message;

  /// `line:col: error: message`
  [[nodiscard]] std::string to_string() const;
};

/// Either every constraint in the file, or the diagnostics; never both.
struct ParseResult {
  std::vector<Constraint> constraints;
  std::vector<Diagnostic> diagnostics;

  [[nodiscard]] bool ok() const { return diagnostics.empty(); }
};

/// Parses a constraint file. Names are checked against `catalog`.
///
///   file       := {constraint}
///   constraint := "constraint" STRING mode ":" formula
///   mode       := "at" ("start" | "each" "step")
///   formula    := quant | impl
///   quant      := ("forall" | "exists") IDENT "in" IDENT ":" formula
///   impl       := disj ["implies" impl]
///   disj       := conj {"or" conj}
///   conj       := unary {"and" unary}
///   unary      := "not" unary | window | atom | "(" formula ")"
///   window     := "F" "[" ">=" num "," num "]" unary
///               | "G" "[" num "]" unary
///               | "P" "[" ">=" num "," num "]" unary
///   atom       := term cmp term | IDENT "in" IDENT
///   term       := num | IDENT "." IDENT | "count" "(" IDENT ")" | STRING
///   num        := ["-"] (INT | "MAX" | "BEG" | "INF")
///
/// `#` starts a line comment; consecutive `##` lines directly above a
/// constraint become its gloss.
ParseResult parse_constraints(std::string_view text, const Catalog& catalog = Catalog::dragon_hunt());

/// Parses a single formula (no `constraint` header); free variables are
/// reported like in a file.
struct FormulaParseResult {
  FormulaPtr formula;
  std::vector<Diagnostic> diagnostics;
};
FormulaParseResult parse_formula(std::string_view text, const Catalog& catalog = Catalog::dragon_hunt());

}  // namespace fclloop::fcl
