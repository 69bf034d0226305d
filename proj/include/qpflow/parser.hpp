#pragma once

// Text format for quasi-polynomial systems:
//
//   # logistic growth
//   x' = x*(2 - x)
//   x(0) = 0.5
//
// Statements are separated by ';' or newlines. Each right-hand side must
// expand into a finite sum of power products c * prod x_k^e_k with real
// exponents; see docs/grammar.md for the full grammar.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qpflow/qp_core.hpp"

namespace qpflow {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Number, Variable, Add, Sub, Mul, Div, Pow, Neg };
  Kind kind;
  double value = 0.0;  // Number
  int var = -1;        // Variable, resolved index into SystemSource::names
  std::string name;    // Variable
  ExprPtr lhs;
  ExprPtr rhs;         // unused for Neg
  int line = 0;
  int column = 0;
};

struct SystemSource {
  std::vector<std::string> names;  // declaration order of the equations
  std::vector<ExprPtr> rhs;        // rhs[i] is the right-hand side of names[i]'
  Vector initial;

  // Direct interpretation of the source expressions, independent of the
  // quasi-monomial expansion.
  Vector evaluate_rhs(const Vector& x) const;
};

struct ParsedSystem {
  std::vector<std::string> names;
  QpSystem system;
};

// Throws SyntaxError, UndeclaredVariable, NonPositiveInitial.
SystemSource parse_source(std::string_view text);

// Expands every rhs, divides by its own variable, merges exponent rows that
// agree within 1e-12 across all equations and sorts them lexicographically.
// Throws NotQuasiPolynomial.
ParsedSystem to_qp_system(const SystemSource& source);

// Text or JSON (detected by a leading '{').
ParsedSystem parse_named_system(std::string_view text);
QpSystem parse_system(std::string_view text);

// Canonical text form. Names default to x1..xn.
std::string serialize_system(const QpSystem& sys, const std::vector<std::string>& names = {});

std::vector<std::string> default_names(int n);

}  // namespace qpflow
