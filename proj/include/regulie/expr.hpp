#pragma once

#include <memory>
#include <string>
#include <vector>

#include "regulie/curves.hpp"

namespace regulie {

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

/// A parsed expression over named scalar variables, optionally combining
/// algebra basis atoms e1..eN linearly. Grammar: + - * / ^ (integer powers),
/// parentheses, the functions sin/cos/exp, the constant pi, numeric
/// literals (C-style, so "2e1" is the number 20; write "2*e1" for basis
/// multiples). Throws UsageError on malformed input.
class Expr {
 public:
  Expr() = default;

  /// `vars` are the variable names in index order (e.g. {"t"} or
  /// {"x1","x2"}); `basis_dim` > 0 enables atoms e1..e{basis_dim}.
  static Expr parse(const std::string& text,
                    const std::vector<std::string>& vars, int basis_dim = 0);

  /// True when the expression carries basis atoms (algebra-valued).
  bool vector_valued() const;
  /// Evaluate a scalar-valued expression. Throws UsageError if vector-valued.
  double eval_scalar(const Vec& vars) const;
  /// Evaluate as algebra coefficients of length `dim`. A scalar-valued
  /// expression is accepted only when it evaluates to zero.
  Vec eval_coeffs(const Vec& vars, int dim) const;
  /// Symbolic partial derivative with respect to variable index `var`.
  Expr derivative(int var) const;
  /// True for polynomial expressions (division only by constants).
  bool polynomial() const;

  const std::string& text() const { return text_; }

 private:
  ExprNodePtr root_;
  int nvars_ = 0;
  int basis_dim_ = 0;
  std::string text_;
};

/// Split at top-level occurrences of `sep` (ignoring separators inside
/// parentheses); trims surrounding whitespace from each piece.
std::vector<std::string> split_top_level(const std::string& text, char sep);

/// "sin(t)*e1 + 0.5*e3" -> closed-form algebra curve on g.
AlgebraCurve curve_from_expression(const GroupPtr& g, const std::string& text);

/// Comma-separated component expressions in t, e.g.
/// "0.5+0.25*cos(2*pi*t), 0.5+0.25*sin(2*pi*t)"; the velocity is the
/// symbolic derivative.
PathInBase path_from_expressions(const std::string& text);

}  // namespace regulie
