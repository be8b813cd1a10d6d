#pragma once

#include <string>
#include <vector>

namespace mixsde {

/// A real expression in the variables t and x.
///
/// Grammar (lowest to highest precedence):
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := atom ('^' unary)?          right associative
///   atom    := number | 't' | 'x' | 'pi' | name '(' args ')' | '(' sum ')'
/// so -x^2 is -(x^2) and 2^-1 is 0.5.  Functions: exp log sqrt sin cos tan
/// tanh abs (one argument), min max pow (two arguments).
///
/// Evaluation is a postfix program run on a private stack: operands are
/// evaluated left to right, every operator is a single IEEE double operation
/// (^ and pow call std::pow), and nothing is folded or reassociated, so the
/// result is a fixed function of the source text.
class Expression {
 public:
  /// Throws DomainError with the offending column on a syntax error.
  static Expression parse(const std::string& text);

  /// The constant function c.
  static Expression constant(double c);

  double operator()(double t, double x) const noexcept;

  const std::string& text() const noexcept { return text_; }

  /// True if the expression does not mention t.
  bool time_independent() const noexcept;

  enum class Op : unsigned char {
    push, var_t, var_x, add, sub, mul, div, neg, pow,
    exp, log, sqrt, sin, cos, tan, tanh, abs, min, max,
  };
  struct Instr {
    Op op;
    double value = 0.0;
  };

 private:
  std::string text_;
  std::vector<Instr> code_;
  std::size_t depth_ = 0;
};

}  // namespace mixsde
