#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fracavg {

class ExpressionError : public std::invalid_argument {
 public:
  ExpressionError(const std::string& message, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Compiled arithmetic expression over a fixed list of named variables.
///
/// Supports + - * / ^, unary minus, parentheses, the constants pi and e, and
/// sin cos tan sinh cosh tanh exp log sqrt abs (one argument) and pow min max
/// (two arguments). Evaluation is const and allocation-free, so one
/// Expression can be shared between threads.
class Expression {
 public:
  static Expression parse(std::string_view text, std::vector<std::string> variables);

  /// values[i] binds variables[i].
  double evaluate(std::span<const double> values) const;

  const std::string& text() const noexcept { return text_; }

  struct Op {
    enum class Kind { constant, variable, negate, add, sub, mul, div, pow, call1, call2 };
    Kind kind;
    double value = 0.0;
    std::size_t index = 0;
    double (*fn1)(double) = nullptr;
    double (*fn2)(double, double) = nullptr;
  };

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::vector<Op> program_;
  std::size_t max_stack_ = 0;

  friend class ExpressionParser;
};

}  // namespace fracavg
