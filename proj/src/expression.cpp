#include "fracavg/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace fracavg {

ExpressionError::ExpressionError(const std::string& message, std::size_t position)
    : std::invalid_argument(message + " at position " + std::to_string(position)),
      position_(position) {}

namespace {

constexpr std::size_t kMaxStack = 64;

struct Unary {
  const char* name;
  double (*fn)(double);
};
struct Binary {
  const char* name;
  double (*fn)(double, double);
};

const std::array<Unary, 10> kUnary = {{
    {"sin", [](double x) { return std::sin(x); }},
    {"cos", [](double x) { return std::cos(x); }},
    {"tan", [](double x) { return std::tan(x); }},
    {"sinh", [](double x) { return std::sinh(x); }},
    {"cosh", [](double x) { return std::cosh(x); }},
    {"tanh", [](double x) { return std::tanh(x); }},
    {"exp", [](double x) { return std::exp(x); }},
    {"log", [](double x) { return std::log(x); }},
    {"sqrt", [](double x) { return std::sqrt(x); }},
    {"abs", [](double x) { return std::abs(x); }},
}};

const std::array<Binary, 3> kBinary = {{
    {"pow", [](double a, double b) { return std::pow(a, b); }},
    {"min", [](double a, double b) { return std::min(a, b); }},
    {"max", [](double a, double b) { return std::max(a, b); }},
}};

}  // namespace

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, Expression& out) : text_(text), out_(out) {}

  void run() {
    skip();
    expr();
    skip();
    if (pos_ != text_.size()) throw ExpressionError("unexpected character", pos_);
    if (out_.program_.empty()) throw ExpressionError("empty expression", 0);
  }

 private:
  using Kind = Expression::Op::Kind;

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw ExpressionError(std::string("expected '") + c + "'", pos_);
  }

  void emit(Expression::Op op) {
    switch (op.kind) {
      case Kind::constant:
      case Kind::variable:
        ++depth_;
        break;
      case Kind::negate:
      case Kind::call1:
        break;
      default:
        --depth_;
    }
    out_.max_stack_ = std::max(out_.max_stack_, depth_);
    if (depth_ > kMaxStack) throw ExpressionError("expression nests too deeply", pos_);
    out_.program_.push_back(op);
  }

  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        emit({Kind::add});
      } else if (accept('-')) {
        term();
        emit({Kind::sub});
      } else {
        return;
      }
    }
  }

  void term() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        emit({Kind::mul});
      } else if (accept('/')) {
        unary();
        emit({Kind::div});
      } else {
        return;
      }
    }
  }

  void unary() {
    if (accept('-')) {
      unary();
      emit({Kind::negate});
    } else if (accept('+')) {
      unary();
    } else {
      power();
    }
  }

  void power() {
    primary();
    if (accept('^')) {
      unary();
      emit({Kind::pow});
    }
  }

  void primary() {
    skip();
    if (pos_ >= text_.size()) throw ExpressionError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      expr();
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      identifier();
      return;
    }
    throw ExpressionError(std::string("unexpected character '") + c + "'", pos_);
  }

  void number() {
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double value = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) throw ExpressionError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    emit({Kind::constant, value});
  }

  void identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));

    if (accept('(')) {
      for (const auto& u : kUnary) {
        if (name == u.name) {
          expr();
          expect(')');
          Expression::Op op{Kind::call1};
          op.fn1 = u.fn;
          emit(op);
          return;
        }
      }
      for (const auto& b : kBinary) {
        if (name == b.name) {
          expr();
          expect(',');
          expr();
          expect(')');
          Expression::Op op{Kind::call2};
          op.fn2 = b.fn;
          emit(op);
          return;
        }
      }
      throw ExpressionError("unknown function '" + name + "'", start);
    }

    const auto& vars = out_.variables_;
    if (auto it = std::find(vars.begin(), vars.end(), name); it != vars.end()) {
      Expression::Op op{Kind::variable};
      op.index = static_cast<std::size_t>(it - vars.begin());
      emit(op);
      return;
    }
    if (name == "pi") {
      emit({Kind::constant, std::numbers::pi});
      return;
    }
    if (name == "e") {
      emit({Kind::constant, std::numbers::e});
      return;
    }
    throw ExpressionError("unknown identifier '" + name + "'", start);
  }

  std::string_view text_;
  Expression& out_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
};

Expression Expression::parse(std::string_view text, std::vector<std::string> variables) {
  Expression out;
  out.text_ = std::string(text);
  out.variables_ = std::move(variables);
  ExpressionParser(out.text_, out).run();
  return out;
}

double Expression::evaluate(std::span<const double> values) const {
  if (values.size() != variables_.size()) {
    throw std::invalid_argument("Expression::evaluate: expected one value per variable");
  }
  std::array<double, kMaxStack> stack;
  std::size_t top = 0;
  for (const Op& op : program_) {
    switch (op.kind) {
      case Op::Kind::constant:
        stack[top++] = op.value;
        break;
      case Op::Kind::variable:
        stack[top++] = values[op.index];
        break;
      case Op::Kind::negate:
        stack[top - 1] = -stack[top - 1];
        break;
      case Op::Kind::call1:
        stack[top - 1] = op.fn1(stack[top - 1]);
        break;
      default: {
        const double rhs = stack[--top];
        double& lhs = stack[top - 1];
        switch (op.kind) {
          case Op::Kind::add:
            lhs += rhs;
            break;
          case Op::Kind::sub:
            lhs -= rhs;
            break;
          case Op::Kind::mul:
            lhs *= rhs;
            break;
          case Op::Kind::div:
            lhs /= rhs;
            break;
          case Op::Kind::pow:
            lhs = std::pow(lhs, rhs);
            break;
          case Op::Kind::call2:
            lhs = op.fn2(lhs, rhs);
            break;
          default:
            break;
        }
      }
    }
  }
  return stack[0];
}

}  // namespace fracavg
