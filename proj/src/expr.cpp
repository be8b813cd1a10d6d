#include "mixsde/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "mixsde/errors.hpp"

namespace mixsde {
namespace {

using Op = Expression::Op;
using Instr = Expression::Instr;

struct Function {
  const char* name;
  Op op;
  int arity;
};

constexpr Function kFunctions[] = {
    {"exp", Op::exp, 1},   {"log", Op::log, 1},   {"sqrt", Op::sqrt, 1},
    {"sin", Op::sin, 1},   {"cos", Op::cos, 1},   {"tan", Op::tan, 1},
    {"tanh", Op::tanh, 1}, {"abs", Op::abs, 1},   {"min", Op::min, 2},
    {"max", Op::max, 2},   {"pow", Op::pow, 2},
};

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  std::vector<Instr> run() {
    sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return std::move(code_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError("expression: " + what + " at column " + std::to_string(pos_ + 1) +
                      " in \"" + s_ + "\"");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void emit(Op op, double value = 0.0) { code_.push_back({op, value}); }

  void sum() {
    product();
    for (;;) {
      if (accept('+')) {
        product();
        emit(Op::add);
      } else if (accept('-')) {
        product();
        emit(Op::sub);
      } else {
        return;
      }
    }
  }

  void product() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        emit(Op::mul);
      } else if (accept('/')) {
        unary();
        emit(Op::div);
      } else {
        return;
      }
    }
  }

  void unary() {
    if (accept('-')) {
      unary();
      emit(Op::neg);
    } else if (accept('+')) {
      unary();
    } else {
      power();
    }
  }

  void power() {
    atom();
    if (accept('^')) {
      unary();
      emit(Op::pow);
    }
  }

  void atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "t") return emit(Op::var_t);
      if (name == "x") return emit(Op::var_x);
      if (name == "pi") return emit(Op::push, std::numbers::pi);
      const auto* fn = std::find_if(std::begin(kFunctions), std::end(kFunctions),
                                    [&](const Function& f) { return name == f.name; });
      if (fn == std::end(kFunctions)) {
        pos_ = start;
        fail("unknown name '" + name + "'");
      }
      expect('(');
      sum();
      for (int i = 1; i < fn->arity; ++i) {
        expect(',');
        sum();
      }
      expect(')');
      emit(fn->op);
      return;
    }
    if (accept('(')) {
      sum();
      expect(')');
      return;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  void number() {
    double value = 0.0;
    const char* first = s_.data() + pos_;
    const auto [end, ec] = std::from_chars(first, s_.data() + s_.size(), value);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - first);
    emit(Op::push, value);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  std::vector<Instr> code_;
};

int stack_effect(Op op) {
  switch (op) {
    case Op::push:
    case Op::var_t:
    case Op::var_x:
      return 1;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow:
    case Op::min:
    case Op::max:
      return -1;
    default:
      return 0;
  }
}

// min that propagates NaN, so a broken coefficient cannot hide behind min/max.
double nan_min(double a, double b) noexcept {
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
  return b < a ? b : a;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.code_ = Parser(text).run();
  std::ptrdiff_t depth = 0;
  for (const Instr& in : e.code_) {
    depth += stack_effect(in.op);
    e.depth_ = std::max(e.depth_, static_cast<std::size_t>(depth));
  }
  return e;
}

Expression Expression::constant(double c) {
  Expression e;
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, c);
  e.text_ = ec == std::errc() ? std::string(buf, end) : std::to_string(c);
  e.code_ = {{Op::push, c}};
  e.depth_ = 1;
  return e;
}

bool Expression::time_independent() const noexcept {
  return std::none_of(code_.begin(), code_.end(),
                      [](const Instr& in) { return in.op == Op::var_t; });
}

double Expression::operator()(double t, double x) const noexcept {
  // Small programs use a fixed buffer; deeper ones fall back to the heap.
  constexpr std::size_t kInline = 32;
  double inline_stack[kInline] = {};
  std::vector<double> heap;
  double* st = inline_stack;
  if (depth_ > kInline) {
    heap.resize(depth_);
    st = heap.data();
  }
  std::size_t top = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::push: st[top++] = in.value; break;
      case Op::var_t: st[top++] = t; break;
      case Op::var_x: st[top++] = x; break;
      case Op::add: --top; st[top - 1] = st[top - 1] + st[top]; break;
      case Op::sub: --top; st[top - 1] = st[top - 1] - st[top]; break;
      case Op::mul: --top; st[top - 1] = st[top - 1] * st[top]; break;
      case Op::div: --top; st[top - 1] = st[top - 1] / st[top]; break;
      case Op::pow: --top; st[top - 1] = std::pow(st[top - 1], st[top]); break;
      case Op::min: --top; st[top - 1] = nan_min(st[top - 1], st[top]); break;
      case Op::max: --top; st[top - 1] = -nan_min(-st[top - 1], -st[top]); break;
      case Op::neg: st[top - 1] = -st[top - 1]; break;
      case Op::exp: st[top - 1] = std::exp(st[top - 1]); break;
      case Op::log: st[top - 1] = std::log(st[top - 1]); break;
      case Op::sqrt: st[top - 1] = std::sqrt(st[top - 1]); break;
      case Op::sin: st[top - 1] = std::sin(st[top - 1]); break;
      case Op::cos: st[top - 1] = std::cos(st[top - 1]); break;
      case Op::tan: st[top - 1] = std::tan(st[top - 1]); break;
      case Op::tanh: st[top - 1] = std::tanh(st[top - 1]); break;
      case Op::abs: st[top - 1] = std::fabs(st[top - 1]); break;
    }
  }
  return st[0];
}

}  // namespace mixsde
