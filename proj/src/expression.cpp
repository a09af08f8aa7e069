#include "conic_lmcf/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "conic_lmcf/errors.hpp"

namespace conic_lmcf {

struct Expression::Node {
  enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos } kind;
  double value = 0.0;
  int variable = 0;
  std::shared_ptr<const Node> a, b;

  double eval(const std::vector<double>& x) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::Variable: return x[variable];
      case Kind::Neg: return -a->eval(x);
      case Kind::Add: return a->eval(x) + b->eval(x);
      case Kind::Sub: return a->eval(x) - b->eval(x);
      case Kind::Mul: return a->eval(x) * b->eval(x);
      case Kind::Div: return a->eval(x) / b->eval(x);
      case Kind::Pow: return std::pow(a->eval(x), b->eval(x));
      case Kind::Sin: return std::sin(a->eval(x));
      case Kind::Cos: return std::cos(a->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := '-' unary | '+' unary | power
// power  := atom ('^' unary)?
// atom   := number | name | name '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return e;
  }
  int dimension() const { return dimension_; }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "expression '" << s_ << "': " << what << " at position " << pos_;
    throw InvalidInput(msg.str());
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (eat('+'))
        e = make(Kind::Add, e, term());
      else if (eat('-'))
        e = make(Kind::Sub, e, term());
      else
        return e;
    }
  }
  NodePtr term() {
    NodePtr e = unary();
    for (;;) {
      if (eat('*'))
        e = make(Kind::Mul, e, unary());
      else if (eat('/'))
        e = make(Kind::Div, e, unary());
      else
        return e;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(Kind::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(Kind::Pow, base, unary());
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      NodePtr e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Number;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "sin" || name == "cos") {
        if (!eat('(')) fail("expected '(' after " + name);
        NodePtr arg = expr();
        if (!eat(')')) fail("missing ')'");
        return make(name == "sin" ? Kind::Sin : Kind::Cos, arg);
      }
      auto n = std::make_shared<Expression::Node>();
      if (name == "pi") {
        n->kind = Kind::Number;
        n->value = std::numbers::pi;
        return n;
      }
      int var = -1;
      if (name == "x1" || name == "x") var = 0;
      if (name == "x2" || name == "y") var = 1;
      if (name == "x3" || name == "z") var = 2;
      if (var < 0) {
        pos_ = start;
        fail("unknown name '" + name + "'");
      }
      dimension_ = std::max(dimension_, var + 1);
      n->kind = Kind::Variable;
      n->variable = var;
      return n;
    }
    fail("unexpected character");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int dimension_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text) {
  Parser p(text_);
  root_ = p.parse();
  dimension_ = p.dimension();
}

double Expression::operator()(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) < dimension_) throw InvalidInput("expression needs more coordinates than given");
  return root_->eval(x);
}

}  // namespace conic_lmcf
