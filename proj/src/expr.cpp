#include "chartnet/expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

#include "chartnet/errors.hpp"
#include "chartnet/numfmt.hpp"

namespace chartnet {

struct Expression::Node {
  enum class Kind { Number, Coord, Add, Sub, Mul, Div, Pow, Neg, Func } kind;
  double number = 0.0;
  int coord = 0;
  std::string func;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr parse() {
    NodePtr e = expression();
    skip_ws();
    if (pos_ != text_.size())
      throw PreconditionError("unexpected trailing input in expression at position " +
                              std::to_string(pos_));
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+')) {
        lhs = make({Node::Kind::Add, 0, 0, "", lhs, term()});
      } else if (eat('-')) {
        lhs = make({Node::Kind::Sub, 0, 0, "", lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (eat('*')) {
        lhs = make({Node::Kind::Mul, 0, 0, "", lhs, factor()});
      } else if (eat('/')) {
        lhs = make({Node::Kind::Div, 0, 0, "", lhs, factor()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    NodePtr base = unary();
    if (eat('^')) return make({Node::Kind::Pow, 0, 0, "", base, unary()});
    return base;
  }

  NodePtr unary() {
    if (eat('-')) return make({Node::Kind::Neg, 0, 0, "", unary(), nullptr});
    return primary();
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw PreconditionError("unexpected end of expression");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      NodePtr e = expression();
      if (!eat(')')) throw PreconditionError("missing ')' in expression");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    throw PreconditionError(std::string("unexpected character '") + c + "' in expression");
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    double v;
    try {
      v = parse_double(text_.substr(start, pos_ - start));
    } catch (const IoError& e) {
      throw PreconditionError(e.what());
    }
    return make({Node::Kind::Number, v, 0, "", nullptr, nullptr});
  }

  NodePtr name() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string word = text_.substr(start, pos_ - start);
    if (word.size() >= 2 && word[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < word.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(word[i]));
      if (digits) {
        const int idx = static_cast<int>(parse_int(word.substr(1)));
        if (idx < 1) throw PreconditionError("coordinates are 1-based: " + word);
        return make({Node::Kind::Coord, 0, idx, "", nullptr, nullptr});
      }
    }
    if (word == "sin" || word == "cos" || word == "exp" || word == "sqrt" || word == "abs") {
      if (!eat('(')) throw PreconditionError("function '" + word + "' needs '('");
      NodePtr arg = expression();
      if (!eat(')')) throw PreconditionError("missing ')' after " + word);
      return make({Node::Kind::Func, 0, 0, word, arg, nullptr});
    }
    throw PreconditionError("unknown name '" + word + "' in expression");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

double eval_node(const Node& n, const Eigen::VectorXd& x) {
  switch (n.kind) {
    case Node::Kind::Number: return n.number;
    case Node::Kind::Coord:
      if (n.coord > x.size()) throw DimensionError("expression coordinate beyond input size");
      return x[n.coord - 1];
    case Node::Kind::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case Node::Kind::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case Node::Kind::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case Node::Kind::Div: return eval_node(*n.a, x) / eval_node(*n.b, x);
    case Node::Kind::Pow: return std::pow(eval_node(*n.a, x), eval_node(*n.b, x));
    case Node::Kind::Neg: return -eval_node(*n.a, x);
    case Node::Kind::Func: {
      const double v = eval_node(*n.a, x);
      if (n.func == "sin") return std::sin(v);
      if (n.func == "cos") return std::cos(v);
      if (n.func == "exp") return std::exp(v);
      if (n.func == "sqrt") return std::sqrt(v);
      return std::abs(v);
    }
  }
  throw PreconditionError("corrupt expression node");
}

int max_coord_node(const Node& n) {
  int m = n.kind == Node::Kind::Coord ? n.coord : 0;
  if (n.a) m = std::max(m, max_coord_node(*n.a));
  if (n.b) m = std::max(m, max_coord_node(*n.b));
  return m;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).parse();
  return e;
}

double Expression::eval(const Eigen::VectorXd& x) const {
  if (!root_) throw PreconditionError("empty expression");
  return eval_node(*root_, x);
}

int Expression::max_coordinate() const { return root_ ? max_coord_node(*root_) : 0; }

}  // namespace chartnet
