#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>

namespace chartnet {

// Minimal arithmetic expressions over coordinates x1..xD: numbers, + - * /,
// unary minus, '^' with integer exponents, parentheses, and the functions
// sin, cos, exp, sqrt, abs. This is the only user-facing parsing surface.
class Expression {
 public:
  static Expression parse(const std::string& text);
  double eval(const Eigen::VectorXd& x) const;
  int max_coordinate() const;  // highest coordinate index referenced (1-based)

  struct Node;
  Expression() = default;

 private:
  std::shared_ptr<const Node> root_;
};

}  // namespace chartnet
