#pragma once

#include <memory>
#include <string>
#include <vector>

namespace conic_lmcf {

/// Scalar expression in x1, x2, x3 (also x, y, z) built from numbers, pi,
/// + - * / ^, parentheses, sin and cos. Parse errors throw InvalidInput.
class Expression {
 public:
  explicit Expression(const std::string& text);

  double operator()(const std::vector<double>& x) const;
  const std::string& text() const { return text_; }
  /// Highest coordinate index referenced (0 for constants).
  int dimension() const { return dimension_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  int dimension_ = 0;
};

}  // namespace conic_lmcf
