#pragma once

// Scalar expressions such as "0.2*sin(2*pi*x)*sin(2*pi*y)" over a fixed set
// of named variables.  Grammar: + - * / ^ (right associative), unary minus,
// parentheses, constants pi and e, and the functions sin cos tan exp log
// sqrt abs tanh.

#include <memory>
#include <string>
#include <vector>

namespace systole {

class Expression {
 public:
  /// Throws Error(Parse) with a column on malformed input or unknown names.
  Expression(const std::string& text, std::vector<std::string> variables);
  ~Expression();
  Expression(const Expression&);
  Expression& operator=(const Expression&);
  Expression(Expression&&) noexcept;
  Expression& operator=(Expression&&) noexcept;

  /// Values in the order the variables were declared.
  double operator()(const std::vector<double>& values) const;
  double operator()(double a, double b) const { return (*this)({a, b}); }

  const std::string& text() const noexcept { return text_; }

  struct Node;

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::shared_ptr<const Node> root_;
};

}  // namespace systole
