#pragma once

#include <memory>
#include <string>

namespace pmelab {

// Arithmetic expressions over x1,x2,x3 and optionally t, with + - * / ^,
// sin, cos, exp, sqrt, and the constants pi and e. '^' is right-associative
// and binds tighter than unary minus.
class Expr {
  public:
    static Expr parse(const std::string& text, bool allow_time = false);

    double eval(double x1, double x2, double x3, double t = 0.0) const;
    bool uses_time() const;
    const std::string& text() const { return text_; }

    struct Node;
    Expr() = default;

  private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace pmelab
