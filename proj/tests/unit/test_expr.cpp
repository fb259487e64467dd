#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "systole/error.hpp"
#include "systole/expr.hpp"

using namespace systole;

namespace {

std::string parse_error(const std::string& text) {
  try {
    Expression e(text, {"x", "y"});
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::Parse);
    return err.what();
  }
  return "";
}

}  // namespace

TEST_CASE("expression evaluation") {
  const double pi = std::numbers::pi;
  const Expression e("0.2*sin(2*pi*x)*sin(2*pi*y)", {"x", "y"});
  CHECK(e(0.25, 0.25) == doctest::Approx(0.2));
  CHECK(e(0.1, 0.7) == doctest::Approx(0.2 * std::sin(0.2 * pi) * std::sin(1.4 * pi)));

  CHECK(Expression("2^3^2", {})({}) == 512.0);
  CHECK(Expression("-2^2", {})({}) == -4.0);
  CHECK(Expression("(1+2)*3-4/8", {})({}) == 8.5);
  CHECK(Expression("e", {})({}) == doctest::Approx(std::numbers::e));
  CHECK(Expression("1.5e-3 + .5", {})({}) == doctest::Approx(0.5015));
  CHECK(Expression("sqrt(abs(-16)) + exp(0) + log(e) + tanh(0) + cos(0) + tan(0)", {})({}) ==
        doctest::Approx(7.0));
  CHECK(Expression("1+0.3*sin(2*pi*(v+u))", {"u", "v"})(0.125, 0.125) == doctest::Approx(1.3));
  CHECK(Expression("  u  ", {"u"})({3.0}) == 3.0);
}

TEST_CASE("expressions are copyable values") {
  Expression a("x*y", {"x", "y"});
  Expression b = a;
  a = Expression("x+y", {"x", "y"});
  CHECK(b(2, 3) == 6.0);
  CHECK(a(2, 3) == 5.0);
  CHECK(b.text() == "x*y");
}

TEST_CASE("expression errors carry a column") {
  CHECK(parse_error("1 + ").find("column 5") != std::string::npos);
  CHECK(parse_error("sin(x").find("column 6") != std::string::npos);
  CHECK(parse_error("2 * z").find("column 5") != std::string::npos);
  CHECK(parse_error("foo(1)").find("column 1") != std::string::npos);
  CHECK(parse_error("1 2").find("column 3") != std::string::npos);
  CHECK_FALSE(parse_error("").empty());
  CHECK_FALSE(parse_error("(x").empty());
  CHECK_FALSE(parse_error("x $ y").empty());

  const Expression e("x", {"x", "y"});
  CHECK_THROWS_AS(e({1.0}), Error);
}
