#include "doctest.h"

#include <cmath>

#include "foflux/nelder_mead.hpp"

using namespace foflux;

TEST_SUITE("nelder_mead") {

TEST_CASE("minimizes a shifted quadratic bowl") {
  const auto f = [](const Eigen::VectorXd& x) {
    return (x[0] - 1.5) * (x[0] - 1.5) + 3.0 * (x[1] + 0.5) * (x[1] + 0.5);
  };
  const NelderMeadResult r = nelder_mead(f, Eigen::VectorXd::Zero(2));
  CHECK(r.f <= 1e-8);
  CHECK(std::abs(r.x[0] - 1.5) <= 1e-4);
  CHECK(std::abs(r.x[1] + 0.5) <= 1e-4);
}

TEST_CASE("follows the Rosenbrock valley") {
  const auto f = [](const Eigen::VectorXd& x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  NelderMeadOptions opt;
  opt.max_evaluations = 4000;
  const NelderMeadResult r = nelder_mead(f, x0, opt);
  CHECK(std::abs(r.x[0] - 1.0) <= 1e-3);
  CHECK(std::abs(r.x[1] - 1.0) <= 1e-3);
}

TEST_CASE("never returns worse than the start point") {
  const auto f = [](const Eigen::VectorXd& x) { return std::cos(x[0]) + 0.1 * x[0] * x[0]; };
  for (double s : {-4.0, -1.0, 0.0, 2.5, 7.0}) {
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, s);
    const NelderMeadResult r = nelder_mead(f, x0);
    CHECK(r.f <= f(x0) + 1e-15);
  }
}

TEST_CASE("treats non-finite objective values as very bad") {
  const auto f = [](const Eigen::VectorXd& x) {
    if (x[0] < 0.0) return std::nan("");
    return (x[0] - 0.3) * (x[0] - 0.3);
  };
  const NelderMeadResult r = nelder_mead(f, Eigen::VectorXd::Constant(1, 1.0));
  CHECK(std::isfinite(r.f));
  CHECK(std::abs(r.x[0] - 0.3) <= 1e-4);
}

TEST_CASE("is deterministic") {
  const auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 2.0);
  const NelderMeadResult a = nelder_mead(f, x0);
  const NelderMeadResult b = nelder_mead(f, x0);
  CHECK(a.f == b.f);
  CHECK(a.x == b.x);
  CHECK(a.evaluations == b.evaluations);
}

}  // TEST_SUITE
