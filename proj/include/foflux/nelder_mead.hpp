#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace foflux {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int max_evaluations = 4000;
  double f_tol = 1e-10;  // relative spread of simplex values
  double x_tol = 1e-8;   // simplex diameter
  double initial_step = 0.5;
};

/// Downhill simplex minimization (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Deterministic given the start point.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0,
                                    const NelderMeadOptions& opt = {}) {
  const int n = static_cast<int>(x0.size());
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : 1e300;
  };

  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(n) + 1, x0);
  std::vector<double> fs(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i) + 1](i) += opt.initial_step;
  for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = eval(xs[i]);

  std::vector<std::size_t> order(xs.size());
  auto sort_simplex = [&] {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> xs2(xs.size());
    std::vector<double> fs2(fs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      xs2[i] = xs[order[i]];
      fs2[i] = fs[order[i]];
    }
    xs.swap(xs2);
    fs.swap(fs2);
  };

  bool converged = false;
  while (evals < opt.max_evaluations) {
    sort_simplex();

    const double f_spread = std::abs(fs.back() - fs.front());
    const double f_scale = std::abs(fs.front()) + std::abs(fs.back()) + 1e-300;
    double x_spread = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i)
      x_spread = std::max(x_spread, (xs[i] - xs[0]).cwiseAbs().maxCoeff());
    if (2.0 * f_spread / f_scale < opt.f_tol || x_spread < opt.x_tol) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) centroid += xs[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - xs.back());
    const double fr = eval(xr);
    if (fr < fs[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs.back());
      const double fe = eval(xe);
      if (fe < fr) {
        xs.back() = xe;
        fs.back() = fe;
      } else {
        xs.back() = xr;
        fs.back() = fr;
      }
    } else if (fr < fs[fs.size() - 2]) {
      xs.back() = xr;
      fs.back() = fr;
    } else {
      const bool outside = fr < fs.back();
      Eigen::VectorXd xc;
      if (outside)
        xc = centroid + 0.5 * (xr - centroid);
      else
        xc = centroid - 0.5 * (centroid - xs.back());
      const double fc = eval(xc);
      if (fc < (outside ? fr : fs.back())) {
        xs.back() = xc;
        fs.back() = fc;
      } else {
        for (std::size_t i = 1; i < xs.size(); ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = eval(xs[i]);
        }
      }
    }
  }

  sort_simplex();
  return {xs[0], fs[0], evals, converged};
}

}  // namespace foflux
