#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "mrirdlmc/error.hpp"

namespace mrirdlmc {

// min_x F(Cx) + G(x) written as the saddle problem <Cx, y> + G(x) - F*(y).
// Primal and Dual must be copyable and provide the free functions
// axpy(alpha, x, y), squared_norm(x) and all_finite(x).
template <typename Primal, typename Dual>
struct SaddleProblem {
  std::function<Dual(const Primal&)> apply;
  std::function<Primal(const Dual&)> apply_adjoint;
  // In-place resolvents (I + sigma dF*)^-1 and (I + tau dG)^-1. An empty
  // primal resolvent means G = 0.
  std::function<void(Dual&, double sigma)> resolvent_dual;
  std::function<void(Primal&, double tau)> resolvent_primal;
  double norm_bound = 1.0;
};

struct CpOptions {
  double sigma = 0.5;
  double tau = 0.5;
  double theta = 1.0;
  double tol = 1e-6;  // stop when |x+ - x| < tol |x|
  int max_iter = 1000;
};

template <typename Primal, typename Dual>
struct CpResult {
  Primal x;
  Dual y;
  int iterations = 0;
  bool converged = false;
  // sigma * tau * |C|^2 > 1 for the supplied bound.
  bool step_size_warning = false;
  std::vector<double> relative_change;
};

// First-order primal-dual iteration. The dual state is passed in so callers
// can warm-start across repeated solves; x-bar starts at x0.
template <typename Primal, typename Dual>
CpResult<Primal, Dual> chambolle_pock(const SaddleProblem<Primal, Dual>& p, Primal x0, Dual y0,
                                      const CpOptions& opt) {
  if (opt.theta < 0.0 || opt.theta > 1.0)
    throw Error(ErrorKind::ConstraintViolation, "theta must lie in [0, 1]");
  CpResult<Primal, Dual> r;
  r.x = std::move(x0);
  r.y = std::move(y0);
  r.step_size_warning = opt.sigma * opt.tau * p.norm_bound * p.norm_bound > 1.0;
  // An infinite tolerance accepts the starting point as converged.
  if (!(opt.tol < std::numeric_limits<double>::infinity())) {
    r.converged = true;
    return r;
  }

  Primal xbar = r.x;
  for (int n = 0; n < opt.max_iter; ++n) {
    axpy(opt.sigma, p.apply(xbar), r.y);
    p.resolvent_dual(r.y, opt.sigma);

    Primal x_next = r.x;
    axpy(-opt.tau, p.apply_adjoint(r.y), x_next);
    if (p.resolvent_primal) p.resolvent_primal(x_next, opt.tau);
    if (!all_finite(x_next) || !all_finite(r.y))
      throw Error(ErrorKind::NonFiniteIterate, "primal-dual iterate " + std::to_string(n + 1));

    Primal delta = x_next;
    axpy(-1.0, r.x, delta);
    const double change = std::sqrt(squared_norm(delta));
    const double scale = std::sqrt(squared_norm(r.x));

    xbar = x_next;
    axpy(opt.theta, delta, xbar);
    r.x = std::move(x_next);
    r.iterations = n + 1;
    r.relative_change.push_back(scale > 0.0 ? change / scale : change);
    if (change < opt.tol * scale || change == 0.0) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace mrirdlmc
