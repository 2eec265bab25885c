#include "mrirdlmc/prox.hpp"

#include <algorithm>
#include <cmath>

namespace mrirdlmc {

namespace {

// Factor that maps a vector of norm `norm` into the ball of radius lambda.
double ball_scale(double norm, double lambda) {
  if (lambda <= 0.0) return 0.0;
  return norm > lambda ? lambda / norm : 1.0;
}

}  // namespace

void project_ball(std::span<double> y, double lambda) {
  double s = 0.0;
  for (double v : y) s += v * v;
  const double k = ball_scale(std::sqrt(s), lambda);
  if (k != 1.0)
    for (double& v : y) v *= k;
}

void project_ball(Gradient2<cplx>& y, double lambda) {
  for (std::size_t n = 0; n < y.dx.size(); ++n) {
    const double k = ball_scale(std::sqrt(std::norm(y.dx[n]) + std::norm(y.dy[n])), lambda);
    if (k != 1.0) {
      y.dx[n] *= k;
      y.dy[n] *= k;
    }
  }
}

void project_ball(ImageSequence& y, double lambda) {
  for (auto& v : y.data()) {
    const double k = ball_scale(std::abs(v), lambda);
    if (k != 1.0) v *= k;
  }
}

void project_ball(FlowGradient& y, double lambda) {
  auto pair = [lambda](RealSequence& a, RealSequence& b) {
    for (std::size_t n = 0; n < a.size(); ++n) {
      const double k = ball_scale(std::hypot(a[n], b[n]), lambda);
      if (k != 1.0) {
        a[n] *= k;
        b[n] *= k;
      }
    }
  };
  pair(y.ux_dx, y.ux_dy);
  pair(y.uy_dx, y.uy_dy);
}

cplx resolvent_l2_fidelity(cplx y0, cplx f, double sigma) { return (y0 - sigma * f) / (sigma + 1.0); }

void resolvent_l2_fidelity(ImageSequence& y0, const ImageSequence& f, double sigma) {
  require_same_shape(y0, f, "resolvent_l2_fidelity");
  for (std::size_t n = 0; n < y0.size(); ++n) y0[n] = resolvent_l2_fidelity(y0[n], f[n], sigma);
}

double prox_l1_dual(double y, double lambda) { return std::clamp(y, -lambda, lambda); }

FlowPixel prox_flow_pixel(FlowPixel u, double dt, double gx, double gy, double coverage,
                          FlowPixel coupling, double tau, double lambda3, double lambda5) {
  // A = 1 + 2 tau lambda5 c(x) is diagonal, so A^-1 is a pointwise division.
  const double a = 1.0 + 2.0 * tau * lambda5 * coverage;
  const double wx = (u.ux + 2.0 * tau * lambda5 * coupling.ux) / a;
  const double wy = (u.uy + 2.0 * tau * lambda5 * coupling.uy) / a;
  const double g2 = gx * gx + gy * gy;
  if (g2 == 0.0) return {wx, wy};

  const double rho = dt + gx * wx + gy * wy;
  const double step = tau * lambda3 / a;
  if (rho > step * g2) return {wx - step * gx, wy - step * gy};
  if (rho < -step * g2) return {wx + step * gx, wy + step * gy};
  // rho(v) = 0: project A^-1 u~ onto the brightness-constancy line.
  return {wx - rho * gx / g2, wy - rho * gy / g2};
}

void prox_flow_data(FlowField& u, const FlowDataTerm& term, double tau, double lambda3,
                    double lambda5) {
  require_same_shape(u.ux, term.dt, "prox_flow_data");
  require_same_shape(u.ux, term.gx, "prox_flow_data");
  require_same_shape(u.ux, term.gy, "prox_flow_data");
  require_same_shape(u.ux, term.coverage, "prox_flow_data");
  if (!u.same_shape(term.coupling)) throw Error(ErrorKind::ShapeMismatch, "prox_flow_data coupling");
  for (std::size_t n = 0; n < u.ux.size(); ++n) {
    const auto v = prox_flow_pixel({u.ux[n], u.uy[n]}, term.dt[n], term.gx[n], term.gy[n],
                                   term.coverage[n], {term.coupling.ux[n], term.coupling.uy[n]}, tau,
                                   lambda3, lambda5);
    u.ux[n] = v.ux;
    u.uy[n] = v.uy;
  }
}

}  // namespace mrirdlmc
