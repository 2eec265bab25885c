#include <algorithm>
#include <cmath>

#include "mrirdlmc/operators.hpp"

namespace mrirdlmc {

template <typename T>
Gradient2<T> grad_spatial_central(const Array3<T>& m) {
  const auto nx = m.nx(), ny = m.ny(), nt = m.nt();
  Gradient2<T> g{Array3<T>(nx, ny, nt), Array3<T>(nx, ny, nt)};
  for (std::size_t t = 0; t + 1 < nt; ++t) {
    for (std::size_t i = 1; i + 1 < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) g.dx(i, j, t) = 0.5 * (m(i + 1, j, t) - m(i - 1, j, t));
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 1; j + 1 < ny; ++j) g.dy(i, j, t) = 0.5 * (m(i, j + 1, t) - m(i, j - 1, t));
  }
  return g;
}

// Exact transpose of the stencil above; only entries the forward operator
// writes are read back.
template <typename T>
Array3<T> grad_spatial_central_adjoint(const Gradient2<T>& y) {
  if (!y.dx.same_shape(y.dy)) throw Error(ErrorKind::ShapeMismatch, "gradient channels differ");
  const auto nx = y.dx.nx(), ny = y.dx.ny(), nt = y.dx.nt();
  Array3<T> out(nx, ny, nt);
  for (std::size_t t = 0; t + 1 < nt; ++t) {
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        T acc{};
        if (i >= 2) acc += y.dx(i - 1, j, t);
        if (i + 2 < nx) acc -= y.dx(i + 1, j, t);
        if (j >= 2) acc += y.dy(i, j - 1, t);
        if (j + 2 < ny) acc -= y.dy(i, j + 1, t);
        out(i, j, t) = 0.5 * acc;
      }
  }
  return out;
}

template <typename T>
Array3<T> dt_forward(const Array3<T>& m) {
  Array3<T> out(m.nx(), m.ny(), m.nt());
  const auto fs = m.frame_size();
  for (std::size_t t = 0; t + 1 < m.nt(); ++t)
    for (std::size_t k = 0; k < fs; ++k) out[t * fs + k] = m[(t + 1) * fs + k] - m[t * fs + k];
  return out;
}

template <typename T>
Array3<T> dt_adjoint(const Array3<T>& y) {
  Array3<T> out(y.nx(), y.ny(), y.nt());
  const auto fs = y.frame_size(), nt = y.nt();
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t k = 0; k < fs; ++k) {
      T acc{};
      if (t >= 1) acc += y[(t - 1) * fs + k];
      if (t + 1 < nt) acc -= y[t * fs + k];
      out[t * fs + k] = acc;
    }
  return out;
}

template Gradient2<cplx> grad_spatial_central(const Array3<cplx>&);
template Gradient2<double> grad_spatial_central(const Array3<double>&);
template Array3<cplx> grad_spatial_central_adjoint(const Gradient2<cplx>&);
template Array3<double> grad_spatial_central_adjoint(const Gradient2<double>&);
template Array3<cplx> dt_forward(const Array3<cplx>&);
template Array3<double> dt_forward(const Array3<double>&);
template Array3<cplx> dt_adjoint(const Array3<cplx>&);
template Array3<double> dt_adjoint(const Array3<double>&);

namespace {

void require_flow_matches(const ImageSequence& m, const FlowField& u) {
  if (u.nx() != m.nx() || u.ny() != m.ny() || u.nt() + 1 != m.nt())
    throw Error(ErrorKind::ShapeMismatch, "flow must be nx x ny x (nt-1) for the image sequence");
}

}  // namespace

ImageSequence transport(const ImageSequence& m, const FlowField& u) {
  require_flow_matches(m, u);
  auto out = dt_forward(m);
  const auto g = grad_spatial_central(m);
  const auto n = u.ux.size();  // frames t < nt-1 come first in memory
  for (std::size_t k = 0; k < n; ++k) out[k] += g.dx[k] * u.ux[k] + g.dy[k] * u.uy[k];
  return out;
}

ImageSequence transport_adjoint(const ImageSequence& y, const FlowField& u) {
  require_flow_matches(y, u);
  Gradient2<cplx> w{ImageSequence(y.nx(), y.ny(), y.nt()), ImageSequence(y.nx(), y.ny(), y.nt())};
  const auto n = u.ux.size();
  for (std::size_t k = 0; k < n; ++k) {
    w.dx[k] = y[k] * u.ux[k];
    w.dy[k] = y[k] * u.uy[k];
  }
  auto out = dt_adjoint(y);
  axpy(1.0, grad_spatial_central_adjoint(w), out);
  return out;
}

// ---- flow derivatives ----------------------------------------------------

namespace {

void forward_diff(const RealSequence& u, RealSequence& dx, RealSequence& dy) {
  const auto nx = u.nx(), ny = u.ny();
  dx = RealSequence(nx, ny, u.nt());
  dy = RealSequence(nx, ny, u.nt());
  for (std::size_t t = 0; t < u.nt(); ++t)
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        if (i + 1 < nx) dx(i, j, t) = u(i + 1, j, t) - u(i, j, t);
        if (j + 1 < ny) dy(i, j, t) = u(i, j + 1, t) - u(i, j, t);
      }
}

RealSequence backward_div(const RealSequence& px, const RealSequence& py) {
  const auto nx = px.nx(), ny = px.ny();
  RealSequence out(nx, ny, px.nt());
  for (std::size_t t = 0; t < px.nt(); ++t)
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        double v = 0.0;
        if (i + 1 < nx) v += px(i, j, t);
        if (i >= 1) v -= px(i - 1, j, t);
        if (j + 1 < ny) v += py(i, j, t);
        if (j >= 1) v -= py(i, j - 1, t);
        out(i, j, t) = v;
      }
  return out;
}

}  // namespace

FlowGradient grad_flow_forward(const FlowField& u) {
  FlowGradient g;
  forward_diff(u.ux, g.ux_dx, g.ux_dy);
  forward_diff(u.uy, g.uy_dx, g.uy_dy);
  return g;
}

FlowField divergence_flow(const FlowGradient& y) {
  const auto& ref = y.ux_dx;
  for (const auto* c : {&y.ux_dy, &y.uy_dx, &y.uy_dy})
    if (!c->same_shape(ref)) throw Error(ErrorKind::ShapeMismatch, "flow gradient channels differ");
  FlowField out;
  out.ux = backward_div(y.ux_dx, y.ux_dy);
  out.uy = backward_div(y.uy_dx, y.uy_dy);
  return out;
}

void axpy(double alpha, const FlowGradient& x, FlowGradient& y) {
  axpy(alpha, x.ux_dx, y.ux_dx);
  axpy(alpha, x.ux_dy, y.ux_dy);
  axpy(alpha, x.uy_dx, y.uy_dx);
  axpy(alpha, x.uy_dy, y.uy_dy);
}

double squared_norm(const FlowGradient& x) {
  return squared_norm(x.ux_dx) + squared_norm(x.ux_dy) + squared_norm(x.uy_dx) +
         squared_norm(x.uy_dy);
}

bool all_finite(const FlowGradient& x) {
  return all_finite(x.ux_dx) && all_finite(x.ux_dy) && all_finite(x.uy_dx) && all_finite(x.uy_dy);
}

double inner(const FlowGradient& x, const FlowGradient& y) {
  return inner(x.ux_dx, y.ux_dx) + inner(x.ux_dy, y.ux_dy) + inner(x.uy_dx, y.uy_dx) +
         inner(x.uy_dy, y.uy_dy);
}

double max_flow_modulus(const FlowField& u) {
  double best = 0.0;
  for (std::size_t k = 0; k < u.ux.size(); ++k) best = std::max(best, std::hypot(u.ux[k], u.uy[k]));
  return best;
}

double operator_norm_bound(const FlowField& u) {
  return 2.0 + std::sqrt(8.0) + std::sqrt(2.0) * (1.0 + max_flow_modulus(u));
}

}  // namespace mrirdlmc
