#include "mrirdlmc/recon.hpp"

#include <cmath>

#include "mrirdlmc/chambolle_pock.hpp"
#include "mrirdlmc/prox.hpp"

namespace mrirdlmc {

ReconDual ReconDual::zeros(std::size_t nx, std::size_t ny, std::size_t nt) {
  return {ImageSequence(nx, ny, nt),
          {ImageSequence(nx, ny, nt), ImageSequence(nx, ny, nt)},
          ImageSequence(nx, ny, nt),
          ImageSequence(nx, ny, nt)};
}

bool ReconDual::matches(const ImageSequence& m) const {
  return kspace.same_shape(m) && tv.dx.same_shape(m) && tv.dy.same_shape(m) &&
         wavelet.same_shape(m) && transport.same_shape(m);
}

void axpy(double alpha, const ReconDual& x, ReconDual& y) {
  axpy(alpha, x.kspace, y.kspace);
  axpy(alpha, x.tv.dx, y.tv.dx);
  axpy(alpha, x.tv.dy, y.tv.dy);
  axpy(alpha, x.wavelet, y.wavelet);
  axpy(alpha, x.transport, y.transport);
}

double squared_norm(const ReconDual& x) {
  return squared_norm(x.kspace) + squared_norm(x.tv.dx) + squared_norm(x.tv.dy) +
         squared_norm(x.wavelet) + squared_norm(x.transport);
}

bool all_finite(const ReconDual& x) {
  return all_finite(x.kspace) && all_finite(x.tv.dx) && all_finite(x.tv.dy) &&
         all_finite(x.wavelet) && all_finite(x.transport);
}

namespace {

void require_consistent(const ImageSequence& f, const RealSequence& mask, const FlowField& u,
                        const ImageSequence& m) {
  require_same_shape(f, m, "k-space and image grids differ");
  if (f.nx() != mask.nx() || f.ny() != mask.ny() || f.nt() != mask.nt())
    throw Error(ErrorKind::ShapeMismatch, "mask grid differs from the k-space grid");
  if (u.nx() != m.nx() || u.ny() != m.ny() || u.nt() + 1 != m.nt())
    throw Error(ErrorKind::ShapeMismatch, "flow must have one frame less than the image");
}

double l1(const ImageSequence& x) {
  double s = 0.0;
  for (const auto& v : x.data()) s += std::abs(v);
  return s;
}

}  // namespace

ReconEnergy recon_energy_terms(const ImageSequence& m, const ImageSequence& f,
                               const RealSequence& mask, const FlowField& u, const ReconWeights& w) {
  require_consistent(f, mask, u, m);
  ReconEnergy e;
  auto residual = fourier_undersampled(m, mask);
  axpy(-1.0, f, residual);
  e.fidelity = 0.5 * squared_norm(residual);

  const auto g = grad_spatial_central(m);
  double tv = 0.0;
  for (std::size_t n = 0; n < m.size(); ++n) tv += std::sqrt(std::norm(g.dx[n]) + std::norm(g.dy[n]));
  e.tv = w.tv * tv;
  e.wavelet = w.wavelet == 0.0 ? 0.0 : w.wavelet * l1(wavelet_forward(m));
  e.transport = w.transport * l1(transport(m, u));
  return e;
}

double recon_energy(const ImageSequence& m, const ImageSequence& f, const RealSequence& mask,
                    const FlowField& u, const ReconWeights& w) {
  return recon_energy_terms(m, f, mask, u, w).total();
}

ImageSequence zero_filled(const ImageSequence& f, const RealSequence& mask) {
  return fourier_undersampled_adjoint(f, mask);
}

ReconResult reconstruct(const ImageSequence& f, const RealSequence& mask, const FlowField& u,
                        const SolverConfig& cfg, const ImageSequence& m0,
                        const ReconDual* warm_dual) {
  require_consistent(f, mask, u, m0);
  const ReconWeights w{cfg.lambda1, cfg.lambda2, cfg.lambda3};
  const int levels = default_wavelet_levels(m0.nx(), m0.ny());
  if (w.wavelet > 0.0) wavelet_forward(ImageSequence(m0.nx(), m0.ny(), 1), levels);  // extent check

  SaddleProblem<ImageSequence, ReconDual> problem;
  problem.apply = [&](const ImageSequence& m) {
    // Blocks with a zero weight have a dual pinned at zero; skip their work.
    ReconDual y = ReconDual::zeros(m.nx(), m.ny(), m.nt());
    y.kspace = fourier_undersampled(m, mask);
    if (w.tv > 0.0) y.tv = grad_spatial_central(m);
    if (w.wavelet > 0.0) y.wavelet = wavelet_forward(m, levels);
    if (w.transport > 0.0) y.transport = transport(m, u);
    return y;
  };
  problem.apply_adjoint = [&](const ReconDual& y) {
    auto m = fourier_undersampled_adjoint(y.kspace, mask);
    if (w.tv > 0.0) axpy(1.0, grad_spatial_central_adjoint(y.tv), m);
    if (w.wavelet > 0.0) axpy(1.0, wavelet_adjoint(y.wavelet, levels), m);
    if (w.transport > 0.0) axpy(1.0, transport_adjoint(y.transport, u), m);
    return m;
  };
  problem.resolvent_dual = [&](ReconDual& y, double sigma) {
    resolvent_l2_fidelity(y.kspace, f, sigma);
    project_ball(y.tv, w.tv);
    project_ball(y.wavelet, w.wavelet);
    project_ball(y.transport, w.transport);
  };
  problem.norm_bound = operator_norm_bound(u);

  ReconDual y0 = (warm_dual && warm_dual->matches(m0)) ? *warm_dual
                                                       : ReconDual::zeros(m0.nx(), m0.ny(), m0.nt());
  const CpOptions opt{cfg.sigma_recon, cfg.tau_recon, cfg.theta_recon, cfg.eps_inner, cfg.max_inner};
  auto cp = chambolle_pock(problem, m0, std::move(y0), opt);

  ReconResult r;
  r.iterations = cp.iterations;
  r.converged = cp.converged;
  r.step_size_warning = cp.step_size_warning;
  r.dual = std::move(cp.y);
  r.energy_start = recon_energy(m0, f, mask, u, w);
  r.energy_end = recon_energy(cp.x, f, mask, u, w);
  if (r.energy_end > r.energy_start) {
    r.kept_start = true;
    r.m = m0;
    r.energy_end = r.energy_start;
  } else {
    r.m = std::move(cp.x);
  }
  return r;
}

}  // namespace mrirdlmc
