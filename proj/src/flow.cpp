#include "mrirdlmc/flow.hpp"

#include <cmath>

#include "mrirdlmc/chambolle_pock.hpp"

namespace mrirdlmc {

namespace {

void require_flow_shape(const ImageSequence& m, const FlowField& u) {
  if (m.nt() < 2) throw Error(ErrorKind::ShapeMismatch, "flow needs at least two frames");
  if (u.nx() != m.nx() || u.ny() != m.ny() || u.nt() + 1 != m.nt())
    throw Error(ErrorKind::ShapeMismatch, "flow must have one frame less than the image");
}

void require_prior(const FlowPrior& p, const FlowField& u) {
  const auto& g = p.geometry;
  if (g.nx() != u.nx() || g.ny() != u.ny())
    throw Error(ErrorKind::GeometryMismatch, "patch geometry does not match the flow grid");
  if (p.dictionary.patch_length() != g.patch_length())
    throw Error(ErrorKind::GeometryMismatch, "dictionary atoms do not match the patch size");
  if (p.codes.ax.size() != u.nt() || p.codes.ay.size() != u.nt())
    throw Error(ErrorKind::ShapeMismatch, "codes must cover every transition");
  for (std::size_t t = 0; t < u.nt(); ++t)
    if (static_cast<std::size_t>(p.codes.ax[t].rows()) != p.dictionary.atoms() ||
        static_cast<std::size_t>(p.codes.ax[t].cols()) != g.count() ||
        p.codes.ay[t].rows() != p.codes.ax[t].rows() || p.codes.ay[t].cols() != p.codes.ax[t].cols())
      throw Error(ErrorKind::ShapeMismatch, "codes do not match the dictionary and patches");
}

}  // namespace

FlowDataTerm flow_data_term(const ImageSequence& m, const FlowPrior* prior) {
  if (m.nt() < 2) throw Error(ErrorKind::ShapeMismatch, "flow needs at least two frames");
  const std::size_t nx = m.nx(), ny = m.ny(), transitions = m.nt() - 1;
  const auto mag = magnitude(m);
  const auto g = grad_spatial_central(mag);
  const auto d = dt_forward(mag);

  FlowDataTerm term{RealSequence(nx, ny, transitions), RealSequence(nx, ny, transitions),
                    RealSequence(nx, ny, transitions), RealSequence(nx, ny, transitions),
                    FlowField(nx, ny, transitions)};
  const std::size_t n = term.dt.size();
  for (std::size_t k = 0; k < n; ++k) {
    term.dt[k] = d[k];
    term.gx[k] = g.dx[k];
    term.gy[k] = g.dy[k];
  }
  if (prior) {
    require_prior(*prior, term.coupling);
    term.coverage = coverage_field(prior->geometry, transitions);
    term.coupling = synthesize_flow(prior->dictionary, prior->codes, prior->geometry);
  }
  return term;
}

double flow_tv(const FlowField& u) {
  const auto g = grad_flow_forward(u);
  double s = 0.0;
  for (std::size_t k = 0; k < u.ux.size(); ++k) {
    s += std::hypot(g.ux_dx[k], g.ux_dy[k]);
    s += std::hypot(g.uy_dx[k], g.uy_dy[k]);
  }
  return s;
}

FlowEnergy flow_energy_terms(const FlowField& u, const ImageSequence& m, const FlowPrior* prior,
                             const SolverConfig& cfg) {
  require_flow_shape(m, u);
  const auto term = flow_data_term(m, nullptr);
  FlowEnergy e;
  double data = 0.0;
  for (std::size_t k = 0; k < u.ux.size(); ++k)
    data += std::abs(term.dt[k] + term.gx[k] * u.ux[k] + term.gy[k] * u.uy[k]);
  e.data = cfg.lambda3 * data;
  e.tv = cfg.lambda4 * flow_tv(u);
  if (prior) {
    require_prior(*prior, u);
    const auto patches = extract_patches(u, prior->geometry);
    double fit = 0.0, l1 = 0.0;
    for (std::size_t t = 0; t < u.nt(); ++t) {
      fit += (patches.x[t] - prior->dictionary.dx * prior->codes.ax[t]).squaredNorm();
      fit += (patches.y[t] - prior->dictionary.dy * prior->codes.ay[t]).squaredNorm();
      l1 += prior->codes.ax[t].lpNorm<1>() + prior->codes.ay[t].lpNorm<1>();
    }
    e.sparse_fit = cfg.lambda5 * fit;
    e.sparse_l1 = cfg.lambda6 * l1;
  }
  return e;
}

double flow_energy(const FlowField& u, const ImageSequence& m, const FlowPrior* prior,
                   const SolverConfig& cfg) {
  return flow_energy_terms(u, m, prior, cfg).total();
}

FlowResult solve_flow(const ImageSequence& m, const FlowPrior* prior, const SolverConfig& cfg,
                      const FlowField& u0, const FlowGradient* warm_dual) {
  require_flow_shape(m, u0);
  const auto term = flow_data_term(m, prior);
  const double lambda3 = cfg.lambda3, lambda4 = cfg.lambda4, lambda5 = cfg.lambda5;

  SaddleProblem<FlowField, FlowGradient> problem;
  problem.apply = [](const FlowField& u) { return grad_flow_forward(u); };
  problem.apply_adjoint = [](const FlowGradient& y) {
    auto u = divergence_flow(y);
    for (auto& v : u.ux.data()) v = -v;
    for (auto& v : u.uy.data()) v = -v;
    return u;
  };
  problem.resolvent_dual = [lambda4](FlowGradient& y, double) { project_ball(y, lambda4); };
  problem.resolvent_primal = [&](FlowField& u, double tau) {
    prox_flow_data(u, term, tau, lambda3, lambda5);
  };
  problem.norm_bound = std::sqrt(8.0);

  FlowGradient y0;
  if (warm_dual && warm_dual->ux_dx.same_shape(u0.ux)) {
    y0 = *warm_dual;
  } else {
    const RealSequence z(u0.nx(), u0.ny(), u0.nt());
    y0 = {z, z, z, z};
  }
  const CpOptions opt{cfg.sigma_flow, cfg.tau_flow, 1.0, cfg.eps_inner, cfg.max_inner};
  auto cp = chambolle_pock(problem, u0, std::move(y0), opt);

  // The code l1 term is constant in u and left out of the comparison.
  auto energy = [&](const FlowField& u) {
    const auto e = flow_energy_terms(u, m, nullptr, cfg);
    double fit = 0.0;
    if (prior && lambda5 != 0.0) {
      const auto patches = extract_patches(u, prior->geometry);
      for (std::size_t t = 0; t < u.nt(); ++t) {
        fit += (patches.x[t] - prior->dictionary.dx * prior->codes.ax[t]).squaredNorm();
        fit += (patches.y[t] - prior->dictionary.dy * prior->codes.ay[t]).squaredNorm();
      }
    }
    return e.data + e.tv + lambda5 * fit;
  };

  FlowResult r;
  r.iterations = cp.iterations;
  r.converged = cp.converged;
  r.step_size_warning = cp.step_size_warning;
  r.dual = std::move(cp.y);
  r.energy_start = energy(u0);
  r.energy_end = energy(cp.x);
  if (r.energy_end > r.energy_start) {
    r.kept_start = true;
    r.u = u0;
    r.energy_end = r.energy_start;
  } else {
    r.u = std::move(cp.x);
  }
  return r;
}

FlowResult tvl1_flow(const ImageSequence& m, const SolverConfig& cfg, const FlowField& u0) {
  SolverConfig c = cfg;
  c.lambda5 = 0.0;
  return solve_flow(m, nullptr, c, u0);
}

FlowResult tvl1_flow(const ImageSequence& m, const SolverConfig& cfg) {
  if (m.nt() < 2) throw Error(ErrorKind::ShapeMismatch, "flow needs at least two frames");
  return tvl1_flow(m, cfg, FlowField(m.nx(), m.ny(), m.nt() - 1));
}

}  // namespace mrirdlmc
