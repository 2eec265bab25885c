#include "mrirdlmc/joint.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

namespace mrirdlmc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_sampled_frames(const RealSequence& mask) {
  for (std::size_t t = 0; t < mask.nt(); ++t) {
    bool any = false;
    for (double v : mask.frame(t)) any = any || v != 0.0;
    if (!any) throw Error(ErrorKind::EmptyMask, "frame " + std::to_string(t) + " has no samples");
  }
}

}  // namespace

PatchGeometry patch_geometry(std::size_t nx, std::size_t ny, const SolverConfig& cfg) {
  return PatchGeometry(nx, ny, static_cast<std::size_t>(cfg.patch_size),
                       static_cast<std::size_t>(cfg.patch_stride));
}

JointEnergy total_energy_terms(const JointState& s, const ImageSequence& f, const RealSequence& mask,
                               const SolverConfig& cfg) {
  const auto r = recon_energy_terms(s.m, f, mask, s.u, {cfg.lambda1, cfg.lambda2, cfg.lambda3});
  const FlowPrior prior{s.dictionary, s.codes, s.geometry};
  const auto fl = flow_energy_terms(s.u, s.m, &prior, cfg);
  JointEnergy e;
  e.fidelity = r.fidelity;
  e.tv_m = r.tv;
  e.wavelet = r.wavelet;
  e.transport = r.transport;
  e.tv_u = fl.tv;
  e.sparse_fit = fl.sparse_fit;
  e.sparse_l1 = fl.sparse_l1;
  return e;
}

double total_energy(const JointState& s, const ImageSequence& f, const RealSequence& mask,
                    const SolverConfig& cfg) {
  return total_energy_terms(s, f, mask, cfg).total();
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::NoIterations: return "no_iterations";
    case StopReason::Converged: return "converged";
    case StopReason::MaxOuter: return "max_outer";
  }
  return "unknown";
}

void write_report_csv(const JointReport& r, std::ostream& out) {
  const auto old = out.precision(17);
  out << "outer_iter,E_total,E_fidelity,E_tv_m,E_wavelet,E_transport,E_tv_u,E_sparse_fit,"
         "E_sparse_l1,seconds\n";
  for (const auto& row : r.outer) {
    const auto& e = row.energy;
    out << row.outer_iter << ',' << e.total() << ',' << e.fidelity << ',' << e.tv_m << ','
        << e.wavelet << ',' << e.transport << ',' << e.tv_u << ',' << e.sparse_fit << ','
        << e.sparse_l1 << ',' << row.seconds << '\n';
  }
  out.precision(old);
}

JointResult joint_reconstruct(const ImageSequence& f, const RealSequence& mask,
                              const SolverConfig& cfg, const FlowDictionary* dictionary,
                              InitMode init) {
  cfg.validate();
  const auto t0 = Clock::now();
  if (f.nt() < 2) throw Error(ErrorKind::ShapeMismatch, "a dynamic sequence needs two frames or more");
  if (f.nx() != mask.nx() || f.ny() != mask.ny() || f.nt() != mask.nt())
    throw Error(ErrorKind::ShapeMismatch, "mask grid differs from the k-space grid");
  require_sampled_frames(mask);

  const std::size_t nx = f.nx(), ny = f.ny(), transitions = f.nt() - 1;
  auto geometry = patch_geometry(nx, ny, cfg);
  if (dictionary && dictionary->patch_length() != geometry.patch_length())
    throw Error(ErrorKind::GeometryMismatch, "dictionary atoms do not match patch_size");
  const std::size_t atoms = dictionary ? dictionary->atoms() : static_cast<std::size_t>(cfg.dict_atoms);
  if (!geometry.overcomplete(atoms))
    throw Error(ErrorKind::GeometryMismatch, "atoms x patches must exceed the pixel count");

  JointReport report;
  const FlowField zero_flow(nx, ny, transitions);

  // Initial image.
  ImageSequence m = zero_filled(f, mask);
  ReconDual recon_dual = ReconDual::zeros(nx, ny, f.nt());
  if (init == InitMode::CompressedSensing) {
    SolverConfig cs = cfg;
    cs.lambda3 = 0.0;
    auto r = reconstruct(f, mask, zero_flow, cs, m);
    m = std::move(r.m);
    recon_dual = std::move(r.dual);
    report.recon_iterations += r.iterations;
  }

  // Initial flow, dictionary and codes.
  auto tv = tvl1_flow(m, cfg, zero_flow);
  report.flow_iterations += tv.iterations;
  FlowField u = std::move(tv.u);
  FlowDictionary dict;
  SparseCodes codes;
  if (dictionary) {
    dict = *dictionary;
    auto sc = sparse_code(u, dict, geometry, cfg,
                          SparseCodes::zeros(dict.atoms(), geometry.count(), transitions));
    codes = std::move(sc.codes);
    report.sparse_iterations += sc.iterations;
  } else {
    auto learnt = learn_dictionary(u, geometry, atoms, static_cast<std::size_t>(cfg.sparsity_eps),
                                   cfg.learn_iters, cfg.dict_seed);
    dict = std::move(learnt.dictionary);
    codes = std::move(learnt.codes);
  }

  JointState s{std::move(m), std::move(u), std::move(dict), std::move(codes), geometry};
  report.outer.push_back({0, total_energy_terms(s, f, mask, cfg), seconds_since(t0)});

  FlowGradient flow_dual;
  const FlowGradient* flow_warm = nullptr;
  for (int n = 1; n <= cfg.max_outer; ++n) {
    // m-step
    auto rec = reconstruct(f, mask, s.u, cfg, s.m, &recon_dual);
    report.recon_iterations += rec.iterations;
    recon_dual = std::move(rec.dual);
    ImageSequence delta = rec.m;
    axpy(-1.0, s.m, delta);
    const double change = std::sqrt(squared_norm(delta));
    const double scale = std::sqrt(squared_norm(s.m));
    s.m = std::move(rec.m);
    double energy = total_energy(s, f, mask, cfg);
    report.blocks.push_back({n, "m", energy});

    // u-step. The flow data term sees |m| while the joint energy sees the
    // complex m, so a step is only accepted when the joint energy does not rise.
    {
      const FlowPrior prior{s.dictionary, s.codes, s.geometry};
      auto fl = solve_flow(s.m, &prior, cfg, s.u, flow_warm);
      report.flow_iterations += fl.iterations;
      FlowField previous = std::move(s.u);
      s.u = std::move(fl.u);
      const double e = total_energy(s, f, mask, cfg);
      if (e > energy) {
        s.u = std::move(previous);
        ++report.flow_steps_rejected;
      } else {
        energy = e;
        flow_dual = std::move(fl.dual);
        flow_warm = &flow_dual;
      }
      report.blocks.push_back({n, "u", energy});
    }

    // a-step
    auto sc = sparse_code(s.u, s.dictionary, s.geometry, cfg, s.codes);
    report.sparse_iterations += sc.iterations;
    s.codes = std::move(sc.codes);
    report.blocks.push_back({n, "a", total_energy(s, f, mask, cfg)});

    report.outer_iterations = n;
    report.relative_change = scale > 0.0 ? change / scale : change;
    report.outer.push_back({n, total_energy_terms(s, f, mask, cfg), seconds_since(t0)});
    if (change < cfg.eps_outer * scale || change == 0.0) {
      report.stop = StopReason::Converged;
      break;
    }
    report.stop = StopReason::MaxOuter;
  }
  report.seconds = seconds_since(t0);
  return {std::move(s), std::move(report)};
}

}  // namespace mrirdlmc
