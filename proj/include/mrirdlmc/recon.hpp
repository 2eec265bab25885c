#pragma once

#include "mrirdlmc/config.hpp"
#include "mrirdlmc/operators.hpp"

namespace mrirdlmc {

struct ReconWeights {
  double tv = 0.0;         // lambda1
  double wavelet = 0.0;    // lambda2
  double transport = 0.0;  // lambda3
};

// Dual variables of the stacked operator [K; grad; Psi; d/dt + u.grad].
struct ReconDual {
  ImageSequence kspace;
  Gradient2<cplx> tv;
  ImageSequence wavelet;
  ImageSequence transport;

  static ReconDual zeros(std::size_t nx, std::size_t ny, std::size_t nt);
  bool matches(const ImageSequence& m) const;
};

void axpy(double alpha, const ReconDual& x, ReconDual& y);
double squared_norm(const ReconDual& x);
bool all_finite(const ReconDual& x);

struct ReconEnergy {
  double fidelity = 0.0;  // 1/2 |Km - f|^2
  double tv = 0.0;        // lambda1 |grad m|_{2,1}
  double wavelet = 0.0;   // lambda2 |Psi m|_1
  double transport = 0.0; // lambda3 |dm/dt + grad m . u|_1
  double total() const { return fidelity + tv + wavelet + transport; }
};

ReconEnergy recon_energy_terms(const ImageSequence& m, const ImageSequence& f,
                               const RealSequence& mask, const FlowField& u, const ReconWeights& w);
double recon_energy(const ImageSequence& m, const ImageSequence& f, const RealSequence& mask,
                    const FlowField& u, const ReconWeights& w);

struct ReconResult {
  ImageSequence m;
  ReconDual dual;
  int iterations = 0;
  bool converged = false;
  bool step_size_warning = false;
  // The iterate ended above the starting energy, so the start was kept.
  bool kept_start = false;
  double energy_start = 0.0;
  double energy_end = 0.0;
};

// Primal-dual solve of the image subproblem with the flow held fixed. Pass
// the previous dual state to warm-start; nullptr starts from zero.
ReconResult reconstruct(const ImageSequence& f, const RealSequence& mask, const FlowField& u,
                        const SolverConfig& cfg, const ImageSequence& m0,
                        const ReconDual* warm_dual = nullptr);

// Zero-filled reconstruction K* f.
ImageSequence zero_filled(const ImageSequence& f, const RealSequence& mask);

}  // namespace mrirdlmc
