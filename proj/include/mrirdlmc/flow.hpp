#pragma once

#include "mrirdlmc/config.hpp"
#include "mrirdlmc/dictionary.hpp"
#include "mrirdlmc/operators.hpp"
#include "mrirdlmc/patches.hpp"
#include "mrirdlmc/prox.hpp"

namespace mrirdlmc {

// Dictionary coupling of the flow subproblem: the patches of u are pulled
// toward D a_p. Without one the solve is plain TV-L1.
struct FlowPrior {
  const FlowDictionary& dictionary;
  const SparseCodes& codes;
  const PatchGeometry& geometry;
};

struct FlowEnergy {
  double data = 0.0;        // lambda3 |d|m|/dt + grad|m| . u|_1
  double tv = 0.0;          // lambda4 TV(u)
  double sparse_fit = 0.0;  // lambda5 sum_p |R_p u - D a_p|^2
  double sparse_l1 = 0.0;   // lambda6 sum_p |a_p|_1
  double total() const { return data + tv + sparse_fit + sparse_l1; }
};

// Brightness data on the nt-1 transitions, computed from |m|.
FlowDataTerm flow_data_term(const ImageSequence& m, const FlowPrior* prior);

// Isotropic TV of each flow component, summed.
double flow_tv(const FlowField& u);

FlowEnergy flow_energy_terms(const FlowField& u, const ImageSequence& m, const FlowPrior* prior,
                             const SolverConfig& cfg);
double flow_energy(const FlowField& u, const ImageSequence& m, const FlowPrior* prior,
                   const SolverConfig& cfg);

struct FlowResult {
  FlowField u;
  FlowGradient dual;
  int iterations = 0;
  bool converged = false;
  bool step_size_warning = false;
  bool kept_start = false;  // the iterate ended above the starting energy
  double energy_start = 0.0;
  double energy_end = 0.0;
};

// Primal-dual solve of the flow subproblem with m, D and a held fixed.
// `warm_dual` continues from a previous dual state when its shape matches.
FlowResult solve_flow(const ImageSequence& m, const FlowPrior* prior, const SolverConfig& cfg,
                      const FlowField& u0, const FlowGradient* warm_dual = nullptr);

// solve_flow with lambda5 = 0 and no dictionary.
FlowResult tvl1_flow(const ImageSequence& m, const SolverConfig& cfg, const FlowField& u0);
FlowResult tvl1_flow(const ImageSequence& m, const SolverConfig& cfg);

}  // namespace mrirdlmc
