#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrirdlmc/dictionary.hpp"
#include "mrirdlmc/flow.hpp"
#include "mrirdlmc/recon.hpp"

namespace mrirdlmc {

enum class InitMode { ZeroFilled, CompressedSensing };

struct JointState {
  ImageSequence m;
  FlowField u;
  FlowDictionary dictionary;
  SparseCodes codes;
  PatchGeometry geometry;
};

struct JointEnergy {
  double fidelity = 0.0;
  double tv_m = 0.0;
  double wavelet = 0.0;
  double transport = 0.0;
  double tv_u = 0.0;
  double sparse_fit = 0.0;
  double sparse_l1 = 0.0;
  double total() const {
    return fidelity + tv_m + wavelet + transport + tv_u + sparse_fit + sparse_l1;
  }
};

// All seven terms of the joint model at the given state.
JointEnergy total_energy_terms(const JointState& s, const ImageSequence& f, const RealSequence& mask,
                               const SolverConfig& cfg);
double total_energy(const JointState& s, const ImageSequence& f, const RealSequence& mask,
                    const SolverConfig& cfg);

enum class StopReason { NoIterations, Converged, MaxOuter };
std::string to_string(StopReason r);

// One row per outer iteration; row 0 is the initialization.
struct OuterRecord {
  int outer_iter = 0;
  JointEnergy energy;
  double seconds = 0.0;  // wall time since the start of the call
};

// Total energy after each block solve ("m", "u" or "a").
struct BlockRecord {
  int outer_iter = 0;
  std::string block;
  double energy = 0.0;
};

struct JointReport {
  std::vector<OuterRecord> outer;
  std::vector<BlockRecord> blocks;
  StopReason stop = StopReason::NoIterations;
  int outer_iterations = 0;
  double relative_change = 0.0;  // |m^{n+1} - m^n| / |m^n| of the last iteration
  int recon_iterations = 0;      // summed over the m-steps
  int flow_iterations = 0;
  int sparse_iterations = 0;
  int flow_steps_rejected = 0;   // u-steps that would have raised the total energy
  double seconds = 0.0;
};

// CSV: outer_iter, E_total, E_fidelity, E_tv_m, E_wavelet, E_transport,
// E_tv_u, E_sparse_fit, E_sparse_l1, seconds.
void write_report_csv(const JointReport& r, std::ostream& out);

struct JointResult {
  JointState state;
  JointReport report;
};

// Alternating minimization over m, u and a. Without a dictionary one is
// learnt from the TV-L1 flow of the initial image.
JointResult joint_reconstruct(const ImageSequence& f, const RealSequence& mask,
                              const SolverConfig& cfg, const FlowDictionary* dictionary = nullptr,
                              InitMode init = InitMode::ZeroFilled);

// Patch geometry from the config, checked against the grid.
PatchGeometry patch_geometry(std::size_t nx, std::size_t ny, const SolverConfig& cfg);

}  // namespace mrirdlmc
