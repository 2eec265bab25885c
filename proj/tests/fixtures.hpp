#pragma once

// Phantoms and settings shared by the unit tests and the acceptance runner.

#include <string>

#include "mrirdlmc/config.hpp"
#include "mrirdlmc/datagen.hpp"

namespace fixtures {

using namespace mrirdlmc;

// Default weights except lambda4 = lambda3 / 10, which keeps the flow term
// active on [0, 1] phantoms. The default flow steps (0.5, 0.25) are rescaled
// for the lambda = 0.001 weights, sigma * tau unchanged. Image steps trade
// sigma for tau: the dual blocks live in balls of radius lambda while the
// image is O(1); sigma * tau stays below 1 / bound^2 for |u| <= 1.
// Desk-sized dictionary.
inline const std::string kDeskConfig =
    "lambda4 = 0.0001\n"
    "sigma_recon = 0.013\n"
    "tau_recon = 1.3\n"
    "sigma_flow = 0.0005\n"
    "tau_flow = 250\n"
    "dict_atoms = 64\n"
    "patch_size = 8\n"
    "patch_stride = 4\n"
    "learn_iters = 50\n";

inline constexpr double kNoiseStd = 0.01;
inline constexpr std::uint64_t kNoiseSeed = 11;

// Static body, a pulsating inner ellipse and a small static ellipse.
inline PhantomSpec pulsating_phantom() {
  PhantomSpec s;
  s.nx = s.ny = 64;
  s.nt = 8;
  s.shapes.push_back({32, 32, 24, 20, 0.3, 0, 0, 0, 0});
  s.shapes.push_back({30, 34, 9, 7, 0.6, 0, 0, 0.1, 8});
  s.shapes.push_back({44, 24, 4, 3, 0.4, 0, 0, 0, 0});
  return s;
}

// Same body with a translating inner ellipse.
inline PhantomSpec translating_phantom() {
  PhantomSpec s;
  s.nx = s.ny = 64;
  s.nt = 8;
  s.shapes.push_back({32, 32, 24, 20, 0.3, 0, 0, 0, 0});
  s.shapes.push_back({26, 30, 7, 6, 0.6, 0.5, 0.25, 0, 0});
  s.shapes.push_back({44, 24, 4, 3, 0.4, 0, 0, 0, 0});
  return s;
}

inline MaskOptions four_fold_mask(const PhantomSpec& s, std::uint64_t seed = 7) {
  MaskOptions m;
  m.nx = s.nx;
  m.ny = s.ny;
  m.frames = s.nt;
  m.accel = 4.0;
  m.center_lines = 4;
  m.seed = seed;
  return m;
}

}  // namespace fixtures
