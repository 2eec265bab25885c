#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mrirdlmc/array3.hpp"

namespace mrirdlmc {

// ---- sampling masks ------------------------------------------------------

struct MaskOptions {
  std::size_t nx = 0;          // readout extent (fully sampled along i)
  std::size_t ny = 0;          // phase-encode lines (indexed by j)
  std::size_t frames = 1;
  double accel = 4.0;
  std::size_t center_lines = 8;
  std::uint64_t seed = 0;
  bool shared = false;         // one mask for every frame
  double density_power = 2.0;  // weight (1 - |k| / (ny/2))^power
};

// ceil(ny / accel)
std::size_t line_budget(std::size_t ny, double accel);

// Selected phase-encode lines for one frame, in FFT-native order (DC at 0).
// The central lines around DC are always taken (DC even when center_lines
// is 0); the rest are drawn without replacement by density weight.
std::vector<std::size_t> sample_lines(std::size_t ny, double accel, std::size_t center_lines,
                                      std::uint64_t seed, std::uint64_t stream,
                                      double density_power = 2.0);

// Cartesian line mask on nx x ny x frames. Per-frame streams (seed, t)
// unless shared.
RealSequence make_mask(const MaskOptions& opt);

// Total lines / sampled lines of one mask frame.
double achieved_acceleration(const RealSequence& mask, std::size_t frame);

// ---- phantoms ------------------------------------------------------------

struct EllipseSpec {
  double cx = 0.0, cy = 0.0;  // center at frame 0, pixels along i and j
  double ax = 1.0, ay = 1.0;  // semi-axes at rest
  double intensity = 1.0;
  double vx = 0.0, vy = 0.0;  // translation, pixels per frame
  double amp = 0.0;           // radial pulsation: scale 1 + amp sin(2 pi t / period)
  double period = 0.0;
};

struct PhantomSpec {
  std::size_t nx = 64, ny = 64, nt = 8;
  std::vector<EllipseSpec> shapes;
  bool hard_edges = false;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  // Acquisition used by the phantom command.
  double accel = 4.0;
  std::size_t center_lines = 0;  // 0 picks a quarter of the line budget
  bool shared_mask = false;
};

// Key=value dialect: nx, ny, nt, noise_std, seed, hard_edges, accel,
// center_lines, shared_mask and shapeK.{cx,cy,ax,ay,intensity,vx,vy,amp,period}
// for K = 1, 2, ...
PhantomSpec phantom_from_text(const std::string& text);
PhantomSpec read_phantom_spec(const std::filesystem::path& path);

// Throws SpecViolation for shapes leaving the grid, intensities outside
// [0, 1] and inconsistent pulsation parameters.
void validate(const PhantomSpec& spec);

struct Phantom {
  ImageSequence m;  // ground-truth images
  FlowField u;      // analytic displacement between consecutive frames
};

Phantom make_phantom(const PhantomSpec& spec);

// Size factor of a shape at frame t.
double pulsation_scale(const EllipseSpec& s, double t);

// ---- acquisition ---------------------------------------------------------

// f = K m + eta with complex Gaussian eta (per-component std noise_std) on
// the sampled locations only. Frame t draws from stream (seed, t).
ImageSequence acquire(const ImageSequence& m, const RealSequence& mask, double noise_std,
                      std::uint64_t seed);

}  // namespace mrirdlmc
