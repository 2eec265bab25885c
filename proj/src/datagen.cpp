#include "mrirdlmc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mrirdlmc/config.hpp"
#include "mrirdlmc/operators.hpp"
#include "mrirdlmc/random.hpp"

namespace mrirdlmc {

// ---- masks ---------------------------------------------------------------

std::size_t line_budget(std::size_t ny, double accel) {
  if (!(accel >= 1.0)) throw Error(ErrorKind::ConstraintViolation, "acceleration must be >= 1");
  // Guard against ny / accel landing a rounding error above an integer.
  const double q = static_cast<double>(ny) / accel;
  const double r = std::round(q);
  const auto budget = static_cast<std::size_t>(std::abs(q - r) < 1e-9 ? r : std::ceil(q));
  return std::clamp<std::size_t>(budget, 1, ny);
}

std::vector<std::size_t> sample_lines(std::size_t ny, double accel, std::size_t center_lines,
                                      std::uint64_t seed, std::uint64_t stream,
                                      double density_power) {
  if (ny == 0) throw Error(ErrorKind::ConstraintViolation, "ny must be positive");
  if (!(density_power >= 0.0)) throw Error(ErrorKind::ConstraintViolation, "density power must be >= 0");
  const std::size_t budget = line_budget(ny, accel);
  if (center_lines > budget)
    throw Error(ErrorKind::InfeasibleBudget, std::to_string(center_lines) +
                                                 " central lines exceed the budget of " +
                                                 std::to_string(budget));
  std::vector<bool> taken(ny, false);
  // Signed frequency k in [-ny/2, ny/2) maps to index k mod ny.
  const auto signed_k = [ny](std::size_t j) {
    return j < (ny + 1) / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(ny);
  };
  const std::size_t central = std::max<std::size_t>(center_lines, 1);
  const auto half = static_cast<long long>(central / 2);
  for (long long k = -half; k < static_cast<long long>(central) - half; ++k) {
    const auto j = static_cast<std::size_t>(((k % static_cast<long long>(ny)) + static_cast<long long>(ny)) %
                                            static_cast<long long>(ny));
    taken[j] = true;
  }

  std::vector<double> weight(ny, 0.0);
  const double half_ny = static_cast<double>(ny) / 2.0;
  for (std::size_t j = 0; j < ny; ++j) {
    const double r = std::min(1.0, std::abs(signed_k(j)) / half_ny);
    weight[j] = taken[j] ? 0.0 : std::pow(1.0 - r, density_power);
  }

  Rng rng(seed, stream);
  std::size_t count = static_cast<std::size_t>(std::count(taken.begin(), taken.end(), true));
  while (count < budget) {
    double total = 0.0;
    for (double w : weight) total += w;
    std::size_t pick = ny;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t j = 0; j < ny; ++j) {
        if (weight[j] <= 0.0) continue;
        pick = j;
        if (target < weight[j]) break;
        target -= weight[j];
      }
    } else {
      // Only zero-weight lines remain (the outermost frequency); take the
      // lowest untaken |k| deterministically.
      for (std::size_t j = 0; j < ny; ++j)
        if (!taken[j] && (pick == ny || std::abs(signed_k(j)) < std::abs(signed_k(pick)))) pick = j;
    }
    taken[pick] = true;
    weight[pick] = 0.0;
    ++count;
  }

  std::vector<std::size_t> lines;
  for (std::size_t j = 0; j < ny; ++j)
    if (taken[j]) lines.push_back(j);
  return lines;
}

RealSequence make_mask(const MaskOptions& opt) {
  if (opt.nx == 0 || opt.ny == 0 || opt.frames == 0)
    throw Error(ErrorKind::ConstraintViolation, "mask extents must be positive");
  RealSequence mask(opt.nx, opt.ny, opt.frames);
  for (std::size_t t = 0; t < opt.frames; ++t) {
    const auto lines = sample_lines(opt.ny, opt.accel, opt.center_lines, opt.seed,
                                    opt.shared ? 0 : t, opt.density_power);
    for (std::size_t j : lines)
      for (std::size_t i = 0; i < opt.nx; ++i) mask(i, j, t) = 1.0;
  }
  return mask;
}

double achieved_acceleration(const RealSequence& mask, std::size_t frame) {
  std::size_t lines = 0;
  for (std::size_t j = 0; j < mask.ny(); ++j) {
    bool any = false;
    for (std::size_t i = 0; i < mask.nx(); ++i) any = any || mask(i, j, frame) != 0.0;
    lines += any ? 1 : 0;
  }
  if (lines == 0) throw Error(ErrorKind::EmptyMask, "mask frame has no samples");
  return static_cast<double>(mask.ny()) / static_cast<double>(lines);
}

// ---- phantom spec --------------------------------------------------------

PhantomSpec phantom_from_text(const std::string& text) {
  PhantomSpec spec;
  const auto kv = parse_key_values(text);
  auto count = [](const std::string& k, const std::string& v) {
    const auto n = parse_integer(k, v);
    if (n < 0) throw Error(ErrorKind::ConstraintViolation, k + " must be nonnegative");
    return static_cast<std::size_t>(n);
  };
  auto flag = [](const std::string& k, const std::string& v) {
    const auto n = parse_integer(k, v);
    if (n != 0 && n != 1) throw Error(ErrorKind::ConstraintViolation, k + " must be 0 or 1");
    return n == 1;
  };
  for (const auto& [key, value] : kv) {
    if (key == "nx") spec.nx = count(key, value);
    else if (key == "ny") spec.ny = count(key, value);
    else if (key == "nt") spec.nt = count(key, value);
    else if (key == "noise_std") spec.noise_std = parse_real(key, value);
    else if (key == "seed") spec.seed = count(key, value);
    else if (key == "hard_edges") spec.hard_edges = flag(key, value);
    else if (key == "accel") spec.accel = parse_real(key, value);
    else if (key == "center_lines") spec.center_lines = count(key, value);
    else if (key == "shared_mask") spec.shared_mask = flag(key, value);
    else if (key.rfind("shape", 0) == 0) {
      const auto dot = key.find('.');
      if (dot == std::string::npos || dot == 5) throw Error(ErrorKind::UnknownKey, key);
      const auto index = count(key, key.substr(5, dot - 5));
      if (index == 0 || index > 1024) throw Error(ErrorKind::UnknownKey, key);
      if (spec.shapes.size() < index) spec.shapes.resize(index);
      auto& s = spec.shapes[index - 1];
      const auto field = key.substr(dot + 1);
      const double v = parse_real(key, value);
      if (field == "cx") s.cx = v;
      else if (field == "cy") s.cy = v;
      else if (field == "ax") s.ax = v;
      else if (field == "ay") s.ay = v;
      else if (field == "intensity") s.intensity = v;
      else if (field == "vx") s.vx = v;
      else if (field == "vy") s.vy = v;
      else if (field == "amp") s.amp = v;
      else if (field == "period") s.period = v;
      else throw Error(ErrorKind::UnknownKey, key);
    } else {
      throw Error(ErrorKind::UnknownKey, key);
    }
  }
  validate(spec);
  return spec;
}

PhantomSpec read_phantom_spec(const std::filesystem::path& path) {
  const auto kv = read_key_values(path);  // reports IoFailure for a missing file
  std::string text;
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  return phantom_from_text(text);
}

double pulsation_scale(const EllipseSpec& s, double t) {
  if (s.amp == 0.0) return 1.0;
  // fmod keeps whole periods exact.
  return 1.0 + s.amp * std::sin(2.0 * std::numbers::pi * std::fmod(t, s.period) / s.period);
}

void validate(const PhantomSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::SpecViolation, what); };
  if (spec.nx < 2 || spec.ny < 2) fail("grid must be at least 2 x 2");
  if (spec.nt < 1) fail("at least one frame is required");
  if (!(spec.noise_std >= 0.0)) fail("noise_std must be nonnegative");
  if (!(spec.accel >= 1.0)) fail("accel must be >= 1");
  for (std::size_t k = 0; k < spec.shapes.size(); ++k) {
    const auto& s = spec.shapes[k];
    const auto name = "shape" + std::to_string(k + 1);
    if (!(s.intensity >= 0.0 && s.intensity <= 1.0)) fail(name + " intensity outside [0, 1]");
    if (!(s.ax > 0.0 && s.ay > 0.0)) fail(name + " axes must be positive");
    if (!(s.amp >= 0.0 && s.amp < 1.0)) fail(name + " amp must lie in [0, 1)");
    if (s.amp > 0.0 && !(s.period > 0.0)) fail(name + " pulsation needs a positive period");
    for (std::size_t t = 0; t < spec.nt; ++t) {
      const double td = static_cast<double>(t);
      const double sc = pulsation_scale(s, td);
      // The smooth edge reaches half a pixel beyond the nominal boundary.
      const double cx = s.cx + s.vx * td, cy = s.cy + s.vy * td;
      const double rx = s.ax * sc + 0.5, ry = s.ay * sc + 0.5;
      if (cx - rx < 0.0 || cx + rx > static_cast<double>(spec.nx - 1) || cy - ry < 0.0 ||
          cy + ry > static_cast<double>(spec.ny - 1))
        fail(name + " leaves the grid at frame " + std::to_string(t));
    }
  }
}

// ---- rasterization -------------------------------------------------------

namespace {

struct Placed {
  double cx, cy, ax, ay;
};

Placed place(const EllipseSpec& s, double t) {
  const double sc = pulsation_scale(s, t);
  return {s.cx + s.vx * t, s.cy + s.vy * t, s.ax * sc, s.ay * sc};
}

// Fraction of the shape at pixel (x, y): a raised cosine across one pixel
// of the first-order signed distance to the boundary.
double coverage_weight(const Placed& p, double x, double y, bool hard) {
  const double dx = x - p.cx, dy = y - p.cy;
  const double r2 = dx * dx / (p.ax * p.ax) + dy * dy / (p.ay * p.ay);
  if (hard) return r2 <= 1.0 ? 1.0 : 0.0;
  const double r = std::sqrt(r2);
  if (r == 0.0) return 1.0;
  const double grad = std::sqrt(dx * dx / std::pow(p.ax, 4) + dy * dy / std::pow(p.ay, 4)) / r;
  const double d = (r - 1.0) / grad;
  if (d <= -0.5) return 1.0;
  if (d >= 0.5) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (d + 0.5)));
}

}  // namespace

Phantom make_phantom(const PhantomSpec& spec) {
  validate(spec);
  Phantom ph{ImageSequence(spec.nx, spec.ny, spec.nt),
             FlowField(spec.nx, spec.ny, spec.nt > 0 ? spec.nt - 1 : 0)};
  for (std::size_t t = 0; t < spec.nt; ++t) {
    const double td = static_cast<double>(t);
    for (const auto& s : spec.shapes) {
      const auto p = place(s, td);
      const bool moving = t + 1 < spec.nt;
      Placed next{};
      double ratio = 1.0;
      if (moving) {
        next = place(s, td + 1.0);
        ratio = pulsation_scale(s, td + 1.0) / pulsation_scale(s, td);
      }
      for (std::size_t i = 0; i < spec.nx; ++i)
        for (std::size_t j = 0; j < spec.ny; ++j) {
          const double x = static_cast<double>(i), y = static_cast<double>(j);
          const double w = coverage_weight(p, x, y, spec.hard_edges);
          if (w == 0.0) continue;
          ph.m(i, j, t) += s.intensity * w;
          // Later shapes own the motion of pixels they cover.
          if (moving && w >= 0.5) {
            ph.u.ux(i, j, t) = (next.cx - p.cx) + (x - p.cx) * (ratio - 1.0);
            ph.u.uy(i, j, t) = (next.cy - p.cy) + (y - p.cy) * (ratio - 1.0);
          }
        }
    }
  }
  return ph;
}

// ---- acquisition ---------------------------------------------------------

ImageSequence acquire(const ImageSequence& m, const RealSequence& mask, double noise_std,
                      std::uint64_t seed) {
  if (!(noise_std >= 0.0)) throw Error(ErrorKind::ConstraintViolation, "noise_std must be >= 0");
  auto f = fourier_undersampled(m, mask);
  if (noise_std == 0.0) return f;
  for (std::size_t t = 0; t < f.nt(); ++t) {
    Rng rng(seed, t);
    auto frame = f.frame(t);
    const auto mk = mask.frame(t);
    for (std::size_t k = 0; k < frame.size(); ++k) {
      if (mk[k] == 0.0) continue;
      const double re = rng.normal(), im = rng.normal();
      frame[k] += cplx(noise_std * re, noise_std * im);
    }
  }
  return f;
}

}  // namespace mrirdlmc
