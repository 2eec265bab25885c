#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mrirdlmc/datagen.hpp"
#include "mrirdlmc/operators.hpp"
#include "support.hpp"

using namespace mrirdlmc;

namespace {

MaskOptions mask_options(std::size_t ny, double accel, std::size_t center, std::uint64_t seed) {
  MaskOptions o;
  o.nx = 16;
  o.ny = ny;
  o.frames = 3;
  o.accel = accel;
  o.center_lines = center;
  o.seed = seed;
  return o;
}

PhantomSpec single_ellipse(double vx, double vy) {
  PhantomSpec s;
  s.nx = s.ny = 32;
  s.nt = 4;
  s.shapes.push_back({10.0, 12.0, 4.0, 3.0, 0.8, vx, vy, 0.0, 0.0});
  return s;
}

}  // namespace

TEST_CASE("line budget and sampled lines") {
  CHECK(line_budget(128, 4.0) == 32);
  CHECK(line_budget(64, 3.0) == 22);
  CHECK(line_budget(10, 1.0) == 10);

  const auto lines = sample_lines(128, 4.0, 8, 3, 0);
  CHECK(lines.size() == 32);
  CHECK(std::is_sorted(lines.begin(), lines.end()));
  // The 8 central lines are k = -4..3 on the wrapped grid.
  for (std::size_t c : {124, 125, 126, 127, 0, 1, 2, 3}) CHECK(std::binary_search(lines.begin(), lines.end(), c));
  const auto all = sample_lines(20, 1.0, 0, 1, 0);
  CHECK(all.size() == 20);
  // DC is always sampled.
  const auto dc = sample_lines(32, 8.0, 0, 5, 0);
  CHECK(std::binary_search(dc.begin(), dc.end(), std::size_t{0}));
  CHECK_THROWS_AS(sample_lines(16, 4.0, 9, 1, 0), Error);
}

TEST_CASE("masks are deterministic and line-structured") {
  const auto a = make_mask(mask_options(64, 4.0, 8, 9));
  const auto b = make_mask(mask_options(64, 4.0, 8, 9));
  CHECK(a == b);
  CHECK(a != make_mask(mask_options(64, 4.0, 8, 10)));
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(std::abs(achieved_acceleration(a, t) - 4.0) < 64.0 / 16.0 - 64.0 / 17.0 + 1e-12);
    for (std::size_t j = 0; j < 64; ++j)
      for (std::size_t i = 1; i < 16; ++i) CHECK(a(i, j, t) == a(0, j, t));
  }
  auto shared = mask_options(64, 4.0, 8, 9);
  shared.shared = true;
  const auto s = make_mask(shared);
  for (std::size_t k = 0; k < s.frame_size(); ++k) CHECK(s[k] == s[2 * s.frame_size() + k]);
  const auto full = make_mask(mask_options(12, 1.0, 2, 1));
  for (double v : full.data()) CHECK(v == 1.0);
}

TEST_CASE("static and translating phantoms") {
  const auto still = make_phantom(single_ellipse(0.0, 0.0));
  for (std::size_t k = 0; k < still.m.frame_size(); ++k) CHECK(still.m[k] == still.m[3 * still.m.frame_size() + k]);
  CHECK(squared_norm(still.u) == 0.0);

  const auto moving = make_phantom(single_ellipse(1.0, 0.0));
  for (std::size_t t = 1; t < 4; ++t)
    for (std::size_t i = 0; i + t < 32; ++i)
      for (std::size_t j = 0; j < 32; ++j) CHECK(std::abs(moving.m(i + t, j, t) - moving.m(i, j, 0)) < 1e-6);
  // Ground-truth flow is (1, 0) on the shape and zero outside.
  CHECK(moving.u.ux(10, 12, 0) == 1.0);
  CHECK(moving.u.uy(10, 12, 0) == 0.0);
  CHECK(moving.u.ux(25, 25, 0) == 0.0);
}

TEST_CASE("pulsation is periodic") {
  PhantomSpec s;
  s.nx = s.ny = 32;
  s.nt = 9;
  s.shapes.push_back({16.0, 16.0, 10.0, 8.0, 0.3, 0.0, 0.0, 0.0, 0.0});
  s.shapes.push_back({16.0, 16.0, 5.0, 4.0, 0.7, 0.0, 0.0, 0.2, 8.0});
  const auto p = make_phantom(s);
  for (std::size_t k = 0; k < p.m.frame_size(); ++k) CHECK(p.m[k] == p.m[8 * p.m.frame_size() + k]);
  CHECK(pulsation_scale(s.shapes[1], 2.0) == doctest::Approx(1.2));
  CHECK(pulsation_scale(s.shapes[1], 8.0) == 1.0);
  // Radial flow points outward while the shape grows.
  CHECK(p.u.ux(19, 16, 0) > 0.0);
  CHECK(p.u.ux(13, 16, 0) < 0.0);
}

TEST_CASE("phantom spec parsing and validation") {
  const auto s = phantom_from_text(
      "nx=24\nny=20\nnt=3\nseed=4\nnoise_std=0.01\n"
      "shape1.cx=12\nshape1.cy=10\nshape1.ax=5\nshape1.ay=4\nshape1.intensity=0.5\nshape1.vx=1\n");
  CHECK(s.nx == 24);
  CHECK(s.ny == 20);
  REQUIRE(s.shapes.size() == 1);
  CHECK(s.shapes[0].vx == 1.0);
  CHECK(s.noise_std == 0.01);

  auto outside = single_ellipse(6.0, 0.0);  // leaves the grid by the last frame
  CHECK(support::kind_of([&] { validate(outside); }) == ErrorKind::SpecViolation);
  auto bright = single_ellipse(0.0, 0.0);
  bright.shapes[0].intensity = 1.5;
  CHECK(support::kind_of([&] { validate(bright); }) == ErrorKind::SpecViolation);
  CHECK(support::kind_of([] { phantom_from_text("shape1.colour=2\n"); }) == ErrorKind::UnknownKey);
}

TEST_CASE("acquisition") {
  const auto p = make_phantom(single_ellipse(1.0, 0.0));
  const RealSequence full(32, 32, 4, 1.0);
  auto back = ifft2_unitary(acquire(p.m, full, 0.0, 1));
  axpy(-1.0, p.m, back);
  CHECK(std::sqrt(squared_norm(back)) < 1e-12);

  auto opt = mask_options(32, 4.0, 4, 2);
  opt.nx = 32;
  opt.frames = 4;
  const auto mask = make_mask(opt);
  const auto f = acquire(p.m, mask, 0.05, 3);
  for (std::size_t k = 0; k < f.size(); ++k)
    if (mask[k] == 0.0) CHECK(f[k] == cplx(0.0));
  CHECK(f == acquire(p.m, mask, 0.05, 3));

  // Empirical noise std per component.
  const ImageSequence zero(64, 64, 13);
  const RealSequence all(64, 64, 13, 1.0);
  const auto eta = acquire(zero, all, 0.2, 17);
  double s2 = 0.0;
  for (const auto& v : eta.data()) s2 += v.real() * v.real() + v.imag() * v.imag();
  const double std_est = std::sqrt(s2 / (2.0 * static_cast<double>(eta.size())));
  CHECK(std::abs(std_est - 0.2) / 0.2 < 0.02);
}
