#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mrirdlmc/operators.hpp"
#include "mrirdlmc/patches.hpp"
#include "support.hpp"

using namespace mrirdlmc;
using support::random_array;
using support::random_flow;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

double grad_inner(const Gradient2<cplx>& a, const Gradient2<cplx>& b) {
  return inner(a.dx, b.dx) + inner(a.dy, b.dy);
}

// Direct O(n^4) orthonormal DFT of one frame.
ImageSequence naive_dft(const ImageSequence& m) {
  ImageSequence k(m.nx(), m.ny(), m.nt());
  const double nx = static_cast<double>(m.nx()), ny = static_cast<double>(m.ny());
  for (std::size_t t = 0; t < m.nt(); ++t)
    for (std::size_t p = 0; p < m.nx(); ++p)
      for (std::size_t q = 0; q < m.ny(); ++q) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < m.nx(); ++i)
          for (std::size_t j = 0; j < m.ny(); ++j) {
            const double phase = -2.0 * std::numbers::pi * (static_cast<double>(p * i) / nx + static_cast<double>(q * j) / ny);
            s += m(i, j, t) * std::polar(1.0, phase);
          }
        k(p, q, t) = s / std::sqrt(nx * ny);
      }
  return k;
}

}  // namespace

TEST_CASE("central spatial gradient") {
  const ImageSequence c(5, 6, 3, cplx(2.0, -1.0));
  const auto gc = grad_spatial_central(c);
  CHECK(squared_norm(gc.dx) == 0.0);
  CHECK(squared_norm(gc.dy) == 0.0);

  ImageSequence ramp(6, 6, 3);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) ramp(i, j, t) = static_cast<double>(i);
  const auto g = grad_spatial_central(ramp);
  for (std::size_t t = 0; t + 1 < 3; ++t)
    for (std::size_t i = 1; i + 1 < 6; ++i)
      for (std::size_t j = 1; j + 1 < 6; ++j) {
        CHECK(g.dx(i, j, t) == cplx(1.0, 0.0));
        CHECK(g.dy(i, j, t) == cplx(0.0, 0.0));
      }
  // Border pixels and the last frame are zero.
  CHECK(g.dx(0, 2, 0) == cplx(0.0));
  CHECK(g.dx(2, 2, 2) == cplx(0.0));
}

TEST_CASE("central gradient adjoint") {
  Rng rng(1);
  for (auto [nx, ny, nt] : {std::tuple{5, 5, 2}, std::tuple{4, 4, 3}, std::tuple{7, 3, 4}}) {
    const auto m = random_array<cplx>(rng, nx, ny, nt);
    const Gradient2<cplx> y{random_array<cplx>(rng, nx, ny, nt), random_array<cplx>(rng, nx, ny, nt)};
    CHECK(rel(grad_inner(grad_spatial_central(m), y), inner(m, grad_spatial_central_adjoint(y))) < 1e-12);
  }
  const Gradient2<cplx> zero{ImageSequence(4, 4, 2), ImageSequence(4, 4, 2)};
  CHECK(squared_norm(grad_spatial_central_adjoint(zero)) == 0.0);
  const Gradient2<cplx> bad{ImageSequence(4, 4, 2), ImageSequence(4, 5, 2)};
  CHECK_THROWS_AS(grad_spatial_central_adjoint(bad), Error);
}

TEST_CASE("temporal forward difference") {
  ImageSequence m(2, 2, 2);
  for (std::size_t k = 0; k < 4; ++k) {
    m[k] = cplx(static_cast<double>(k), 1.0);
    m[4 + k] = cplx(3.0 * static_cast<double>(k), -1.0);
  }
  const auto d = dt_forward(m);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(d[k] == m[4 + k] - m[k]);
    CHECK(d[4 + k] == cplx(0.0));
  }
  CHECK(squared_norm(dt_forward(ImageSequence(3, 3, 4, cplx(1.0, 2.0)))) == 0.0);

  Rng rng(2);
  const auto x = random_array<cplx>(rng, 4, 5, 4), y = random_array<cplx>(rng, 4, 5, 4);
  CHECK(rel(inner(dt_forward(x), y), inner(x, dt_adjoint(y))) < 1e-12);
}

TEST_CASE("transport operator") {
  Rng rng(3);
  const auto m = random_array<cplx>(rng, 6, 5, 3);
  // Zero flow reduces to the temporal difference.
  const auto t0 = transport(m, FlowField(6, 5, 2));
  auto d = dt_forward(m);
  axpy(-1.0, t0, d);
  CHECK(squared_norm(d) == 0.0);

  const auto u = random_flow(rng, 6, 5, 2);
  const auto y = random_array<cplx>(rng, 6, 5, 3);
  CHECK(rel(inner(transport(m, u), y), inner(m, transport_adjoint(y, u))) < 1e-12);
  CHECK_THROWS_AS(transport(m, FlowField(6, 5, 3)), Error);
}

TEST_CASE("flow gradient and divergence") {
  FlowField c(5, 4, 2);
  c.ux.fill(1.5);
  c.uy.fill(-2.0);
  CHECK(squared_norm(grad_flow_forward(c)) == 0.0);

  FlowField one(1, 1, 1);
  one.ux[0] = 3.0;
  CHECK(squared_norm(grad_flow_forward(one)) == 0.0);

  Rng rng(4);
  const auto u = random_flow(rng, 6, 6, 2);
  FlowGradient y{random_array<double>(rng, 6, 6, 2), random_array<double>(rng, 6, 6, 2),
                 random_array<double>(rng, 6, 6, 2), random_array<double>(rng, 6, 6, 2)};
  CHECK(rel(inner(grad_flow_forward(u), y), -inner(u, divergence_flow(y))) < 1e-12);
}

TEST_CASE("unitary Fourier transform") {
  Rng rng(5);
  const auto m = random_array<cplx>(rng, 6, 5, 2);
  auto k = fft2_unitary(m);
  auto oracle = naive_dft(m);
  axpy(-1.0, oracle, k);
  CHECK(std::sqrt(squared_norm(k) / squared_norm(oracle)) < 1e-12);

  auto back = ifft2_unitary(fft2_unitary(m));
  axpy(-1.0, m, back);
  CHECK(std::sqrt(squared_norm(back) / squared_norm(m)) < 1e-12);

  const RealSequence full(6, 5, 2, 1.0);
  CHECK(rel(squared_norm(fourier_undersampled(m, full)), squared_norm(m)) < 1e-12);
}

TEST_CASE("masked Fourier operator") {
  Rng rng(6);
  const auto m = random_array<cplx>(rng, 8, 8, 2);
  RealSequence mask(8, 8, 2, 1.0);
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t i = 0; i < 8; ++i) mask(i, 3, t) = 0.0;
  const auto k = fourier_undersampled(m, mask);
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t i = 0; i < 8; ++i) CHECK(k(i, 3, t) == cplx(0.0));

  for (auto& v : mask.data()) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
  const auto y = random_array<cplx>(rng, 8, 8, 2);
  CHECK(rel(inner(fourier_undersampled(m, mask), y), inner(m, fourier_undersampled_adjoint(y, mask))) < 1e-12);
  CHECK_THROWS_AS(fourier_undersampled(m, RealSequence(8, 4, 2)), Error);
}

TEST_CASE("Haar wavelet") {
  Rng rng(7);
  const auto m = random_array<cplx>(rng, 16, 16, 1);
  auto back = wavelet_adjoint(wavelet_forward(m));
  axpy(-1.0, m, back);
  CHECK(std::sqrt(squared_norm(back) / squared_norm(m)) < 1e-12);
  CHECK(rel(squared_norm(wavelet_forward(m)), squared_norm(m)) < 1e-12);

  const ImageSequence c(4, 4, 1, cplx(2.0, 1.0));
  const auto w = wavelet_forward(c, 1);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i >= 2 || j >= 2) CHECK(std::abs(w(i, j, 0)) < 1e-15);
  // Approximation band of an orthonormal Haar level: 2x the local mean.
  CHECK(std::abs(w(0, 0, 0) - cplx(4.0, 2.0)) < 1e-14);

  const auto x = random_array<cplx>(rng, 8, 16, 2), y = random_array<cplx>(rng, 8, 16, 2);
  CHECK(rel(inner(wavelet_forward(x, 3), y), inner(x, wavelet_adjoint(y, 3))) < 1e-12);
  CHECK_THROWS_AS(wavelet_forward(random_array<cplx>(rng, 6, 8, 1), 2), Error);
  CHECK(default_wavelet_levels(64, 64) == 4);
  CHECK(default_wavelet_levels(4, 4) == 1);
}

TEST_CASE("patch extraction and overlap-add") {
  const PatchGeometry tiles(8, 8, 4, 4);
  CHECK(tiles.count() == 4);
  const RealSequence ones(8, 8, 2, 1.0);
  CHECK(aggregate_patches(extract_patches(ones, tiles), tiles) == ones);

  const PatchGeometry half(12, 12, 4, 2);
  // Coverage counted by direct enumeration of the origins.
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) {
      double count = 0.0;
      for (auto [oi, oj] : half.origins()) count += (i >= oi && i < oi + 4 && j >= oj && j < oj + 4) ? 1.0 : 0.0;
      CHECK(half.coverage(i, j) == count);
    }
  const auto rr = aggregate_patches(extract_patches(RealSequence(12, 12, 2, 1.0), half), half);
  CHECK(rr(5, 6, 1) == 4.0);
  CHECK(rr(0, 0, 0) == 1.0);

  // Uneven stride adds a border origin so every pixel is covered.
  const PatchGeometry uneven(10, 7, 4, 3);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 7; ++j) CHECK(uneven.coverage(i, j) >= 1.0);

  Rng rng(8);
  const auto u = random_array<double>(rng, 10, 7, 2);
  PatchStack y;
  for (int t = 0; t < 2; ++t) y.push_back(Eigen::MatrixXd::Random(16, static_cast<Eigen::Index>(uneven.count())));
  const auto ru = extract_patches(u, uneven);
  double lhs = 0.0;
  for (int t = 0; t < 2; ++t) lhs += ru[static_cast<std::size_t>(t)].cwiseProduct(y[static_cast<std::size_t>(t)]).sum();
  CHECK(rel(lhs, inner(u, aggregate_patches(y, uneven))) < 1e-12);
  CHECK_THROWS_AS(PatchGeometry(4, 4, 5, 1), Error);
}

TEST_CASE("operator norm bound") {
  CHECK(operator_norm_bound(FlowField(4, 4, 1)) == doctest::Approx(2.0 + std::sqrt(8.0) + std::sqrt(2.0)).epsilon(1e-14));
  FlowField u(4, 4, 1);
  u.ux(1, 1, 0) = 0.6;
  u.uy(1, 1, 0) = 0.8;
  CHECK(max_flow_modulus(u) == doctest::Approx(1.0));
  CHECK(operator_norm_bound(u) == doctest::Approx(2.0 + std::sqrt(8.0) + 2.0 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(operator_norm_bound(u) == doctest::Approx(7.6569).epsilon(1e-4));

  // Power iteration on C*C for C = [K; grad; Psi; transport].
  Rng rng(9);
  const auto flow = random_flow(rng, 8, 8, 2);
  RealSequence mask(8, 8, 3);
  for (auto& v : mask.data()) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
  auto x = random_array<cplx>(rng, 8, 8, 3);
  double estimate = 0.0;
  for (int it = 0; it < 300; ++it) {
    const double n = std::sqrt(squared_norm(x));
    for (auto& v : x.data()) v /= n;
    auto next = fourier_undersampled_adjoint(fourier_undersampled(x, mask), mask);
    axpy(1.0, grad_spatial_central_adjoint(grad_spatial_central(x)), next);
    axpy(1.0, wavelet_adjoint(wavelet_forward(x, 1), 1), next);
    axpy(1.0, transport_adjoint(transport(x, flow), flow), next);
    estimate = std::sqrt(std::sqrt(squared_norm(next)));
    x = std::move(next);
  }
  CHECK(estimate <= operator_norm_bound(flow));
}
