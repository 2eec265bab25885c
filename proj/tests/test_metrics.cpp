#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "mrirdlmc/metrics.hpp"
#include "support.hpp"

using namespace mrirdlmc;

namespace {

// Direct 2-D windowed SSIM with mirrored borders, no separability.
double ssim_direct(const RealSequence& x, const RealSequence& y, std::size_t t) {
  const int r = kSsimRadius;
  double w[11][11], total = 0.0;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b) {
      w[a + r][b + r] = std::exp(-(a * a + b * b) / (2.0 * kSsimSigma * kSsimSigma));
      total += w[a + r][b + r];
    }
  const auto mirror = [](long long k, long long n) {
    while (k < 0 || k >= n) k = k < 0 ? -k - 1 : 2 * n - k - 1;
    return static_cast<std::size_t>(k);
  };
  const auto nx = static_cast<long long>(x.nx()), ny = static_cast<long long>(x.ny());
  double sum = 0.0;
  for (long long i = 0; i < nx; ++i)
    for (long long j = 0; j < ny; ++j) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int a = -r; a <= r; ++a)
        for (int b = -r; b <= r; ++b) {
          const double g = w[a + r][b + r] / total;
          const double p = x(mirror(i + a, nx), mirror(j + b, ny), t);
          const double q = y(mirror(i + a, nx), mirror(j + b, ny), t);
          mx += g * p;
          my += g * q;
          sxx += g * p * p;
          syy += g * q * q;
          sxy += g * p * q;
        }
      const double vx = sxx - mx * mx, vy = syy - my * my, c = sxy - mx * my;
      sum += (2 * mx * my + kSsimC1) * (2 * c + kSsimC2) / ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
    }
  return sum / static_cast<double>(nx * ny);
}

}  // namespace

TEST_CASE("psnr") {
  const RealSequence gt(4, 4, 1, 1.0);
  CHECK(psnr(gt, gt) == std::numeric_limits<double>::infinity());
  CHECK(psnr(gt, RealSequence(4, 4, 1)) == doctest::Approx(0.0).epsilon(1e-15));
  RealSequence off = gt;
  for (double& v : off.data()) v = 0.9;
  CHECK(psnr(gt, off) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(support::kind_of([] { psnr(RealSequence(2, 2, 1), RealSequence(2, 2, 1)); }) == ErrorKind::ZeroReference);

  // Complex inputs are compared by modulus.
  ImageSequence a(2, 2, 1, cplx(0.0, 1.0)), b(2, 2, 1, cplx(-1.0, 0.0));
  CHECK(psnr(a, b) == std::numeric_limits<double>::infinity());
}

TEST_CASE("ssim") {
  Rng rng(61);
  RealSequence m(24, 20, 2);
  for (double& v : m.data()) v = rng.uniform();
  CHECK(ssim(m, m) == doctest::Approx(1.0).epsilon(1e-14));
  const RealSequence c(8, 8, 1, 0.5);
  CHECK(ssim(c, c) == 1.0);

  RealSequence inv = m;
  for (double& v : inv.data()) v = 1.0 - v;
  double peak = 0.0;
  for (double v : m.data()) peak = std::max(peak, v);
  RealSequence mn = m, in = inv;
  for (double& v : mn.data()) v /= peak;
  for (double& v : in.data()) v /= peak;
  const double expected = 0.5 * (ssim_direct(mn, in, 0) + ssim_direct(mn, in, 1));
  const double got = ssim(m, inv);
  CHECK(got < 0.3);
  CHECK(std::abs(got - expected) < 1e-12);
}

TEST_CASE("sequence report and csv") {
  // Uniform errors of 10^-0.5 and 10^-1.5 give 10 and 30 dB.
  ImageSequence g(4, 4, 2, 1.0), r(4, 4, 2);
  for (std::size_t k = 0; k < 32; ++k) r[k] = 1.0 - std::pow(10.0, k < 16 ? -0.5 : -1.5);
  const auto rep = sequence_metrics(g, r);
  REQUIRE(rep.per_frame_psnr.size() == 2);
  CHECK(rep.per_frame_psnr[0] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(rep.per_frame_psnr[1] == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(rep.mean_psnr == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(rep.per_frame_ssim.size() == 2);

  const auto exact = sequence_metrics(g, g);
  std::ostringstream out;
  write_metrics_csv(exact, out);
  CHECK(out.str().find("0,inf,1") != std::string::npos);
  CHECK(exact.mean_psnr == std::numeric_limits<double>::infinity());
}
