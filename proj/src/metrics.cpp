#include "mrirdlmc/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace mrirdlmc {

double psnr(const RealSequence& gt, const RealSequence& rec) {
  require_same_shape(gt, rec, "psnr");
  double peak = 0.0, sse = 0.0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    peak = std::max(peak, gt[k] * gt[k]);
    const double d = gt[k] - rec[k];
    sse += d * d;
  }
  if (peak == 0.0) throw Error(ErrorKind::ZeroReference, "ground truth is identically zero");
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak / (sse / static_cast<double>(gt.size())));
}

double psnr(const ImageSequence& gt, const ImageSequence& rec) {
  require_same_shape(gt, rec, "psnr");
  return psnr(magnitude(gt), magnitude(rec));
}

namespace {

using Window = std::array<double, 2 * kSsimRadius + 1>;

Window gaussian_window() {
  Window w{};
  double s = 0.0;
  for (int k = -kSsimRadius; k <= kSsimRadius; ++k) {
    w[k + kSsimRadius] = std::exp(-0.5 * k * k / (kSsimSigma * kSsimSigma));
    s += w[k + kSsimRadius];
  }
  for (auto& v : w) v /= s;
  return w;
}

// Half-sample symmetric extension: -1 -> 0, n -> n-1, repeated as needed.
std::size_t reflect(long long k, std::size_t n) {
  const auto p = static_cast<long long>(2 * n);
  k %= p;
  if (k < 0) k += p;
  return static_cast<std::size_t>(k < static_cast<long long>(n) ? k : p - 1 - k);
}

// Separable Gaussian filter of a row-major nx x ny frame.
std::vector<double> blur(const std::vector<double>& a, std::size_t nx, std::size_t ny) {
  static const Window w = gaussian_window();
  std::vector<double> tmp(a.size(), 0.0), out(a.size(), 0.0);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      double s = 0.0;
      for (int k = -kSsimRadius; k <= kSsimRadius; ++k)
        s += w[k + kSsimRadius] * a[i * ny + reflect(static_cast<long long>(j) + k, ny)];
      tmp[i * ny + j] = s;
    }
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      double s = 0.0;
      for (int k = -kSsimRadius; k <= kSsimRadius; ++k)
        s += w[k + kSsimRadius] * tmp[reflect(static_cast<long long>(i) + k, nx) * ny + j];
      out[i * ny + j] = s;
    }
  return out;
}

double frame_ssim(std::span<const double> x, std::span<const double> y, std::size_t nx,
                  std::size_t ny) {
  const auto map = ssim_map(x, y, nx, ny);
  double s = 0.0;
  for (double v : map) s += v;
  return s / static_cast<double>(map.size());
}

}  // namespace

std::vector<double> ssim_map(std::span<const double> x, std::span<const double> y, std::size_t nx,
                             std::size_t ny) {
  const std::size_t n = nx * ny;
  if (x.size() != n || y.size() != n) throw Error(ErrorKind::ShapeMismatch, "ssim frame size");
  std::vector<double> xv(x.begin(), x.end()), yv(y.begin(), y.end());
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t k = 0; k < n; ++k) {
    xx[k] = xv[k] * xv[k];
    yy[k] = yv[k] * yv[k];
    xy[k] = xv[k] * yv[k];
  }
  const auto mx = blur(xv, nx, ny), my = blur(yv, nx, ny);
  const auto sxx = blur(xx, nx, ny), syy = blur(yy, nx, ny), sxy = blur(xy, nx, ny);

  std::vector<double> map(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double vx = sxx[k] - mx[k] * mx[k];
    const double vy = syy[k] - my[k] * my[k];
    const double cxy = sxy[k] - mx[k] * my[k];
    const double num = (2.0 * mx[k] * my[k] + kSsimC1) * (2.0 * cxy + kSsimC2);
    const double den = (mx[k] * mx[k] + my[k] * my[k] + kSsimC1) * (vx + vy + kSsimC2);
    map[k] = std::clamp(num / den, -1.0, 1.0);
  }
  return map;
}

double ssim(const RealSequence& gt, const RealSequence& rec) {
  require_same_shape(gt, rec, "ssim");
  double peak = 0.0;
  for (double v : gt.data()) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.0 ? 1.0 / peak : 1.0;
  RealSequence a = gt, b = rec;
  for (auto& v : a.data()) v *= scale;
  for (auto& v : b.data()) v *= scale;
  double s = 0.0;
  for (std::size_t t = 0; t < a.nt(); ++t) s += frame_ssim(a.frame(t), b.frame(t), a.nx(), a.ny());
  return s / static_cast<double>(a.nt());
}

double ssim(const ImageSequence& gt, const ImageSequence& rec) {
  require_same_shape(gt, rec, "ssim");
  return ssim(magnitude(gt), magnitude(rec));
}

MetricReport sequence_metrics(const ImageSequence& gt, const ImageSequence& rec) {
  require_same_shape(gt, rec, "sequence_metrics");
  const auto a = magnitude(gt), b = magnitude(rec);
  MetricReport r;
  for (std::size_t t = 0; t < a.nt(); ++t) {
    RealSequence fa(a.nx(), a.ny(), 1), fb(a.nx(), a.ny(), 1);
    std::copy(a.frame(t).begin(), a.frame(t).end(), fa.data().begin());
    std::copy(b.frame(t).begin(), b.frame(t).end(), fb.data().begin());
    r.per_frame_psnr.push_back(psnr(fa, fb));
    r.per_frame_ssim.push_back(ssim(fa, fb));
  }
  const double n = static_cast<double>(a.nt());
  for (double v : r.per_frame_psnr) r.mean_psnr += v;
  for (double v : r.per_frame_ssim) r.mean_ssim += v;
  r.mean_psnr /= n;
  r.mean_ssim /= n;
  return r;
}

void write_metrics_csv(const MetricReport& r, std::ostream& out) {
  const auto old = out.precision(17);
  out << "frame_index,psnr_db,ssim\n";
  for (std::size_t t = 0; t < r.per_frame_psnr.size(); ++t) {
    out << t << ',';
    if (std::isinf(r.per_frame_psnr[t])) out << "inf";
    else out << r.per_frame_psnr[t];
    out << ',' << r.per_frame_ssim[t] << '\n';
  }
  out.precision(old);
}

}  // namespace mrirdlmc
