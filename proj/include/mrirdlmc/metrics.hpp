#pragma once

#include <ostream>
#include <vector>

#include "mrirdlmc/array3.hpp"

namespace mrirdlmc {

// 10 log10(max(m^2) / mean((m - m_rec)^2)) over the moduli of all pixels.
// +infinity when the two agree exactly. Throws ZeroReference when max(m^2) = 0.
double psnr(const ImageSequence& gt, const ImageSequence& rec);
double psnr(const RealSequence& gt, const RealSequence& rec);

constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;
constexpr int kSsimRadius = 5;  // 11 x 11 window
constexpr double kSsimSigma = 1.5;

// Mean SSIM of the moduli, frame by frame and then averaged over frames.
// Both images are divided by the ground-truth maximum first.
double ssim(const ImageSequence& gt, const ImageSequence& rec);
double ssim(const RealSequence& gt, const RealSequence& rec);

// Per-pixel SSIM of one frame on already normalized inputs.
std::vector<double> ssim_map(std::span<const double> x, std::span<const double> y, std::size_t nx,
                             std::size_t ny);

struct MetricReport {
  std::vector<double> per_frame_psnr;
  std::vector<double> per_frame_ssim;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

MetricReport sequence_metrics(const ImageSequence& gt, const ImageSequence& rec);

// CSV: frame_index, psnr_db, ssim ("inf" for exact frames).
void write_metrics_csv(const MetricReport& r, std::ostream& out);

}  // namespace mrirdlmc
