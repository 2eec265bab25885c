#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "mrirdlmc/operators.hpp"

namespace mrirdlmc {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
// Plans are estimated, never measured, so the chosen algorithm (and thus
// every output bit) is the same on every run.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t nx, std::size_t ny, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(nx, ny, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* scratch = fftw_alloc_complex(nx * ny);
    fftw_plan p = fftw_plan_dft_2d(static_cast<int>(nx), static_cast<int>(ny), scratch, scratch, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

ImageSequence transform(const ImageSequence& in, int sign) {
  ImageSequence out = in;
  if (in.size() == 0) return out;
  fftw_plan plan = PlanCache::instance().get(in.nx(), in.ny(), sign);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.frame_size()));
  for (std::size_t t = 0; t < in.nt(); ++t) {
    auto* frame = reinterpret_cast<fftw_complex*>(out.frame(t).data());
    fftw_execute_dft(plan, frame, frame);
  }
  for (auto& v : out.data()) v *= scale;
  return out;
}

void require_mask(const ImageSequence& m, const RealSequence& mask) {
  if (m.nx() != mask.nx() || m.ny() != mask.ny() || m.nt() != mask.nt())
    throw Error(ErrorKind::ShapeMismatch, "mask grid does not match the data");
}

}  // namespace

ImageSequence fft2_unitary(const ImageSequence& m) { return transform(m, FFTW_FORWARD); }
ImageSequence ifft2_unitary(const ImageSequence& k) { return transform(k, FFTW_BACKWARD); }

ImageSequence fourier_undersampled(const ImageSequence& m, const RealSequence& mask) {
  require_mask(m, mask);
  auto k = fft2_unitary(m);
  for (std::size_t n = 0; n < k.size(); ++n) k[n] *= mask[n];
  return k;
}

ImageSequence fourier_undersampled_adjoint(const ImageSequence& k, const RealSequence& mask) {
  require_mask(k, mask);
  ImageSequence masked = k;
  for (std::size_t n = 0; n < masked.size(); ++n) masked[n] *= mask[n];
  return ifft2_unitary(masked);
}

}  // namespace mrirdlmc
