#include <algorithm>
#include <cmath>
#include <vector>

#include "mrirdlmc/operators.hpp"

namespace mrirdlmc {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// One Haar analysis step on `n` samples spaced by `stride`.
void haar_step(cplx* x, std::size_t n, std::size_t stride, std::vector<cplx>& tmp) {
  const auto half = n / 2;
  tmp.resize(n);
  for (std::size_t k = 0; k < half; ++k) {
    const cplx a = x[2 * k * stride], b = x[(2 * k + 1) * stride];
    tmp[k] = (a + b) * kInvSqrt2;
    tmp[half + k] = (a - b) * kInvSqrt2;
  }
  for (std::size_t k = 0; k < n; ++k) x[k * stride] = tmp[k];
}

void haar_step_inverse(cplx* x, std::size_t n, std::size_t stride, std::vector<cplx>& tmp) {
  const auto half = n / 2;
  tmp.resize(n);
  for (std::size_t k = 0; k < half; ++k) {
    const cplx a = x[k * stride], d = x[(half + k) * stride];
    tmp[2 * k] = (a + d) * kInvSqrt2;
    tmp[2 * k + 1] = (a - d) * kInvSqrt2;
  }
  for (std::size_t k = 0; k < n; ++k) x[k * stride] = tmp[k];
}

void check_levels(std::size_t nx, std::size_t ny, int levels) {
  if (levels < 1) throw Error(ErrorKind::BadExtent, "wavelet needs at least one level");
  const std::size_t block = std::size_t{1} << levels;
  if (nx % block != 0 || ny % block != 0)
    throw Error(ErrorKind::BadExtent, "frame extents must be divisible by 2^" + std::to_string(levels));
}

}  // namespace

int default_wavelet_levels(std::size_t nx, std::size_t ny) {
  const auto extent = std::min(nx, ny);
  int log2 = 0;
  while ((std::size_t{2} << log2) <= extent) ++log2;
  return std::max(1, log2 - 2);
}

ImageSequence wavelet_forward(const ImageSequence& m, int levels) {
  check_levels(m.nx(), m.ny(), levels);
  ImageSequence c = m;
  std::vector<cplx> tmp;
  const auto ny = m.ny();
  for (std::size_t t = 0; t < m.nt(); ++t) {
    cplx* f = c.frame(t).data();
    std::size_t rows = m.nx(), cols = m.ny();
    for (int l = 0; l < levels; ++l, rows /= 2, cols /= 2) {
      for (std::size_t i = 0; i < rows; ++i) haar_step(f + i * ny, cols, 1, tmp);
      for (std::size_t j = 0; j < cols; ++j) haar_step(f + j, rows, ny, tmp);
    }
  }
  return c;
}

ImageSequence wavelet_adjoint(const ImageSequence& c, int levels) {
  check_levels(c.nx(), c.ny(), levels);
  ImageSequence m = c;
  std::vector<cplx> tmp;
  const auto ny = c.ny();
  for (std::size_t t = 0; t < c.nt(); ++t) {
    cplx* f = m.frame(t).data();
    for (int l = levels - 1; l >= 0; --l) {
      const std::size_t rows = c.nx() >> l, cols = c.ny() >> l;
      for (std::size_t j = 0; j < cols; ++j) haar_step_inverse(f + j, rows, ny, tmp);
      for (std::size_t i = 0; i < rows; ++i) haar_step_inverse(f + i * ny, cols, 1, tmp);
    }
  }
  return m;
}

ImageSequence wavelet_forward(const ImageSequence& m) {
  return wavelet_forward(m, default_wavelet_levels(m.nx(), m.ny()));
}

ImageSequence wavelet_adjoint(const ImageSequence& c) {
  return wavelet_adjoint(c, default_wavelet_levels(c.nx(), c.ny()));
}

}  // namespace mrirdlmc
