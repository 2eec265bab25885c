#include "mrirdlmc/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace mrirdlmc {

std::vector<std::uint16_t> normalize_to_u16(const Tensor& frame) {
  if (frame.ndim() != 2) throw Error(ErrorKind::WrongRank, "PGM export needs a 2-D tensor");
  const std::size_t n = frame.element_count();
  std::vector<double> mag(n);
  const auto& v = frame.values();
  for (std::size_t k = 0; k < n; ++k)
    mag[k] = frame.dtype() == Dtype::Complex128 ? std::hypot(v[2 * k], v[2 * k + 1]) : v[k];

  const auto [lo, hi] = std::minmax_element(mag.begin(), mag.end());
  const double min = *lo, range = *hi - *lo;
  std::vector<std::uint16_t> out(n, 0);
  if (!(range > 0.0)) return out;
  for (std::size_t k = 0; k < n; ++k)
    out[k] = static_cast<std::uint16_t>(std::lround((mag[k] - min) / range * 65535.0));
  return out;
}

void export_pgm(const Tensor& frame, const std::filesystem::path& path) {
  const auto pixels = normalize_to_u16(frame);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  out << "P5\n" << frame.shape()[1] << ' ' << frame.shape()[0] << "\n65535\n";
  for (auto p : pixels) {
    const char be[2] = {static_cast<char>(p >> 8), static_cast<char>(p & 0xff)};
    out.write(be, 2);
  }
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write to " + path.string() + " failed");
}

}  // namespace mrirdlmc
