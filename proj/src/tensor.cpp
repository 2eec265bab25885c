#include "mrirdlmc/tensor.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>

namespace mrirdlmc {

namespace {

constexpr std::array<char, 4> kMagic{'N', 'D', 'F', '1'};
constexpr std::size_t kMaxDims = 8;

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

std::size_t scalars_per_element(Dtype d) { return d == Dtype::Complex128 ? 2 : 1; }

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const std::vector<std::size_t>& shape) {
  if (shape.empty() || shape.size() > kMaxDims)
    throw Error(ErrorKind::WrongRank, "tensor rank must be in [1, 8]");
  for (auto e : shape)
    if (e == 0) throw Error(ErrorKind::ShapeMismatch, "tensor extents must be >= 1");
}

}  // namespace

Tensor::Tensor(Dtype dtype, std::vector<std::size_t> shape)
    : dtype_(dtype), shape_(std::move(shape)) {
  check_shape(shape_);
  values_.assign(product(shape_) * scalars_per_element(dtype_), 0.0);
}

Tensor::Tensor(Dtype dtype, std::vector<std::size_t> shape, std::vector<double> values)
    : dtype_(dtype), shape_(std::move(shape)), values_(std::move(values)) {
  check_shape(shape_);
  if (values_.size() != product(shape_) * scalars_per_element(dtype_))
    throw Error(ErrorKind::ShapeMismatch, "value count does not match shape");
}

std::size_t Tensor::element_count() const noexcept { return product(shape_); }

Tensor read_ndf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());

  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(ErrorKind::BadMagic, path.string());

  unsigned char head[2];
  in.read(reinterpret_cast<char*>(head), 2);
  if (!in) throw Error(ErrorKind::TruncatedFile, "header of " + path.string());
  if (head[0] != 0x01 && head[0] != 0x02)
    throw Error(ErrorKind::UnsupportedDtype, "dtype byte " + std::to_string(head[0]));
  const auto dtype = static_cast<Dtype>(head[0]);
  const std::size_t ndim = head[1];
  if (ndim == 0 || ndim > kMaxDims)
    throw Error(ErrorKind::BadMagic, "ndim " + std::to_string(ndim) + " out of range");

  std::vector<std::size_t> shape(ndim);
  for (auto& extent : shape) {
    std::uint64_t e = 0;
    in.read(reinterpret_cast<char*>(&e), sizeof e);
    if (!in) throw Error(ErrorKind::TruncatedFile, "extents of " + path.string());
    e = to_little(e);
    if (e == 0) throw Error(ErrorKind::BadMagic, "zero extent in " + path.string());
    extent = static_cast<std::size_t>(e);
  }

  const std::size_t count = product(shape) * scalars_per_element(dtype);
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
    throw Error(ErrorKind::TruncatedFile, path.string() + " payload shorter than header");
  if (in.peek() != std::ifstream::traits_type::eof())
    throw Error(ErrorKind::BadMagic, path.string() + " has trailing bytes");
  for (auto& v : values) v = to_little(v);
  return Tensor(dtype, std::move(shape), std::move(values));
}

void write_ndf(const Tensor& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  const unsigned char head[2] = {static_cast<unsigned char>(t.dtype()),
                                 static_cast<unsigned char>(t.ndim())};
  out.write(reinterpret_cast<const char*>(head), 2);
  for (auto e : t.shape()) {
    const std::uint64_t le = to_little(static_cast<std::uint64_t>(e));
    out.write(reinterpret_cast<const char*>(&le), sizeof le);
  }
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(t.values().data()),
              static_cast<std::streamsize>(t.values().size() * sizeof(double)));
  } else {
    for (double v : t.values()) {
      const double le = to_little(v);
      out.write(reinterpret_cast<const char*>(&le), sizeof le);
    }
  }
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write to " + path.string() + " failed");
}

// ---- layout conversions --------------------------------------------------

namespace {

std::size_t disk_index(std::size_t i, std::size_t j, std::size_t t, std::size_t ny,
                       std::size_t nt) {
  return (i * ny + j) * nt + t;
}

void require_rank3(const Tensor& t, const char* what) {
  if (t.ndim() != 3 && t.ndim() != 2)
    throw Error(ErrorKind::WrongRank, std::string(what) + " must be nx x ny x nt");
}

}  // namespace

Tensor to_tensor(const ImageSequence& m) {
  Tensor t(Dtype::Complex128, {m.nx(), m.ny(), m.nt()});
  auto& v = t.values();
  for (std::size_t tt = 0; tt < m.nt(); ++tt)
    for (std::size_t i = 0; i < m.nx(); ++i)
      for (std::size_t j = 0; j < m.ny(); ++j) {
        const auto k = 2 * disk_index(i, j, tt, m.ny(), m.nt());
        v[k] = m(i, j, tt).real();
        v[k + 1] = m(i, j, tt).imag();
      }
  return t;
}

Tensor to_tensor(const RealSequence& m) {
  Tensor t(Dtype::Real64, {m.nx(), m.ny(), m.nt()});
  auto& v = t.values();
  for (std::size_t tt = 0; tt < m.nt(); ++tt)
    for (std::size_t i = 0; i < m.nx(); ++i)
      for (std::size_t j = 0; j < m.ny(); ++j) v[disk_index(i, j, tt, m.ny(), m.nt())] = m(i, j, tt);
  return t;
}

ImageSequence image_from_tensor(const Tensor& t) {
  require_rank3(t, "image sequence");
  const auto nx = t.shape()[0], ny = t.shape()[1], nt = t.ndim() == 3 ? t.shape()[2] : 1;
  ImageSequence m(nx, ny, nt);
  const auto& v = t.values();
  for (std::size_t tt = 0; tt < nt; ++tt)
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        const auto k = disk_index(i, j, tt, ny, nt);
        m(i, j, tt) = t.dtype() == Dtype::Complex128 ? cplx(v[2 * k], v[2 * k + 1]) : cplx(v[k], 0.0);
      }
  return m;
}

RealSequence real_from_tensor(const Tensor& t) {
  require_rank3(t, "real sequence");
  if (t.dtype() != Dtype::Real64)
    throw Error(ErrorKind::UnsupportedDtype, "expected a real64 tensor");
  const auto nx = t.shape()[0], ny = t.shape()[1], nt = t.ndim() == 3 ? t.shape()[2] : 1;
  RealSequence m(nx, ny, nt);
  for (std::size_t tt = 0; tt < nt; ++tt)
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) m(i, j, tt) = t.values()[disk_index(i, j, tt, ny, nt)];
  return m;
}

Tensor to_tensor(const FlowField& u) {
  Tensor t(Dtype::Real64, {u.nx(), u.ny(), u.nt(), 2});
  auto& v = t.values();
  for (std::size_t tt = 0; tt < u.nt(); ++tt)
    for (std::size_t i = 0; i < u.nx(); ++i)
      for (std::size_t j = 0; j < u.ny(); ++j) {
        const auto k = 2 * disk_index(i, j, tt, u.ny(), u.nt());
        v[k] = u.ux(i, j, tt);
        v[k + 1] = u.uy(i, j, tt);
      }
  return t;
}

FlowField flow_from_tensor(const Tensor& t) {
  if (t.ndim() != 4 || t.shape()[3] != 2)
    throw Error(ErrorKind::WrongRank, "flow tensor must be nx x ny x (nt-1) x 2");
  if (t.dtype() != Dtype::Real64) throw Error(ErrorKind::UnsupportedDtype, "flow must be real64");
  const auto nx = t.shape()[0], ny = t.shape()[1], nt = t.shape()[2];
  FlowField u(nx, ny, nt);
  const auto& v = t.values();
  for (std::size_t tt = 0; tt < nt; ++tt)
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        const auto k = 2 * disk_index(i, j, tt, ny, nt);
        u.ux(i, j, tt) = v[k];
        u.uy(i, j, tt) = v[k + 1];
      }
  return u;
}

RealSequence mask_from_tensor(const Tensor& t, std::size_t frames) {
  RealSequence stored = real_from_tensor(t);
  for (double v : stored.data())
    if (v != 0.0 && v != 1.0) throw Error(ErrorKind::ConstraintViolation, "mask values must be 0 or 1");
  if (stored.nt() == frames) return stored;
  if (stored.nt() != 1)
    throw Error(ErrorKind::ShapeMismatch, "mask frame count does not match the data");
  RealSequence mask(stored.nx(), stored.ny(), frames);
  for (std::size_t t2 = 0; t2 < frames; ++t2)
    std::copy(stored.frame(0).begin(), stored.frame(0).end(), mask.frame(t2).begin());
  return mask;
}

RealSequence magnitude(const ImageSequence& m) {
  RealSequence out(m.nx(), m.ny(), m.nt());
  for (std::size_t k = 0; k < m.size(); ++k) out[k] = std::abs(m[k]);
  return out;
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::NonNumericValue: return "NonNumericValue";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::WrongRank: return "WrongRank";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::BadExtent: return "BadExtent";
    case ErrorKind::GeometryMismatch: return "GeometryMismatch";
    case ErrorKind::NonFiniteIterate: return "NonFiniteIterate";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::InfeasibleBudget: return "InfeasibleBudget";
    case ErrorKind::SpecViolation: return "SpecViolation";
    case ErrorKind::ZeroReference: return "ZeroReference";
    case ErrorKind::EmptyMask: return "EmptyMask";
  }
  return "Unknown";
}

}  // namespace mrirdlmc
