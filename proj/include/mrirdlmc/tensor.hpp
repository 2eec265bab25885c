#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mrirdlmc/array3.hpp"

namespace mrirdlmc {

enum class Dtype : std::uint8_t { Real64 = 0x01, Complex128 = 0x02 };

// Self-describing n-d array as it lives on disk. Row-major, complex values
// interleaved as (re, im) in `values`.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Dtype dtype, std::vector<std::size_t> shape);
  Tensor(Dtype dtype, std::vector<std::size_t> shape, std::vector<double> values);

  Dtype dtype() const noexcept { return dtype_; }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t ndim() const noexcept { return shape_.size(); }
  std::size_t element_count() const noexcept;
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const Tensor&) const = default;

 private:
  Dtype dtype_ = Dtype::Real64;
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// NDF: "NDF1", dtype byte, ndim byte, ndim x u64 LE extents, LE f64 payload.
Tensor read_ndf(const std::filesystem::path& path);
void write_ndf(const Tensor& t, const std::filesystem::path& path);

// Conversions between on-disk tensors (shape nx x ny x nt, row-major) and the
// frame-contiguous in-memory layout.
Tensor to_tensor(const ImageSequence& m);
Tensor to_tensor(const RealSequence& m);
ImageSequence image_from_tensor(const Tensor& t);
RealSequence real_from_tensor(const Tensor& t);

// Flow files are nx x ny x (nt-1) x 2 with channel 0 = ux, 1 = uy.
Tensor to_tensor(const FlowField& u);
FlowField flow_from_tensor(const Tensor& t);

// Masks are stored as real 0/1, either nx x ny (shared) or nx x ny x nt.
RealSequence mask_from_tensor(const Tensor& t, std::size_t frames);

}  // namespace mrirdlmc
