#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mrirdlmc/array3.hpp"

namespace mrirdlmc {

// Square overlapping patches on an nx x ny grid. Origins step by `stride`
// along each axis; an extra origin at n - size is added when the stride does
// not land on the border, so every pixel is covered.
class PatchGeometry {
 public:
  PatchGeometry(std::size_t nx, std::size_t ny, std::size_t size, std::size_t stride);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t stride() const noexcept { return stride_; }
  std::size_t patch_length() const noexcept { return size_ * size_; }
  std::size_t count() const noexcept { return origins_.size(); }
  const std::vector<std::pair<std::size_t, std::size_t>>& origins() const noexcept { return origins_; }

  // c(x): number of patches containing pixel (i, j).
  double coverage(std::size_t i, std::size_t j) const noexcept { return coverage_[i * ny_ + j]; }

  // Nd * |P| > nx * ny
  bool overcomplete(std::size_t atoms) const noexcept { return atoms * count() > nx_ * ny_; }

 private:
  std::size_t nx_, ny_, size_, stride_;
  std::vector<std::pair<std::size_t, std::size_t>> origins_;
  std::vector<double> coverage_;
};

// Per frame, a (size^2) x |P| matrix whose columns are the row-major patches.
using PatchStack = std::vector<Eigen::MatrixXd>;

PatchStack extract_patches(const RealSequence& u, const PatchGeometry& g);
// R^T: overlap-add of patch columns back onto the grid.
RealSequence aggregate_patches(const PatchStack& patches, const PatchGeometry& g);

struct FlowPatches {
  PatchStack x, y;
};
FlowPatches extract_patches(const FlowField& u, const PatchGeometry& g);
FlowField aggregate_patches(const FlowPatches& patches, const PatchGeometry& g);

// c(x) replicated over `frames` frames.
RealSequence coverage_field(const PatchGeometry& g, std::size_t frames);

}  // namespace mrirdlmc
