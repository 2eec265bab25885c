#include "mrirdlmc/patches.hpp"

namespace mrirdlmc {

namespace {

std::vector<std::size_t> axis_origins(std::size_t n, std::size_t size, std::size_t stride) {
  std::vector<std::size_t> out;
  for (std::size_t o = 0; o + size <= n; o += stride) out.push_back(o);
  if (out.back() + size < n) out.push_back(n - size);
  return out;
}

}  // namespace

PatchGeometry::PatchGeometry(std::size_t nx, std::size_t ny, std::size_t size, std::size_t stride)
    : nx_(nx), ny_(ny), size_(size), stride_(stride) {
  if (size == 0 || stride == 0 || size > nx || size > ny)
    throw Error(ErrorKind::GeometryMismatch,
                "patch size " + std::to_string(size) + " does not fit a " + std::to_string(nx) + "x" +
                    std::to_string(ny) + " grid");
  const auto oi = axis_origins(nx, size, stride);
  const auto oj = axis_origins(ny, size, stride);
  for (auto i : oi)
    for (auto j : oj) origins_.emplace_back(i, j);

  coverage_.assign(nx * ny, 0.0);
  for (const auto& [i0, j0] : origins_)
    for (std::size_t di = 0; di < size; ++di)
      for (std::size_t dj = 0; dj < size; ++dj) coverage_[(i0 + di) * ny + j0 + dj] += 1.0;
}

PatchStack extract_patches(const RealSequence& u, const PatchGeometry& g) {
  if (u.nx() != g.nx() || u.ny() != g.ny())
    throw Error(ErrorKind::GeometryMismatch, "patch geometry does not match the field");
  const auto ps = g.size();
  PatchStack out(u.nt(), Eigen::MatrixXd(g.patch_length(), g.count()));
  for (std::size_t t = 0; t < u.nt(); ++t)
    for (std::size_t p = 0; p < g.count(); ++p) {
      const auto [i0, j0] = g.origins()[p];
      for (std::size_t di = 0; di < ps; ++di)
        for (std::size_t dj = 0; dj < ps; ++dj)
          out[t](static_cast<Eigen::Index>(di * ps + dj), static_cast<Eigen::Index>(p)) =
              u(i0 + di, j0 + dj, t);
    }
  return out;
}

RealSequence aggregate_patches(const PatchStack& patches, const PatchGeometry& g) {
  const auto ps = g.size();
  RealSequence out(g.nx(), g.ny(), patches.size());
  for (std::size_t t = 0; t < patches.size(); ++t) {
    const auto& mat = patches[t];
    if (static_cast<std::size_t>(mat.rows()) != g.patch_length() ||
        static_cast<std::size_t>(mat.cols()) != g.count())
      throw Error(ErrorKind::GeometryMismatch, "patch matrix does not match the geometry");
    for (std::size_t p = 0; p < g.count(); ++p) {
      const auto [i0, j0] = g.origins()[p];
      for (std::size_t di = 0; di < ps; ++di)
        for (std::size_t dj = 0; dj < ps; ++dj)
          out(i0 + di, j0 + dj, t) +=
              mat(static_cast<Eigen::Index>(di * ps + dj), static_cast<Eigen::Index>(p));
    }
  }
  return out;
}

FlowPatches extract_patches(const FlowField& u, const PatchGeometry& g) {
  return {extract_patches(u.ux, g), extract_patches(u.uy, g)};
}

FlowField aggregate_patches(const FlowPatches& patches, const PatchGeometry& g) {
  FlowField u;
  u.ux = aggregate_patches(patches.x, g);
  u.uy = aggregate_patches(patches.y, g);
  return u;
}

RealSequence coverage_field(const PatchGeometry& g, std::size_t frames) {
  RealSequence c(g.nx(), g.ny(), frames);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < g.nx(); ++i)
      for (std::size_t j = 0; j < g.ny(); ++j) c(i, j, t) = g.coverage(i, j);
  return c;
}

}  // namespace mrirdlmc
