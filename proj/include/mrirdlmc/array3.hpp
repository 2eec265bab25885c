#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "mrirdlmc/error.hpp"

namespace mrirdlmc {

using cplx = std::complex<double>;

// Dense (nx, ny, frames) stack. Frames are contiguous and each frame is
// row-major in (i, j), so frame t starts at t * nx * ny. The i axis is the
// "x" direction of the flow field, j is "y".
template <typename T>
class Array3 {
 public:
  using value_type = T;

  Array3() = default;
  Array3(std::size_t nx, std::size_t ny, std::size_t nt, T fill = T{})
      : nx_(nx), ny_(ny), nt_(nt), data_(nx * ny * nt, fill) {}

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t nt() const noexcept { return nt_; }
  std::size_t frame_size() const noexcept { return nx_ * ny_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t i, std::size_t j, std::size_t t) noexcept {
    return data_[(t * nx_ + i) * ny_ + j];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t t) const noexcept {
    return data_[(t * nx_ + i) * ny_ + j];
  }
  T& operator[](std::size_t k) noexcept { return data_[k]; }
  const T& operator[](std::size_t k) const noexcept { return data_[k]; }

  std::span<T> frame(std::size_t t) noexcept {
    return {data_.data() + t * frame_size(), frame_size()};
  }
  std::span<const T> frame(std::size_t t) const noexcept {
    return {data_.data() + t * frame_size(), frame_size()};
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(const Array3& other) const noexcept {
    return nx_ == other.nx_ && ny_ == other.ny_ && nt_ == other.nt_;
  }

  void fill(T value) {
    for (auto& v : data_) v = value;
  }

  bool operator==(const Array3&) const = default;

 private:
  std::size_t nx_ = 0, ny_ = 0, nt_ = 0;
  std::vector<T> data_;
};

using ImageSequence = Array3<cplx>;
using RealSequence = Array3<double>;

// Velocity field on the transitions between consecutive frames.
struct FlowField {
  RealSequence ux;
  RealSequence uy;

  FlowField() = default;
  FlowField(std::size_t nx, std::size_t ny, std::size_t transitions)
      : ux(nx, ny, transitions), uy(nx, ny, transitions) {}

  std::size_t nx() const noexcept { return ux.nx(); }
  std::size_t ny() const noexcept { return ux.ny(); }
  std::size_t nt() const noexcept { return ux.nt(); }

  bool same_shape(const FlowField& o) const noexcept { return ux.same_shape(o.ux); }
  bool operator==(const FlowField&) const = default;
};

template <typename T>
void require_same_shape(const Array3<T>& a, const Array3<T>& b, const char* where) {
  if (!a.same_shape(b)) throw Error(ErrorKind::ShapeMismatch, where);
}

// ---- vector-space helpers used by the generic primal-dual solver ----------

template <typename T>
void axpy(double alpha, const Array3<T>& x, Array3<T>& y) {
  auto& yd = y.data();
  const auto& xd = x.data();
  for (std::size_t k = 0; k < yd.size(); ++k) yd[k] += alpha * xd[k];
}

template <typename T>
double squared_norm(const Array3<T>& x) {
  double s = 0.0;
  for (const auto& v : x.data()) s += std::norm(v);
  return s;
}

template <typename T>
bool all_finite(const Array3<T>& x) {
  for (const auto& v : x.data()) {
    if constexpr (std::is_same_v<T, cplx>) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    } else {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

inline void axpy(double alpha, const FlowField& x, FlowField& y) {
  axpy(alpha, x.ux, y.ux);
  axpy(alpha, x.uy, y.uy);
}
inline double squared_norm(const FlowField& x) { return squared_norm(x.ux) + squared_norm(x.uy); }
inline bool all_finite(const FlowField& x) { return all_finite(x.ux) && all_finite(x.uy); }

// Real inner product <x, y> = Re sum conj(x) y, the one under which all
// operator adjoints in this library are taken.
template <typename T>
double inner(const Array3<T>& x, const Array3<T>& y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if constexpr (std::is_same_v<T, cplx>)
      s += x[k].real() * y[k].real() + x[k].imag() * y[k].imag();
    else
      s += x[k] * y[k];
  }
  return s;
}
inline double inner(const FlowField& x, const FlowField& y) {
  return inner(x.ux, y.ux) + inner(x.uy, y.uy);
}

RealSequence magnitude(const ImageSequence& m);

}  // namespace mrirdlmc
