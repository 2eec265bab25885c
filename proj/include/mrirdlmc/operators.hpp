#pragma once

#include "mrirdlmc/array3.hpp"

namespace mrirdlmc {

// ---- spatial / temporal finite differences on image sequences ------------

template <typename T>
struct Gradient2 {
  Array3<T> dx;  // along i
  Array3<T> dy;  // along j
};

// Half central differences, zero on the spatial border and on the last frame.
template <typename T>
Gradient2<T> grad_spatial_central(const Array3<T>& m);
template <typename T>
Array3<T> grad_spatial_central_adjoint(const Gradient2<T>& y);

// m(t+1) - m(t), zero on the last frame.
template <typename T>
Array3<T> dt_forward(const Array3<T>& m);
template <typename T>
Array3<T> dt_adjoint(const Array3<T>& y);

// Brightness-constancy residual operator m -> dm/dt + grad m . u. The flow has
// one frame less than m; the last output frame is zero.
ImageSequence transport(const ImageSequence& m, const FlowField& u);
ImageSequence transport_adjoint(const ImageSequence& y, const FlowField& u);

// ---- flow field derivatives ----------------------------------------------

// Forward differences of each flow component, zero at i = nx-1 / j = ny-1.
struct FlowGradient {
  RealSequence ux_dx, ux_dy, uy_dx, uy_dy;
};

FlowGradient grad_flow_forward(const FlowField& u);
// Backward-difference divergence; the negative adjoint of grad_flow_forward.
FlowField divergence_flow(const FlowGradient& y);

void axpy(double alpha, const FlowGradient& x, FlowGradient& y);
double squared_norm(const FlowGradient& x);
bool all_finite(const FlowGradient& x);
double inner(const FlowGradient& x, const FlowGradient& y);

// ---- undersampled Fourier operator ---------------------------------------

// Orthonormal per-frame 2-D DFT (DC at index 0, no shift).
ImageSequence fft2_unitary(const ImageSequence& m);
ImageSequence ifft2_unitary(const ImageSequence& k);

// K = mask * F and K* = F^-1 * mask, masks are 0/1 on the same grid.
ImageSequence fourier_undersampled(const ImageSequence& m, const RealSequence& mask);
ImageSequence fourier_undersampled_adjoint(const ImageSequence& k, const RealSequence& mask);

// ---- orthonormal Haar wavelet --------------------------------------------

// max(1, floor(log2(min(nx, ny))) - 2)
int default_wavelet_levels(std::size_t nx, std::size_t ny);

// Mallat layout per frame. Throws BadExtent when an extent is not divisible
// by 2^levels.
ImageSequence wavelet_forward(const ImageSequence& m, int levels);
ImageSequence wavelet_adjoint(const ImageSequence& c, int levels);
ImageSequence wavelet_forward(const ImageSequence& m);
ImageSequence wavelet_adjoint(const ImageSequence& c);

// ---- norm bound of the stacked reconstruction operator -------------------

double max_flow_modulus(const FlowField& u);
double operator_norm_bound(const FlowField& u);

}  // namespace mrirdlmc
