#pragma once

#include <span>

#include "mrirdlmc/operators.hpp"

namespace mrirdlmc {

// pi_lambda(y) = y / max(1, |y|_2 / lambda) on a single vector. lambda = 0
// maps everything to the origin.
void project_ball(std::span<double> y, double lambda);

// Pointwise ball projections on fields.
// Complex gradient: joint modulus over both channels and real/imaginary parts.
void project_ball(Gradient2<cplx>& y, double lambda);
// Complex scalar field: projection onto the disk of radius lambda.
void project_ball(ImageSequence& y, double lambda);
// Flow gradient: one 2-vector per flow component and pixel.
void project_ball(FlowGradient& y, double lambda);

// Resolvent of the conjugate of 1/2 |. - f|^2: (y0 - sigma f) / (sigma + 1).
void resolvent_l2_fidelity(ImageSequence& y0, const ImageSequence& f, double sigma);
cplx resolvent_l2_fidelity(cplx y0, cplx f, double sigma);

// Clamp to [-lambda, lambda]: the resolvent of the conjugate of lambda |.|_1.
double prox_l1_dual(double y, double lambda);

// Everything prox_flow_data needs besides the current flow iterate. All
// fields live on the nt-1 transitions.
struct FlowDataTerm {
  RealSequence dt;         // temporal derivative of the brightness
  RealSequence gx, gy;     // spatial gradient of the brightness
  RealSequence coverage;   // c(x), number of patches over each pixel
  FlowField coupling;      // sum_p R_p^T D a_p
};

// Scalar form of the flow data prox at one pixel.
struct FlowPixel {
  double ux, uy;
};
FlowPixel prox_flow_pixel(FlowPixel u, double dt, double gx, double gy, double coverage,
                          FlowPixel coupling, double tau, double lambda3, double lambda5);

// argmin_v |v - u|^2 / (2 tau) + lambda3 |rho(v)|_1 + lambda5 sum_p |R_p v - D a_p|^2
// with rho(v) = dt + grad . v, solved pointwise by three-case thresholding.
void prox_flow_data(FlowField& u, const FlowDataTerm& term, double tau, double lambda3,
                    double lambda5);

}  // namespace mrirdlmc
