#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mrirdlmc/config.hpp"
#include "mrirdlmc/patches.hpp"
#include "mrirdlmc/tensor.hpp"

namespace mrirdlmc {

// Decoupled flow dictionary: one (Ps^2 x Nd) atom matrix per direction.
struct FlowDictionary {
  Eigen::MatrixXd dx, dy;

  std::size_t atoms() const { return static_cast<std::size_t>(dx.cols()); }
  std::size_t patch_length() const { return static_cast<std::size_t>(dx.rows()); }
};

// Per transition, an Nd x |P| coefficient matrix per direction.
struct SparseCodes {
  PatchStack ax, ay;

  static SparseCodes zeros(std::size_t atoms, std::size_t patches, std::size_t transitions);
};

// Ps^2 x Nd x 2 and Nd x |P| x (nt-1) x 2 on disk.
Tensor to_tensor(const FlowDictionary& d);
FlowDictionary dictionary_from_tensor(const Tensor& t);
Tensor to_tensor(const SparseCodes& a);
SparseCodes codes_from_tensor(const Tensor& t);

// Columns from a seeded standard normal, scaled to unit norm.
Eigen::MatrixXd random_dictionary(std::size_t patch_length, std::size_t atoms, std::uint64_t seed,
                                  std::uint64_t stream = 0);

// Column-wise projection onto {|d_j| <= 1}.
void project_columns(Eigen::MatrixXd& d);

// Keep the `keep` largest magnitudes of each column (lower index wins ties).
void hard_threshold(Eigen::Ref<Eigen::MatrixXd> a, std::size_t keep);

// Largest eigenvalue of a symmetric positive semidefinite Gram.
double spectral_norm_gram(const Eigen::MatrixXd& m);

// sum_k 1/2 |U_k - D a_k|_F^2
double learning_energy(const Eigen::MatrixXd& d, const PatchStack& a, const PatchStack& patches);

// Upper step bounds: 2 / |sum_k a_k a_k^T| and 2 / |D D^T|.
double dictionary_step_limit(const PatchStack& a);
double code_step_limit(const Eigen::MatrixXd& d);

// One projected gradient step on D. Throws StepTooLarge if tau1 >= limit.
Eigen::MatrixXd dictionary_step(const Eigen::MatrixXd& d, const PatchStack& a,
                                const PatchStack& patches, double tau1);
// One projected (hard-thresholded) gradient step on the codes of one frame.
Eigen::MatrixXd code_step(const Eigen::MatrixXd& a_k, const Eigen::MatrixXd& d,
                          const Eigen::MatrixXd& patches_k, double tau2, std::size_t sparsity);

struct DirectionLearning {
  Eigen::MatrixXd dictionary;
  PatchStack codes;
  std::vector<double> energy;  // energy[0] is the starting point
  bool degenerate = false;
  bool converged = false;
};

// Block coordinate descent for one flow direction.
DirectionLearning learn_direction(const PatchStack& patches, Eigen::MatrixXd initial,
                                  std::size_t sparsity, int max_iter, double tol = 1e-5);

struct DictionaryLearning {
  FlowDictionary dictionary;
  SparseCodes codes;
  std::vector<double> energy_x, energy_y;
  bool degenerate = false;
};

DictionaryLearning learn_dictionary(const FlowField& u_ref, const PatchGeometry& g,
                                    std::size_t atoms, std::size_t sparsity, int max_iter,
                                    std::uint64_t seed);

// lambda5 |R_p u - D a_p|^2 + lambda6 |a_p|_1 summed over patches, both
// directions and all transitions.
double sparse_objective(const FlowField& u, const FlowDictionary& d, const SparseCodes& a,
                        const PatchGeometry& g, double lambda5, double lambda6);

struct SparseCodingResult {
  SparseCodes codes;
  int iterations = 0;       // largest inner count over frames and directions
  bool step_reduced = false; // tau_sparse was lowered to keep the iteration stable
  double objective_start = 0.0;
  double objective_end = 0.0;
};

// Per-patch l1 sparse coding by a primal-dual iteration with an explicit
// gradient step on the fit term.
SparseCodingResult sparse_code(const FlowField& u, const FlowDictionary& d, const PatchGeometry& g,
                               const SolverConfig& cfg, const SparseCodes& a0);

// sum_p R_p^T D a_p
FlowField synthesize_flow(const FlowDictionary& d, const SparseCodes& a, const PatchGeometry& g);

}  // namespace mrirdlmc
