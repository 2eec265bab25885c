#include "mrirdlmc/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrirdlmc/random.hpp"

namespace mrirdlmc {

using Eigen::Index;
using Eigen::MatrixXd;

SparseCodes SparseCodes::zeros(std::size_t atoms, std::size_t patches, std::size_t transitions) {
  const MatrixXd z = MatrixXd::Zero(static_cast<Index>(atoms), static_cast<Index>(patches));
  return {PatchStack(transitions, z), PatchStack(transitions, z)};
}

// ---- file layout ---------------------------------------------------------

Tensor to_tensor(const FlowDictionary& d) {
  const auto rows = d.patch_length(), cols = d.atoms();
  Tensor t(Dtype::Real64, {rows, cols, 2});
  auto& v = t.values();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      v[(r * cols + c) * 2] = d.dx(static_cast<Index>(r), static_cast<Index>(c));
      v[(r * cols + c) * 2 + 1] = d.dy(static_cast<Index>(r), static_cast<Index>(c));
    }
  return t;
}

FlowDictionary dictionary_from_tensor(const Tensor& t) {
  if (t.ndim() != 3 || t.shape()[2] != 2)
    throw Error(ErrorKind::WrongRank, "dictionary tensor must be Ps^2 x Nd x 2");
  if (t.dtype() != Dtype::Real64) throw Error(ErrorKind::UnsupportedDtype, "dictionary must be real64");
  const auto rows = t.shape()[0], cols = t.shape()[1];
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(rows))));
  if (side * side != rows) throw Error(ErrorKind::ShapeMismatch, "dictionary rows must be a square");
  FlowDictionary d{MatrixXd(static_cast<Index>(rows), static_cast<Index>(cols)),
                   MatrixXd(static_cast<Index>(rows), static_cast<Index>(cols))};
  const auto& v = t.values();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      d.dx(static_cast<Index>(r), static_cast<Index>(c)) = v[(r * cols + c) * 2];
      d.dy(static_cast<Index>(r), static_cast<Index>(c)) = v[(r * cols + c) * 2 + 1];
    }
  return d;
}

Tensor to_tensor(const SparseCodes& a) {
  if (a.ax.empty()) throw Error(ErrorKind::ShapeMismatch, "no sparse codes to write");
  const auto atoms = static_cast<std::size_t>(a.ax[0].rows());
  const auto patches = static_cast<std::size_t>(a.ax[0].cols());
  const auto frames = a.ax.size();
  Tensor t(Dtype::Real64, {atoms, patches, frames, 2});
  auto& v = t.values();
  for (std::size_t k = 0; k < atoms; ++k)
    for (std::size_t p = 0; p < patches; ++p)
      for (std::size_t f = 0; f < frames; ++f) {
        const auto idx = ((k * patches + p) * frames + f) * 2;
        v[idx] = a.ax[f](static_cast<Index>(k), static_cast<Index>(p));
        v[idx + 1] = a.ay[f](static_cast<Index>(k), static_cast<Index>(p));
      }
  return t;
}

SparseCodes codes_from_tensor(const Tensor& t) {
  if (t.ndim() != 4 || t.shape()[3] != 2)
    throw Error(ErrorKind::WrongRank, "codes tensor must be Nd x |P| x (nt-1) x 2");
  if (t.dtype() != Dtype::Real64) throw Error(ErrorKind::UnsupportedDtype, "codes must be real64");
  const auto atoms = t.shape()[0], patches = t.shape()[1], frames = t.shape()[2];
  auto a = SparseCodes::zeros(atoms, patches, frames);
  const auto& v = t.values();
  for (std::size_t k = 0; k < atoms; ++k)
    for (std::size_t p = 0; p < patches; ++p)
      for (std::size_t f = 0; f < frames; ++f) {
        const auto idx = ((k * patches + p) * frames + f) * 2;
        a.ax[f](static_cast<Index>(k), static_cast<Index>(p)) = v[idx];
        a.ay[f](static_cast<Index>(k), static_cast<Index>(p)) = v[idx + 1];
      }
  return a;
}

// ---- primitives ----------------------------------------------------------

MatrixXd random_dictionary(std::size_t patch_length, std::size_t atoms, std::uint64_t seed,
                           std::uint64_t stream) {
  Rng rng(seed, stream);
  MatrixXd d(static_cast<Index>(patch_length), static_cast<Index>(atoms));
  for (Index c = 0; c < d.cols(); ++c) {
    for (Index r = 0; r < d.rows(); ++r) d(r, c) = rng.normal();
    const double n = d.col(c).norm();
    if (n > 0.0) d.col(c) /= n;
  }
  return d;
}

void project_columns(MatrixXd& d) {
  for (Index c = 0; c < d.cols(); ++c) {
    const double n = d.col(c).norm();
    if (n > 1.0) d.col(c) /= n;
  }
}

void hard_threshold(Eigen::Ref<MatrixXd> a, std::size_t keep) {
  const auto n = static_cast<std::size_t>(a.rows());
  if (keep >= n) return;
  std::vector<Index> order(n);
  for (Index c = 0; c < a.cols(); ++c) {
    std::iota(order.begin(), order.end(), Index{0});
    auto col = a.col(c);
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                     [&](Index l, Index r) {
                       const double al = std::abs(col(l)), ar = std::abs(col(r));
                       return al != ar ? al > ar : l < r;
                     });
    for (std::size_t k = keep; k < n; ++k) col(order[k]) = 0.0;
  }
}

double spectral_norm_gram(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() <= 512) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff());
  }
  // Large Grams: power iteration with a margin, since it approaches from below.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 300; ++it) {
    Eigen::VectorXd w = m * v;
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    lambda = n;
    v = w / n;
  }
  return 1.05 * lambda;
}

namespace {

// Gram of the smaller side: |A A^T| = |A^T A|.
double squared_spectral_norm(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() <= a.cols()) return spectral_norm_gram(a * a.transpose());
  return spectral_norm_gram(a.transpose() * a);
}

MatrixXd stack_columns(const PatchStack& a) {
  if (a.empty()) return {};
  MatrixXd s(a[0].rows(), a[0].cols() * static_cast<Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) s.middleCols(static_cast<Index>(k) * a[0].cols(), a[0].cols()) = a[k];
  return s;
}

}  // namespace

double learning_energy(const MatrixXd& d, const PatchStack& a, const PatchStack& patches) {
  double e = 0.0;
  for (std::size_t k = 0; k < patches.size(); ++k) e += 0.5 * (patches[k] - d * a[k]).squaredNorm();
  return e;
}

double dictionary_step_limit(const PatchStack& a) {
  const double l = squared_spectral_norm(stack_columns(a));
  return l > 0.0 ? 2.0 / l : std::numeric_limits<double>::infinity();
}

double code_step_limit(const MatrixXd& d) {
  const double l = squared_spectral_norm(d);
  return l > 0.0 ? 2.0 / l : std::numeric_limits<double>::infinity();
}

MatrixXd dictionary_step(const MatrixXd& d, const PatchStack& a, const PatchStack& patches,
                         double tau1) {
  if (!(tau1 < dictionary_step_limit(a)))
    throw Error(ErrorKind::StepTooLarge, "dictionary step exceeds 2 / |sum a a^T|");
  MatrixXd grad = MatrixXd::Zero(d.rows(), d.cols());
  for (std::size_t k = 0; k < a.size(); ++k) grad.noalias() += (d * a[k] - patches[k]) * a[k].transpose();
  MatrixXd next = d - tau1 * grad;
  project_columns(next);
  return next;
}

MatrixXd code_step(const MatrixXd& a_k, const MatrixXd& d, const MatrixXd& patches_k, double tau2,
                   std::size_t sparsity) {
  if (!(tau2 < code_step_limit(d))) throw Error(ErrorKind::StepTooLarge, "code step exceeds 2 / |D D^T|");
  MatrixXd next = a_k - tau2 * (d.transpose() * (d * a_k - patches_k));
  hard_threshold(next, sparsity);
  return next;
}

// ---- learning ------------------------------------------------------------

DirectionLearning learn_direction(const PatchStack& patches, MatrixXd initial, std::size_t sparsity,
                                  int max_iter, double tol) {
  if (sparsity == 0 || sparsity > static_cast<std::size_t>(initial.cols()))
    throw Error(ErrorKind::ConstraintViolation, "sparsity budget must be in [1, Nd]");
  DirectionLearning r;
  r.dictionary = std::move(initial);
  project_columns(r.dictionary);
  const auto atoms = r.dictionary.cols();
  for (const auto& u : patches) r.codes.push_back(MatrixXd::Zero(atoms, u.cols()));
  r.energy.push_back(learning_energy(r.dictionary, r.codes, patches));
  if (r.energy.back() == 0.0) {
    r.degenerate = true;
    r.converged = true;
    return r;
  }

  auto frame_energy = [&](const MatrixXd& a, std::size_t k) {
    return 0.5 * (patches[k] - r.dictionary * a).squaredNorm();
  };
  for (int it = 0; it < max_iter; ++it) {
    // The dictionary block is a convex projected gradient step, so any step
    // below the bound descends.
    const double limit_d = dictionary_step_limit(r.codes);
    if (std::isfinite(limit_d)) r.dictionary = dictionary_step(r.dictionary, r.codes, patches, 0.99 * limit_d);
    // Hard thresholding only guarantees descent below 1 / L: try the long
    // step first and fall back to the short one when it overshoots.
    const double limit_a = code_step_limit(r.dictionary);
    for (std::size_t k = 0; k < patches.size(); ++k) {
      MatrixXd next = code_step(r.codes[k], r.dictionary, patches[k], 0.99 * limit_a, sparsity);
      if (frame_energy(next, k) > frame_energy(r.codes[k], k))
        next = code_step(r.codes[k], r.dictionary, patches[k], 0.495 * limit_a, sparsity);
      r.codes[k] = std::move(next);
    }

    const double prev = r.energy.back();
    r.energy.push_back(learning_energy(r.dictionary, r.codes, patches));
    if (std::abs(prev - r.energy.back()) <= tol * prev) {
      r.converged = true;
      break;
    }
  }
  return r;
}

DictionaryLearning learn_dictionary(const FlowField& u_ref, const PatchGeometry& g, std::size_t atoms,
                                    std::size_t sparsity, int max_iter, std::uint64_t seed) {
  if (!all_finite(u_ref)) throw Error(ErrorKind::NonFiniteIterate, "reference flow is not finite");
  if (atoms == 0) throw Error(ErrorKind::ConstraintViolation, "dictionary needs at least one atom");
  const auto patches = extract_patches(u_ref, g);
  auto x = learn_direction(patches.x, random_dictionary(g.patch_length(), atoms, seed, 0), sparsity, max_iter);
  auto y = learn_direction(patches.y, random_dictionary(g.patch_length(), atoms, seed, 1), sparsity, max_iter);

  DictionaryLearning out;
  out.dictionary = {std::move(x.dictionary), std::move(y.dictionary)};
  out.codes = {std::move(x.codes), std::move(y.codes)};
  out.energy_x = std::move(x.energy);
  out.energy_y = std::move(y.energy);
  out.degenerate = x.degenerate && y.degenerate;
  return out;
}

// ---- l1 sparse coding ----------------------------------------------------

double sparse_objective(const FlowField& u, const FlowDictionary& d, const SparseCodes& a,
                        const PatchGeometry& g, double lambda5, double lambda6) {
  const auto patches = extract_patches(u, g);
  double e = 0.0;
  for (std::size_t k = 0; k < patches.x.size(); ++k) {
    e += lambda5 * (patches.x[k] - d.dx * a.ax[k]).squaredNorm() + lambda6 * a.ax[k].lpNorm<1>();
    e += lambda5 * (patches.y[k] - d.dy * a.ay[k]).squaredNorm() + lambda6 * a.ay[k].lpNorm<1>();
  }
  return e;
}

namespace {

struct FrameCoding {
  MatrixXd codes;
  int iterations = 0;
};

// min_A lambda5 |B - D A|^2 + lambda6 |A|_1 column by column, all columns at
// once. Returns the iterate with the lowest objective seen.
FrameCoding code_frame(const MatrixXd& d, const MatrixXd& gram_d, const MatrixXd& b, MatrixXd a,
                       double lambda5, double lambda6, double sigma, double tau, int max_iter,
                       double tol) {
  const MatrixXd dtb = d.transpose() * b;
  auto objective_and_grad = [&](const MatrixXd& x, MatrixXd& grad) {
    const MatrixXd r = d * x - b;
    grad.noalias() = 2.0 * lambda5 * (gram_d * x - dtb);
    return lambda5 * r.squaredNorm() + lambda6 * x.lpNorm<1>();
  };

  MatrixXd y = MatrixXd::Zero(a.rows(), a.cols());
  MatrixXd abar = a, grad;
  FrameCoding best{a, 0};
  double best_obj = objective_and_grad(a, grad);
  int it = 0;
  for (; it < max_iter; ++it) {
    y = (y + sigma * abar).cwiseMax(-lambda6).cwiseMin(lambda6);
    MatrixXd next = a - tau * (y + grad);
    if (!next.allFinite()) throw Error(ErrorKind::NonFiniteIterate, "sparse coding iterate");
    const double change = (next - a).norm(), scale = a.norm();
    abar = 2.0 * next - a;
    a = std::move(next);
    const double obj = objective_and_grad(a, grad);
    if (obj < best_obj) {
      best_obj = obj;
      best.codes = a;
    }
    if (change <= tol * scale) {
      ++it;
      break;
    }
  }
  best.iterations = it;
  return best;
}

}  // namespace

SparseCodingResult sparse_code(const FlowField& u, const FlowDictionary& d, const PatchGeometry& g,
                               const SolverConfig& cfg, const SparseCodes& a0) {
  if (d.patch_length() != g.patch_length())
    throw Error(ErrorKind::GeometryMismatch, "dictionary atoms do not match the patch size");
  if (a0.ax.size() != u.nt() || a0.ay.size() != u.nt())
    throw Error(ErrorKind::ShapeMismatch, "codes must cover every transition");
  const auto patches = extract_patches(u, g);

  SparseCodingResult r;
  r.objective_start = sparse_objective(u, d, a0, g, cfg.lambda5, cfg.lambda6);
  r.codes = a0;
  const double sigma = cfg.sigma_sparse;
  auto run = [&](const MatrixXd& dict, const PatchStack& b, PatchStack& codes) {
    const MatrixXd gram = dict.transpose() * dict;
    // Explicit-gradient primal-dual needs 1/tau - sigma >= lambda5 |D^T D|.
    const double lip = cfg.lambda5 * spectral_norm_gram(gram);
    double tau = cfg.tau_sparse;
    if (1.0 / tau - sigma < lip) {
      tau = 0.99 / (sigma + lip);
      r.step_reduced = true;
    }
    for (std::size_t k = 0; k < b.size(); ++k) {
      auto fc = code_frame(dict, gram, b[k], codes[k], cfg.lambda5, cfg.lambda6, sigma, tau,
                           cfg.max_inner, cfg.eps_inner);
      codes[k] = std::move(fc.codes);
      r.iterations = std::max(r.iterations, fc.iterations);
    }
  };
  run(d.dx, patches.x, r.codes.ax);
  run(d.dy, patches.y, r.codes.ay);
  r.objective_end = sparse_objective(u, d, r.codes, g, cfg.lambda5, cfg.lambda6);
  return r;
}

FlowField synthesize_flow(const FlowDictionary& d, const SparseCodes& a, const PatchGeometry& g) {
  FlowPatches p;
  for (const auto& ak : a.ax) p.x.push_back(d.dx * ak);
  for (const auto& ak : a.ay) p.y.push_back(d.dy * ak);
  return aggregate_patches(p, g);
}

}  // namespace mrirdlmc
