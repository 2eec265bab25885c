#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "mrirdlmc/joint.hpp"
#include "mrirdlmc/metrics.hpp"
#include "support.hpp"

using namespace mrirdlmc;

namespace {

PhantomSpec small_phantom() {
  PhantomSpec s;
  s.nx = s.ny = 32;
  s.nt = 4;
  s.shapes.push_back({16, 16, 11, 9, 0.3, 0, 0, 0, 0});
  s.shapes.push_back({13, 15, 4, 3, 0.7, 1.0, 0.5, 0, 0});
  return s;
}

SolverConfig small_config() {
  auto cfg = config_from_text(fixtures::kDeskConfig);
  cfg.dict_atoms = 32;
  cfg.sparsity_eps = 8;
  cfg.learn_iters = 10;
  cfg.max_inner = 60;
  cfg.max_outer = 3;
  return cfg;
}

RealSequence half_mask(std::size_t n, std::size_t nt) {
  MaskOptions o;
  o.nx = o.ny = n;
  o.frames = nt;
  o.accel = 2.0;
  o.center_lines = 4;
  o.seed = 3;
  return make_mask(o);
}

}  // namespace

TEST_CASE("zero outer iterations return the initialization") {
  const auto p = make_phantom(small_phantom());
  const auto mask = half_mask(32, 4);
  const auto f = acquire(p.m, mask, 0.0, 1);
  auto cfg = small_config();
  cfg.max_outer = 0;
  const auto r = joint_reconstruct(f, mask, cfg);
  CHECK(r.state.m == zero_filled(f, mask));
  CHECK(r.report.stop == StopReason::NoIterations);
  CHECK(r.report.outer_iterations == 0);
  REQUIRE(r.report.outer.size() == 1);
  CHECK(r.report.outer[0].energy.total() == doctest::Approx(total_energy(r.state, f, mask, cfg)).epsilon(1e-14));
}

TEST_CASE("fully sampled data with small weights is reproduced") {
  const auto p = make_phantom(small_phantom());
  const RealSequence full(32, 32, 4, 1.0);
  const auto f = acquire(p.m, full, 0.0, 1);
  auto cfg = small_config();
  cfg.lambda1 = cfg.lambda2 = cfg.lambda3 = 1e-7;
  cfg.lambda4 = cfg.lambda5 = cfg.lambda6 = 1e-7;
  const auto r = joint_reconstruct(f, full, cfg);
  CHECK(psnr(p.m, r.state.m) > 40.0);
}

TEST_CASE("unchanged image stops after one outer iteration") {
  const ImageSequence f(32, 32, 3);
  const RealSequence full(32, 32, 3, 1.0);
  const auto r = joint_reconstruct(f, full, small_config());
  CHECK(r.report.stop == StopReason::Converged);
  CHECK(r.report.outer_iterations == 1);
  CHECK(squared_norm(r.state.m) == 0.0);
}

TEST_CASE("block energies never rise") {
  const auto p = make_phantom(small_phantom());
  const auto mask = half_mask(32, 4);
  const auto f = acquire(p.m, mask, 0.01, 2);
  const auto r = joint_reconstruct(f, mask, small_config());
  double previous = r.report.outer[0].energy.total();
  for (const auto& b : r.report.blocks) {
    CHECK(b.energy <= previous * (1.0 + 1e-10));
    previous = b.energy;
  }
  CHECK(r.report.outer.size() == static_cast<std::size_t>(r.report.outer_iterations) + 1);
  CHECK(r.report.blocks.size() == 3 * static_cast<std::size_t>(r.report.outer_iterations));

  std::ostringstream csv;
  write_report_csv(r.report, csv);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "outer_iter,E_total,E_fidelity,E_tv_m,E_wavelet,E_transport,E_tv_u,E_sparse_fit,E_sparse_l1,seconds");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == r.report.outer_iterations + 1);
}

TEST_CASE("joint energy by hand") {
  // Two constant frames c and 2c, constant flow (0.5, 0), zero codes.
  const cplx c(0.5, 0.25);
  ImageSequence m(2, 2, 2, c);
  for (std::size_t k = 4; k < 8; ++k) m[k] = 2.0 * c;
  FlowField u(2, 2, 1);
  u.ux.fill(0.5);
  const PatchGeometry g(2, 2, 2, 2);
  const JointState s{m, u, {Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Identity(4, 4)},
                     SparseCodes::zeros(4, 1, 1), g};
  SolverConfig cfg;
  const ImageSequence f(2, 2, 2);
  const RealSequence full(2, 2, 2, 1.0);
  const auto e = total_energy_terms(s, f, full, cfg);
  const double a = std::abs(c);
  CHECK(e.fidelity == doctest::Approx(0.5 * 20.0 * a * a).epsilon(1e-14));
  CHECK(e.tv_m == 0.0);
  CHECK(e.wavelet == doctest::Approx(cfg.lambda2 * (2.0 * a + 4.0 * a)).epsilon(1e-14));
  CHECK(e.transport == doctest::Approx(cfg.lambda3 * 4.0 * a).epsilon(1e-14));
  CHECK(e.tv_u == 0.0);
  CHECK(e.sparse_fit == doctest::Approx(cfg.lambda5 * 4.0 * 0.25).epsilon(1e-14));
  CHECK(e.sparse_l1 == 0.0);
  CHECK(total_energy(s, f, full, cfg) == e.total());
}

TEST_CASE("joint input errors") {
  const ImageSequence f(32, 32, 3);
  RealSequence mask(32, 32, 3, 1.0);
  for (std::size_t k = 0; k < mask.frame_size(); ++k) mask[mask.frame_size() + k] = 0.0;
  CHECK(support::kind_of([&] { joint_reconstruct(f, mask, small_config()); }) == ErrorKind::EmptyMask);

  const RealSequence full(32, 32, 3, 1.0);
  const FlowDictionary wrong{Eigen::MatrixXd::Identity(16, 16), Eigen::MatrixXd::Identity(16, 16)};
  CHECK(support::kind_of([&] { joint_reconstruct(f, full, small_config(), &wrong); }) ==
        ErrorKind::GeometryMismatch);
  auto few = small_config();
  few.dict_atoms = 1;
  few.sparsity_eps = 1;
  CHECK(support::kind_of([&] { joint_reconstruct(f, full, few); }) == ErrorKind::GeometryMismatch);
  CHECK(support::kind_of([&] { joint_reconstruct(f, RealSequence(32, 16, 3, 1.0), small_config()); }) ==
        ErrorKind::ShapeMismatch);
}
