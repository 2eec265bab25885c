#include <doctest.h>

#include <string>
#include <vector>

#include "mrirdlmc/cli.hpp"
#include "mrirdlmc/tensor.hpp"
#include "support.hpp"

using namespace mrirdlmc;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mrirdlmc");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

const std::string kSpec =
    "nx=32\nny=32\nnt=3\nseed=5\nnoise_std=0.01\naccel=2\ncenter_lines=4\n"
    "shape1.cx=16\nshape1.cy=16\nshape1.ax=10\nshape1.ay=8\nshape1.intensity=0.4\n"
    "shape2.cx=14\nshape2.cy=15\nshape2.ax=4\nshape2.ay=3\nshape2.intensity=0.8\nshape2.vx=1\n";

const std::string kSmallConfig =
    "lambda4 = 0.0001\nsigma_flow = 0.0005\ntau_flow = 250\n"
    "dict_atoms = 32\npatch_size = 8\npatch_stride = 4\nsparsity_eps = 8\n"
    "learn_iters = 5\nmax_outer = 2\nmax_inner = 30\n";

struct Workspace {
  support::TempDir dir{"cli"};
  std::string path(const std::string& name) const { return (dir.path() / name).string(); }

  Workspace() {
    support::write_text(dir.path() / "spec.txt", kSpec);
    support::write_text(dir.path() / "solver.cfg", kSmallConfig);
    REQUIRE(run_cli({"phantom", "--spec", path("spec.txt"), "--out-prefix", path("p")}) == 0);
  }

  int reconstruct(const std::string& out, const std::string& cfg = "solver.cfg") const {
    return run_cli({"reconstruct", "--kspace", path("p_kspace.ndf"), "--mask", path("p_mask.ndf"),
                    "--config", path(cfg), "--out", path(out), "--report", path(out + ".csv")});
  }
};

}  // namespace

TEST_CASE("reconstruct happy path is deterministic") {
  const Workspace w;
  REQUIRE(w.reconstruct("a.ndf") == 0);
  REQUIRE(w.reconstruct("b.ndf") == 0);
  CHECK(support::slurp(w.path("a.ndf")) == support::slurp(w.path("b.ndf")));
  const auto m = read_ndf(w.path("a.ndf"));
  CHECK(m.shape() == std::vector<std::size_t>{32, 32, 3});
  CHECK(support::slurp(w.path("a.ndf.csv")).rfind("outer_iter,E_total", 0) == 0);

  CHECK(run_cli({"metrics", "--gt", w.path("p_m_gt.ndf"), "--rec", w.path("a.ndf"), "--out", w.path("q.csv")}) == 0);
  CHECK(run_cli({"export", "--in", w.path("a.ndf"), "--frame", "1", "--out", w.path("f.pgm")}) == 0);
  CHECK(support::slurp(w.path("f.pgm")).rfind("P5\n32 32\n65535\n", 0) == 0);
}

TEST_CASE("usage errors exit with 1") {
  const Workspace w;
  CHECK(run_cli({"reconstruct", "--mask", w.path("p_mask.ndf"), "--out", w.path("x.ndf")}) == 1);
  CHECK(run_cli({"no-such-command"}) == 1);
  CHECK(run_cli({"mask", "--ny", "16", "--accel", "0.5", "--out", w.path("m.ndf")}) == 1);
}

TEST_CASE("input errors exit with 2") {
  const Workspace w;
  support::write_text(w.dir.path() / "junk.ndf", "not a tensor file at all");
  CHECK(run_cli({"reconstruct", "--kspace", w.path("junk.ndf"), "--mask", w.path("p_mask.ndf"), "--out",
                 w.path("x.ndf")}) == 2);
  CHECK(run_cli({"reconstruct", "--kspace", w.path("missing.ndf"), "--mask", w.path("p_mask.ndf"), "--out",
                 w.path("x.ndf")}) == 2);
  support::write_text(w.dir.path() / "bad.cfg", "lambda9 = 1\n");
  CHECK(w.reconstruct("x.ndf", "bad.cfg") == 2);
  // Nothing partial is left behind.
  CHECK_FALSE(std::filesystem::exists(w.path("x.ndf")));
}

TEST_CASE("numerical failures exit with 3") {
  const Workspace w;
  support::write_text(w.dir.path() / "huge.cfg", kSmallConfig + "sigma_recon = 1e300\ntau_recon = 1e300\n");
  CHECK(w.reconstruct("x.ndf", "huge.cfg") == 3);
  CHECK_FALSE(std::filesystem::exists(w.path("x.ndf")));
}
