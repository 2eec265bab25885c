#include "mrirdlmc/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "mrirdlmc/datagen.hpp"
#include "mrirdlmc/dictionary.hpp"
#include "mrirdlmc/flow.hpp"
#include "mrirdlmc/joint.hpp"
#include "mrirdlmc/metrics.hpp"
#include "mrirdlmc/pgm.hpp"
#include "mrirdlmc/tensor.hpp"

namespace mrirdlmc {

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInput = 2;
constexpr int kNumeric = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Write through a temporary sibling and rename, so a failed command never
// leaves a partial file behind.
void atomic_write(const fs::path& path, const std::function<void(const fs::path&)>& write) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  try {
    write(tmp);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot rename into " + path.string() + ": " + ec.message());
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

void save(const Tensor& t, const fs::path& path) {
  atomic_write(path, [&](const fs::path& p) { write_ndf(t, p); });
}

void save_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  atomic_write(path, [&](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + p.string());
    body(out);
    out.flush();
    if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + p.string());
  });
}

SolverConfig load_config(const std::string& path) {
  return path.empty() ? config_from_text("") : parse_config(path);
}

RealSequence load_mask(const std::string& path, std::size_t frames) {
  return mask_from_tensor(read_ndf(path), frames);
}

// ---- commands ------------------------------------------------------------

struct PhantomArgs {
  std::string spec, prefix;
};

void cmd_phantom(const PhantomArgs& a) {
  const auto spec = read_phantom_spec(a.spec);
  const auto ph = make_phantom(spec);
  const std::size_t budget = line_budget(spec.ny, spec.accel);
  MaskOptions mo;
  mo.nx = spec.nx;
  mo.ny = spec.ny;
  mo.frames = spec.nt;
  mo.accel = spec.accel;
  mo.center_lines = spec.center_lines > 0 ? spec.center_lines : std::max<std::size_t>(1, budget / 4);
  mo.seed = spec.seed;
  mo.shared = spec.shared_mask;
  const auto mask = make_mask(mo);
  const auto f = acquire(ph.m, mask, spec.noise_std, spec.seed);
  save(to_tensor(ph.m), a.prefix + "_m_gt.ndf");
  save(to_tensor(ph.u), a.prefix + "_u_gt.ndf");
  save(to_tensor(mask), a.prefix + "_mask.ndf");
  save(to_tensor(f), a.prefix + "_kspace.ndf");
}

struct MaskArgs {
  std::size_t nx = 0, ny = 0, frames = 1, center_lines = 8;
  double accel = 4.0, power = 2.0;
  std::uint64_t seed = 0;
  bool shared = false;
  std::string out;
};

void cmd_mask(const MaskArgs& a) {
  MaskOptions mo;
  mo.nx = a.nx > 0 ? a.nx : a.ny;
  mo.ny = a.ny;
  mo.frames = a.frames;
  mo.accel = a.accel;
  mo.center_lines = a.center_lines;
  mo.seed = a.seed;
  mo.shared = a.shared;
  mo.density_power = a.power;
  save(to_tensor(make_mask(mo)), a.out);
}

struct AcquireArgs {
  std::string image, mask, out;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

void cmd_acquire(const AcquireArgs& a) {
  const auto m = image_from_tensor(read_ndf(a.image));
  const auto mask = load_mask(a.mask, m.nt());
  save(to_tensor(acquire(m, mask, a.noise_std, a.seed)), a.out);
}

struct LearnArgs {
  std::string flow, image, kspace, mask, config, out, codes_out;
  std::optional<int> atoms, patch, stride, sparsity, iters;
  std::optional<std::uint64_t> seed;
};

void cmd_learn(const LearnArgs& a) {
  const int sources = !a.flow.empty() + !a.image.empty() + !a.kspace.empty();
  if (sources != 1) throw UsageError("learn-dict needs exactly one of --flow, --image, --kspace");
  if (!a.kspace.empty() && a.mask.empty()) throw UsageError("--kspace requires --mask");
  if (!a.flow.empty() && !a.mask.empty()) throw UsageError("--mask does not apply to --flow");

  auto cfg = load_config(a.config);
  if (a.atoms) {
    cfg.dict_atoms = *a.atoms;
    if (!a.sparsity) cfg.sparsity_eps = std::max(1, static_cast<int>(0.7 * cfg.dict_atoms));
  }
  if (a.patch) {
    cfg.patch_size = *a.patch;
    if (!a.stride) cfg.patch_stride = std::max(1, cfg.patch_size / 2);
  }
  if (a.stride) cfg.patch_stride = *a.stride;
  if (a.sparsity) cfg.sparsity_eps = *a.sparsity;
  if (a.iters) cfg.learn_iters = *a.iters;
  if (a.seed) cfg.dict_seed = *a.seed;
  cfg.validate();

  FlowField u;
  if (!a.flow.empty()) {
    u = flow_from_tensor(read_ndf(a.flow));
  } else {
    // With a mask the input is undersampled k-space: TV-L1 on its zero filling.
    const auto& path = a.kspace.empty() ? a.image : a.kspace;
    auto m = image_from_tensor(read_ndf(path));
    if (!a.mask.empty()) m = zero_filled(m, load_mask(a.mask, m.nt()));
    u = tvl1_flow(m, cfg).u;
  }
  const auto g = patch_geometry(u.nx(), u.ny(), cfg);
  const auto learnt = learn_dictionary(u, g, static_cast<std::size_t>(cfg.dict_atoms),
                                       static_cast<std::size_t>(cfg.sparsity_eps), cfg.learn_iters,
                                       cfg.dict_seed);
  if (learnt.degenerate) std::cerr << "warning: reference flow is zero; dictionary left at its initialization\n";
  save(to_tensor(learnt.dictionary), a.out);
  if (!a.codes_out.empty()) save(to_tensor(learnt.codes), a.codes_out);
  std::cout << "energy_x " << learnt.energy_x.back() << " energy_y " << learnt.energy_y.back()
            << " iterations " << learnt.energy_x.size() - 1 << "\n";
}

struct FlowArgs {
  std::string image, config, out, dict, codes;
};

void cmd_flow(const FlowArgs& a) {
  if (!a.codes.empty() && a.dict.empty()) throw UsageError("--codes requires --dict");
  const auto cfg = load_config(a.config);
  const auto m = image_from_tensor(read_ndf(a.image));
  if (m.nt() < 2) throw Error(ErrorKind::ShapeMismatch, "flow needs at least two frames");
  auto tv = tvl1_flow(m, cfg);
  FlowField u = std::move(tv.u);
  if (!a.dict.empty()) {
    const auto d = dictionary_from_tensor(read_ndf(a.dict));
    const auto g = patch_geometry(m.nx(), m.ny(), cfg);
    const auto codes = a.codes.empty()
                           ? sparse_code(u, d, g, cfg,
                                         SparseCodes::zeros(d.atoms(), g.count(), u.nt()))
                                 .codes
                           : codes_from_tensor(read_ndf(a.codes));
    const FlowPrior prior{d, codes, g};
    u = solve_flow(m, &prior, cfg, u).u;
  }
  save(to_tensor(u), a.out);
}

struct ReconArgs {
  std::string kspace, mask, config, out, dict, init = "zf", flow_out, codes_out, report;
};

void cmd_reconstruct(const ReconArgs& a) {
  const auto cfg = load_config(a.config);
  const auto f = image_from_tensor(read_ndf(a.kspace));
  const auto mask = load_mask(a.mask, f.nt());
  std::optional<FlowDictionary> dict;
  if (!a.dict.empty()) dict = dictionary_from_tensor(read_ndf(a.dict));
  const auto init = a.init == "cs" ? InitMode::CompressedSensing : InitMode::ZeroFilled;
  const auto r = joint_reconstruct(f, mask, cfg, dict ? &*dict : nullptr, init);

  save(to_tensor(r.state.m), a.out);
  if (!a.flow_out.empty()) save(to_tensor(r.state.u), a.flow_out);
  if (!a.codes_out.empty()) save(to_tensor(r.state.codes), a.codes_out);
  if (!a.report.empty()) save_text(a.report, [&](std::ostream& o) { write_report_csv(r.report, o); });
  std::cout << "stop " << to_string(r.report.stop) << " outer " << r.report.outer_iterations
            << " energy " << r.report.outer.back().energy.total() << " seconds " << r.report.seconds
            << "\n";
}

struct MetricsArgs {
  std::string gt, rec, out;
};

void cmd_metrics(const MetricsArgs& a) {
  const auto gt = image_from_tensor(read_ndf(a.gt));
  const auto rec = image_from_tensor(read_ndf(a.rec));
  const auto r = sequence_metrics(gt, rec);
  save_text(a.out, [&](std::ostream& o) { write_metrics_csv(r, o); });
  std::cout << "mean_psnr " << r.mean_psnr << " mean_ssim " << r.mean_ssim << "\n";
}

struct ExportArgs {
  std::string in, out;
  std::size_t frame = 0;
};

void cmd_export(const ExportArgs& a) {
  const auto t = read_ndf(a.in);
  const auto& s = t.shape();
  auto out_of_range = [&](std::size_t n) {
    if (a.frame >= n)
      throw Error(ErrorKind::ConstraintViolation,
                  "frame " + std::to_string(a.frame) + " out of range (" + std::to_string(n) + ")");
  };
  Tensor frame;
  if (t.ndim() == 2) {
    out_of_range(1);
    frame = t;
  } else if (t.ndim() == 3) {
    out_of_range(s[2]);
    const auto m = image_from_tensor(t);
    ImageSequence one(m.nx(), m.ny(), 1);
    std::copy(m.frame(a.frame).begin(), m.frame(a.frame).end(), one.data().begin());
    const auto full = t.dtype() == Dtype::Real64 ? to_tensor(magnitude(one)) : to_tensor(one);
    frame = Tensor(full.dtype(), {s[0], s[1]}, full.values());
  } else if (t.ndim() == 4 && s[3] == 2) {
    // Flow field: per-pixel displacement magnitude.
    out_of_range(s[2]);
    const auto u = flow_from_tensor(t);
    std::vector<double> mag(s[0] * s[1]);
    for (std::size_t i = 0; i < s[0]; ++i)
      for (std::size_t j = 0; j < s[1]; ++j)
        mag[i * s[1] + j] = std::hypot(u.ux(i, j, a.frame), u.uy(i, j, a.frame));
    frame = Tensor(Dtype::Real64, {s[0], s[1]}, std::move(mag));
  } else {
    throw Error(ErrorKind::WrongRank, "export takes a 2-D or 3-D image or a flow tensor");
  }
  atomic_write(a.out, [&](const fs::path& p) { export_pgm(frame, p); });
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonFiniteIterate:
    case ErrorKind::StepTooLarge:
    case ErrorKind::DegenerateInput:
      return kNumeric;
    default:
      return kInput;
  }
}

int thread_count(const std::optional<int>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MRIRDLMC_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw UsageError("MRIRDLMC_THREADS must be a positive integer");
    return static_cast<int>(n);
  }
  return 0;  // library default
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Joint dynamic MRI reconstruction with dictionary-learnt motion compensation",
               "mrirdlmc"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  std::optional<int> threads;
  app.add_option("--threads", threads, "Cap on internal parallelism (fallback: MRIRDLMC_THREADS)")
      ->check(CLI::PositiveNumber);

  std::function<void()> action;

  PhantomArgs pa;
  auto* phantom = app.add_subcommand("phantom", "Synthesize a phantom with its flow, mask and k-space");
  phantom->add_option("--spec", pa.spec, "Phantom spec (key=value)")->required();
  phantom->add_option("--out-prefix", pa.prefix, "Output prefix")->required();
  phantom->callback([&] { action = [&] { cmd_phantom(pa); }; });

  MaskArgs ma;
  auto* mask = app.add_subcommand("mask", "Variable-density Cartesian line mask");
  mask->add_option("--ny", ma.ny, "Phase-encode lines")->required()->check(CLI::PositiveNumber);
  mask->add_option("--nx", ma.nx, "Readout extent (default: ny)")->check(CLI::PositiveNumber);
  mask->add_option("--accel", ma.accel, "Acceleration factor")->check(CLI::Range(1.0, 1e9));
  mask->add_option("--center-lines", ma.center_lines, "Always-sampled central lines");
  mask->add_option("--seed", ma.seed, "Random seed");
  mask->add_option("--frames", ma.frames, "Frames")->check(CLI::PositiveNumber);
  mask->add_flag("--shared", ma.shared, "One mask for all frames");
  mask->add_option("--power", ma.power, "Density exponent")->check(CLI::NonNegativeNumber);
  mask->add_option("--out", ma.out, "Output NDF")->required();
  mask->callback([&] { action = [&] { cmd_mask(ma); }; });

  AcquireArgs aa;
  auto* acq = app.add_subcommand("acquire", "Simulate undersampled noisy k-space");
  acq->add_option("--image", aa.image, "Ground-truth image NDF")->required();
  acq->add_option("--mask", aa.mask, "Mask NDF")->required();
  acq->add_option("--noise-std", aa.noise_std, "Per-component noise std")->check(CLI::NonNegativeNumber);
  acq->add_option("--seed", aa.seed, "Noise seed");
  acq->add_option("--out", aa.out, "Output k-space NDF")->required();
  acq->callback([&] { action = [&] { cmd_acquire(aa); }; });

  LearnArgs la;
  auto* learn = app.add_subcommand("learn-dict", "Learn a flow dictionary");
  learn->add_option("--flow", la.flow, "Reference flow NDF");
  learn->add_option("--image", la.image, "Image sequence (k-space when --mask is given)");
  learn->add_option("--kspace", la.kspace, "Undersampled k-space NDF");
  learn->add_option("--mask", la.mask, "Mask NDF");
  learn->add_option("--config", la.config, "Solver config");
  learn->add_option("--atoms", la.atoms, "Dictionary atoms")->check(CLI::PositiveNumber);
  learn->add_option("--patch", la.patch, "Patch size")->check(CLI::PositiveNumber);
  learn->add_option("--stride", la.stride, "Patch stride")->check(CLI::PositiveNumber);
  learn->add_option("--sparsity", la.sparsity, "Nonzeros per patch")->check(CLI::PositiveNumber);
  learn->add_option("--iters", la.iters, "Learning iterations")->check(CLI::NonNegativeNumber);
  learn->add_option("--seed", la.seed, "Initialization seed");
  learn->add_option("--out", la.out, "Output dictionary NDF")->required();
  learn->add_option("--codes-out", la.codes_out, "Output codes NDF");
  learn->callback([&] { action = [&] { cmd_learn(la); }; });

  FlowArgs fa;
  auto* flow = app.add_subcommand("flow", "Optical flow of an image sequence");
  flow->add_option("--image", fa.image, "Image sequence NDF")->required();
  flow->add_option("--config", fa.config, "Solver config");
  flow->add_option("--out", fa.out, "Output flow NDF")->required();
  flow->add_option("--dict", fa.dict, "Flow dictionary NDF");
  flow->add_option("--codes", fa.codes, "Sparse codes NDF");
  flow->callback([&] { action = [&] { cmd_flow(fa); }; });

  ReconArgs ra;
  auto* recon = app.add_subcommand("reconstruct", "Joint reconstruction from undersampled k-space");
  recon->add_option("--kspace", ra.kspace, "Undersampled k-space NDF")->required();
  recon->add_option("--mask", ra.mask, "Mask NDF")->required();
  recon->add_option("--config", ra.config, "Solver config");
  recon->add_option("--out", ra.out, "Output image NDF")->required();
  recon->add_option("--dict", ra.dict, "Pretrained flow dictionary NDF");
  recon->add_option("--init", ra.init, "Initialization")->check(CLI::IsMember({"zf", "cs"}));
  recon->add_option("--flow-out", ra.flow_out, "Output flow NDF");
  recon->add_option("--codes-out", ra.codes_out, "Output codes NDF");
  recon->add_option("--report", ra.report, "Energy report CSV");
  recon->callback([&] { action = [&] { cmd_reconstruct(ra); }; });

  MetricsArgs mt;
  auto* metrics = app.add_subcommand("metrics", "Per-frame PSNR and SSIM");
  metrics->add_option("--gt", mt.gt, "Ground-truth NDF")->required();
  metrics->add_option("--rec", mt.rec, "Reconstruction NDF")->required();
  metrics->add_option("--out", mt.out, "Output CSV")->required();
  metrics->callback([&] { action = [&] { cmd_metrics(mt); }; });

  ExportArgs ea;
  auto* exp = app.add_subcommand("export", "Export one frame as a 16-bit PGM");
  exp->add_option("--in", ea.in, "Input NDF")->required();
  exp->add_option("--frame", ea.frame, "Frame index");
  exp->add_option("--out", ea.out, "Output PGM")->required();
  exp->callback([&] { action = [&] { cmd_export(ea); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const int n = thread_count(threads);
    if (n > 0) Eigen::setNbThreads(n);
    action();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kOk;
}

}  // namespace mrirdlmc
