#include "mrirdlmc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "mrirdlmc/error.hpp"

namespace mrirdlmc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::MalformedLine, "line " + std::to_string(lineno) + ": missing '='");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(ErrorKind::MalformedLine, "line " + std::to_string(lineno) + ": empty key or value");
    if (!out.emplace(key, value).second)
      throw Error(ErrorKind::MalformedLine, "line " + std::to_string(lineno) + ": duplicate key " + key);
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

double parse_real(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw Error(ErrorKind::NonNumericValue, key + "=" + value);
  return v;
}

long long parse_integer(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    // "3.0" is numeric but not an integer; "abc" is not numeric at all.
    parse_real(key, value);
    throw Error(ErrorKind::ConstraintViolation, key + " must be an integer");
  }
  return v;
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConstraintViolation, what); };
  for (double l : {lambda1, lambda2, lambda3, lambda4, lambda5, lambda6})
    if (l < 0.0) fail("lambda weights must be nonnegative");
  if (!(eps_outer > 0.0) || !(eps_inner > 0.0)) fail("tolerances must be positive");
  for (double s : {sigma_recon, tau_recon, sigma_sparse, tau_sparse, sigma_flow, tau_flow})
    if (!(s > 0.0)) fail("step sizes must be positive");
  if (theta_recon < 0.0 || theta_recon > 1.0) fail("theta_recon must lie in [0, 1]");
  if (dict_atoms < 1 || patch_size < 1 || patch_stride < 1 || sparsity_eps < 1)
    fail("dictionary sizes must be positive");
  if (sparsity_eps > dict_atoms) fail("sparsity_eps must not exceed dict_atoms");
  if (max_outer < 0 || max_inner < 1 || learn_iters < 0) fail("iteration caps out of range");
}

SolverConfig config_from_text(const std::string& text) {
  const auto kv = parse_key_values(text);
  SolverConfig cfg;
  bool sparsity_given = false;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto real = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_real(k, v); };
  };
  auto integer = [](int& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) {
      const auto x = parse_integer(k, v);
      if (x < -1'000'000'000LL || x > 1'000'000'000LL)
        throw Error(ErrorKind::ConstraintViolation, k + " out of range");
      field = static_cast<int>(x);
    };
  };
  const std::map<std::string, Setter> setters{
      {"lambda1", real(cfg.lambda1)},
      {"lambda2", real(cfg.lambda2)},
      {"lambda3", real(cfg.lambda3)},
      {"lambda4", real(cfg.lambda4)},
      {"lambda5", real(cfg.lambda5)},
      {"lambda6", real(cfg.lambda6)},
      {"eps_outer", real(cfg.eps_outer)},
      {"eps_inner", real(cfg.eps_inner)},
      {"sigma_recon", real(cfg.sigma_recon)},
      {"tau_recon", real(cfg.tau_recon)},
      {"theta_recon", real(cfg.theta_recon)},
      {"sigma_sparse", real(cfg.sigma_sparse)},
      {"tau_sparse", real(cfg.tau_sparse)},
      {"sigma_flow", real(cfg.sigma_flow)},
      {"tau_flow", real(cfg.tau_flow)},
      {"dict_atoms", integer(cfg.dict_atoms)},
      {"patch_size", integer(cfg.patch_size)},
      {"patch_stride", integer(cfg.patch_stride)},
      {"sparsity_eps",
       [&](const std::string& k, const std::string& v) {
         integer(cfg.sparsity_eps)(k, v);
         sparsity_given = true;
       }},
      {"max_outer", integer(cfg.max_outer)},
      {"max_inner", integer(cfg.max_inner)},
      {"learn_iters", integer(cfg.learn_iters)},
      {"dict_seed",
       [&](const std::string& k, const std::string& v) {
         const auto x = parse_integer(k, v);
         if (x < 0) throw Error(ErrorKind::ConstraintViolation, "dict_seed must be nonnegative");
         cfg.dict_seed = static_cast<std::uint64_t>(x);
       }},
  };

  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorKind::UnknownKey, key);
    it->second(key, value);
  }
  // Derived defaults: budget is 70% of the atoms, stride is half a patch.
  if (!sparsity_given) cfg.sparsity_eps = std::max(1, static_cast<int>(0.7 * cfg.dict_atoms));
  if (!kv.contains("patch_stride")) cfg.patch_stride = std::max(1, cfg.patch_size / 2);
  cfg.validate();
  return cfg;
}

SolverConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str());
}

}  // namespace mrirdlmc
