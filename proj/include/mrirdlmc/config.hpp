#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace mrirdlmc {

// Model weights, step sizes and iteration caps for the whole pipeline.
// Defaults reproduce the published parameter table.
struct SolverConfig {
  double lambda1 = 0.003;   // spatial TV of the image
  double lambda2 = 0.0001;  // wavelet l1
  double lambda3 = 0.001;   // brightness-constancy transport l1
  double lambda4 = 0.001;   // TV of the flow
  double lambda5 = 0.001;   // patch fit to the dictionary
  double lambda6 = 0.0001;  // l1 on the sparse codes
  double eps_outer = 0.001;
  double eps_inner = 1e-4;

  double sigma_recon = 0.05;
  double tau_recon = 0.05;
  double theta_recon = 1.0;
  double sigma_sparse = 0.99;
  double tau_sparse = 0.99;
  double sigma_flow = 0.5;
  double tau_flow = 0.25;

  int dict_atoms = 1024;
  int patch_size = 16;
  int patch_stride = 8;
  int sparsity_eps = 716;  // floor(0.7 * dict_atoms)
  int max_outer = 20;
  int max_inner = 300;
  int learn_iters = 100;
  std::uint64_t dict_seed = 1;

  // Throws ConstraintViolation when a field is out of range.
  void validate() const;
};

// Flat `key = value` text with `#` comments. Duplicate keys are malformed.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
std::map<std::string, std::string> parse_key_values(const std::string& text);

SolverConfig parse_config(const std::filesystem::path& path);
SolverConfig config_from_text(const std::string& text);

double parse_real(const std::string& key, const std::string& value);
long long parse_integer(const std::string& key, const std::string& value);

}  // namespace mrirdlmc
