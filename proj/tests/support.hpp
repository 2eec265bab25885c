#pragma once

// Small helpers shared by the unit tests.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <type_traits>

#include <unistd.h>

#include <doctest.h>

#include "mrirdlmc/array3.hpp"
#include "mrirdlmc/error.hpp"
#include "mrirdlmc/random.hpp"

namespace support {

using namespace mrirdlmc;

template <typename T>
Array3<T> random_array(Rng& rng, std::size_t nx, std::size_t ny, std::size_t nt) {
  Array3<T> a(nx, ny, nt);
  for (auto& v : a.data()) {
    if constexpr (std::is_same_v<T, cplx>) {
      const double re = rng.normal();
      v = cplx(re, rng.normal());
    } else {
      v = rng.normal();
    }
  }
  return a;
}

inline FlowField random_flow(Rng& rng, std::size_t nx, std::size_t ny, std::size_t nt) {
  FlowField u(nx, ny, nt);
  u.ux = random_array<double>(rng, nx, ny, nt);
  u.uy = random_array<double>(rng, nx, ny, nt);
  return u;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(std::filesystem::temp_directory_path() /
              ("mrirdlmc_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Kind of the Error thrown by f; fails the test when nothing is thrown.
inline ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::IoFailure;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace support
