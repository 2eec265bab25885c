#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mrirdlmc/tensor.hpp"

namespace mrirdlmc {

// Min-max normalized 16-bit samples of a 2-D tensor (complex input is
// reduced to its modulus). A constant frame maps to all zeros.
std::vector<std::uint16_t> normalize_to_u16(const Tensor& frame);

// Binary P5 PGM, maxval 65535, height = shape[0], width = shape[1].
void export_pgm(const Tensor& frame, const std::filesystem::path& path);

}  // namespace mrirdlmc
