#pragma once

#include <iosfwd>
#include <string>

#include "planted/thresholds.hpp"
#include "planted/types.hpp"

namespace planted {

// Binary instance container, little-endian throughout:
//   "PLNT" | u32 version | u32 problem | f64 snr | f64 gamma_or_alpha
//   | i64 k | i64 n | u32 hypothesis | u64 seed | i64 rows | i64 cols
//   | f64 x[rows*cols] (row-major) | u8 has_truth | truth payload
inline constexpr std::uint32_t kInstanceVersion = 1;

void save_instance(const PlantedInstance& instance, const std::string& path);
PlantedInstance load_instance(const std::string& path);

// One row per line, entries separated by spaces, 17 significant digits.
void write_matrix_text(const Matrix& x, std::ostream& out);

// %.17g, with "nan", "inf" and "-inf" spelled out.
std::string format_real(double value);

std::string bounds_to_json(const BoundSet& bounds);

}  // namespace planted
