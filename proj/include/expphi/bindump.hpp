#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expphi/spectral_field.hpp"

namespace expphi {

/// Coefficient dump layout (little endian):
///   8 bytes  magic "EXPPHIC\0"
///   u32      format version (kDumpVersion)
///   u32      grid size M
///   u64      field count
///   u64      coefficients per field (M * (M/2 + 1))
///   then count * coefficients pairs of f64 (re, im), row-major half plane.
inline constexpr std::uint32_t kDumpVersion = 1;

void write_field_dump(const std::string& path, const std::vector<SpectralField>& fields);
std::vector<SpectralField> read_field_dump(const std::string& path);

}  // namespace expphi
