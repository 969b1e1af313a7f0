#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "w2lab/chain.hpp"

namespace w2lab {

// Snapshot CSV: header "k,chain_id,x_0..x_{d-1}", one row per chain.
std::string snapshot_to_csv(const EnsembleSnapshot& snap);

// Compact binary snapshot: magic "W2L1", then u32 version, u32 dim,
// u64 n_rows, u64 k, then n*d little-endian IEEE float64, row-major.
std::vector<std::byte> snapshot_to_binary(const EnsembleSnapshot& snap);
EnsembleSnapshot snapshot_from_binary(const std::vector<std::byte>& bytes);

// Writes via a temp file + rename so partial output never lands.
void atomic_write(const std::filesystem::path& path, const std::string& text);
void atomic_write(const std::filesystem::path& path,
                  const std::vector<std::byte>& bytes);

std::string read_file(const std::filesystem::path& path);

// Shortest round-trippable decimal form of a double (%.17g tier, stable).
std::string format_double(double v);

}  // namespace w2lab
