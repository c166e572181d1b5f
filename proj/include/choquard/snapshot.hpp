#pragma once

#include <map>
#include <string>

#include "choquard/grid.hpp"

namespace choq {

/// Writes <dir>/<label>.json (sidecar: dim, n, half_extent, label, params)
/// and <dir>/<label>.f64 (n^N little-endian doubles, row-major).
/// Byte-for-byte deterministic given identical inputs.
void write_field_snapshot(const std::string& dir, const std::string& label, const Field& f,
                          const std::map<std::string, double>& params = {});

/// Reads a snapshot pair written by write_field_snapshot.
Field read_field_snapshot(const std::string& dir, const std::string& label);

}  // namespace choq
