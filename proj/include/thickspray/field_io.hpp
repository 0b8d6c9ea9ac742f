#pragma once

#include "thickspray/grid.hpp"

#include <string>
#include <vector>

namespace thickspray {

/// Writes `values` as raw little-endian float64 to dir/stem.bin plus a JSON
/// sidecar dir/stem.json with shape, grid and time metadata.
void write_field_dump(const std::string& dir, const std::string& stem, const std::string& field_name,
                      const std::vector<double>& values, const std::vector<std::size_t>& shape,
                      const PhaseGrid& grid, double time);

/// Reads back a dump written by write_field_dump; `shape` receives the stored shape.
std::vector<double> read_field_dump(const std::string& dir, const std::string& stem,
                                    std::vector<std::size_t>* shape = nullptr);

}  // namespace thickspray
