#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "skyrmion/lattice.hpp"

namespace skyrmion {

inline constexpr const char* kEngineVersion = "1.0.0";

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_string(const std::string& data);

/// Writes <dir>/manifest.txt: the given entries in order, then one
/// "file.<relative path>=<sha256>" line per file under dir (sorted, manifest
/// itself excluded).
void write_manifest(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& entries);

/// Heatmap of values on a res x res momentum grid laid out as momentum_grid
/// returns it (qy outer, both ascending). Colors come from the viridis table,
/// scaled between the map's minimum and maximum.
void write_heatmap_svg(std::ostream& os, const std::vector<Vec2>& grid, const std::vector<double>& values, int resolution,
                       const std::string& title);

}  // namespace skyrmion
