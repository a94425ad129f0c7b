#pragma once

#include <filesystem>

#include <json.hpp>

#include "fasdoa/geometry.hpp"
#include "fasdoa/signal_model.hpp"

namespace fasdoa {

// {"wavelength": .., "aperture": .., "positions": [..]}, lengths in meters.
nlohmann::json geometry_to_json(const ArrayGeometry& geom);
ArrayGeometry geometry_from_json(const nlohmann::json& j);
ArrayGeometry read_geometry(const std::filesystem::path& path);
void write_geometry(const std::filesystem::path& path, const ArrayGeometry& geom);

// Writes <stem>.bin (little-endian complex64, row-major N x N_p) and
// <stem>.json with the dimensions, seed and geometry.
void write_snapshots(const std::filesystem::path& stem, const SnapshotData& data);
Eigen::MatrixXcd read_snapshot_matrix(const std::filesystem::path& stem);

}  // namespace fasdoa
