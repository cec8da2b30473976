#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "loewner/analysis.hpp"
#include "loewner/solver.hpp"
#include "loewner/stochastic.hpp"

namespace loewner {

std::string trace_csv(const TracePath& trace);
std::string trajectory_csv(const FlowTrajectory& trajectory);
std::string curvature_csv(const std::vector<double>& times, const std::vector<double>& values);
std::string subordinator_csv(const SubordinatorPath& path);
std::string inverse_csv(const InversePath& path);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// Row-major membership bits (row 0 is the bottom row), most significant bit
/// first within each byte.
std::vector<std::uint8_t> pack_membership(const HullRaster& raster);

std::string raster_json(const HullRaster& raster);
/// Rebuilds window, resolution, membership and interval from raster_json
/// output. Unknown cells come back as outside.
HullRaster raster_from_json(const std::string& text);

std::string report_json(const CheckReport& report);
std::string reports_json(const std::vector<CheckReport>& reports);

std::string trace_svg(const TracePath& trace);
std::string raster_svg(const HullRaster& raster);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace loewner
