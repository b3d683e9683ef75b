#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drs/ladder.hpp"
#include "drs/types.hpp"

namespace drs::synthetic {

/// The sports ladder rungs, kbps.
const std::vector<double>& sports_rungs();

struct QualityLogOptions {
  std::size_t gops = 1800;
  std::vector<double> rungs = sports_rungs();
  std::vector<Resolution> resolutions = {{960, 540}, {1280, 720}, {1920, 1080}};
  double noise = 0.15;  // per-cell score jitter, quality units
  std::uint64_t seed = 0;
  std::string content_id = "synthetic";
};

/// Per-GOP scores on a 0-10 scale from resolution-dependent logistic curves
/// in log-bitrate whose position follows a slowly varying scene complexity,
/// so the best resolution at a rung changes over time.
std::vector<ladder::QualityEntry> quality_log(const QualityLogOptions& options);

}  // namespace drs::synthetic
