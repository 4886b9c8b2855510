#pragma once

#include <string>
#include <vector>

#include "vrptd/replay.hpp"

namespace vrptd {

struct ReportTable {
  std::string csv;
  std::string text;
};

// Comparison table across runs on the same instance: one row per variant,
// the RunMetrics columns, plus percentage decreases relative to the
// designated baseline row. Refuses runs whose instance hashes differ.
ReportTable build_report(const std::vector<RunMetrics>& runs,
                         std::size_t baseline_index);

}  // namespace vrptd
