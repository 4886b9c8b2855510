#include "vrptd/report.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace vrptd {

namespace {
std::string pct(double base, double value) {
  if (base == 0.0) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", (base - value) / base * 100.0);
  return buf;
}
std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}
}  // namespace

ReportTable build_report(const std::vector<RunMetrics>& runs,
                         std::size_t baseline_index) {
  if (runs.empty()) throw std::invalid_argument("no runs to report");
  if (baseline_index >= runs.size()) {
    throw std::invalid_argument("baseline index out of range");
  }
  for (const auto& r : runs) {
    if (r.instance_hash != runs.front().instance_hash) {
      throw std::invalid_argument(
          "refusing to compare runs on different instances (hash mismatch)");
    }
  }
  const RunMetrics& base = runs[baseline_index];
  const bool deltas = runs.size() > 1;

  std::ostringstream csv;
  csv << "variant,served,rejected,total_travel_time_h,total_length_km,"
         "pathlen_avg_km,pathlen_var_km2";
  if (deltas) csv << ",travel_time_decrease_pct,length_decrease_pct";
  csv << "\n";
  for (const auto& r : runs) {
    csv << r.variant << "," << r.served << "," << r.rejected << ","
        << num(r.total_travel_time_h) << "," << num(r.total_length_km) << ","
        << num(r.pathlen_avg_km) << "," << num(r.pathlen_var_km2);
    if (deltas) {
      csv << "," << pct(base.total_travel_time_h, r.total_travel_time_h) << ","
          << pct(base.total_length_km, r.total_length_km);
    }
    csv << "\n";
  }

  std::ostringstream text;
  text << std::left << std::setw(28) << "variant" << std::right << std::setw(8)
       << "served" << std::setw(10) << "rejected" << std::setw(12) << "time(h)"
       << std::setw(12) << "len(km)" << std::setw(12) << "avg(km)"
       << std::setw(12) << "var(km2)";
  if (deltas) text << std::setw(10) << "dT%" << std::setw(10) << "dL%";
  text << "\n";
  for (const auto& r : runs) {
    text << std::left << std::setw(28) << r.variant << std::right
         << std::setw(8) << r.served << std::setw(10) << r.rejected
         << std::setw(12) << num(r.total_travel_time_h) << std::setw(12)
         << num(r.total_length_km) << std::setw(12) << num(r.pathlen_avg_km)
         << std::setw(12) << num(r.pathlen_var_km2);
    if (deltas) {
      text << std::setw(10) << pct(base.total_travel_time_h, r.total_travel_time_h)
           << std::setw(10) << pct(base.total_length_km, r.total_length_km);
    }
    text << "\n";
  }
  return {csv.str(), text.str()};
}

}  // namespace vrptd
