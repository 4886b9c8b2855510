#include "vrptd/ttf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vrptd {

TravelTimeFunction::TravelTimeFunction(double period_s,
                                       std::vector<Breakpoint> breakpoints)
    : period_(period_s), breakpoints_(std::move(breakpoints)) {}

TravelTimeFunction TravelTimeFunction::constant(double period_s, double value) {
  return TravelTimeFunction(period_s, {{0.0, value}});
}

double TravelTimeFunction::evaluate(double t) const {
  if (breakpoints_.empty()) {
    throw std::invalid_argument("travel-time function has no breakpoints");
  }
  if (t < 0.0) {
    throw std::invalid_argument("departure time must be non-negative");
  }
  if (breakpoints_.size() == 1) return breakpoints_.front().value;

  double m = std::fmod(t, period_);
  const auto& bp = breakpoints_;
  // Segment endpoints around m, unwrapping across the period boundary.
  double t0, v0, t1, v1;
  if (m < bp.front().t) {
    t0 = bp.back().t - period_;
    v0 = bp.back().value;
    t1 = bp.front().t;
    v1 = bp.front().value;
  } else if (m >= bp.back().t) {
    t0 = bp.back().t;
    v0 = bp.back().value;
    t1 = bp.front().t + period_;
    v1 = bp.front().value;
  } else {
    auto it = std::upper_bound(
        bp.begin(), bp.end(), m,
        [](double x, const Breakpoint& b) { return x < b.t; });
    t1 = it->t;
    v1 = it->value;
    --it;
    t0 = it->t;
    v0 = it->value;
  }
  if (t1 == t0) return v0;
  double w = (m - t0) / (t1 - t0);
  return v0 + w * (v1 - v0);
}

void TravelTimeFunction::validate(const std::string& where) const {
  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    if (!where.empty()) os << where << ": ";
    os << what;
    throw std::invalid_argument(os.str());
  };
  if (period_ <= 0.0) fail("period must be positive");
  if (breakpoints_.empty()) fail("travel-time function has no breakpoints");
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    const auto& b = breakpoints_[k];
    if (b.t < 0.0 || b.t >= period_) {
      std::ostringstream os;
      os << "breakpoint " << k << " time " << b.t << " outside [0, " << period_
         << ")";
      fail(os.str());
    }
    if (b.value <= 0.0) {
      std::ostringstream os;
      os << "breakpoint " << k << " value " << b.value << " not positive";
      fail(os.str());
    }
    if (k > 0 && breakpoints_[k - 1].t >= b.t) {
      std::ostringstream os;
      os << "breakpoint times not strictly increasing at index " << k;
      fail(os.str());
    }
  }
  // FIFO: slope >= -1 on every segment, including the wrap-around one.
  const double kSlopeTol = 1e-9;
  auto check_segment = [&](std::size_t k, double t0, double v0, double t1,
                           double v1) {
    double slope = (v1 - v0) / (t1 - t0);
    if (slope < -1.0 - kSlopeTol) {
      std::ostringstream os;
      os << "segment " << k << " (t=" << t0 << "->" << t1 << ") slope " << slope
         << " violates FIFO (< -1)";
      fail(os.str());
    }
  };
  for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
    check_segment(k, breakpoints_[k].t, breakpoints_[k].value,
                  breakpoints_[k + 1].t, breakpoints_[k + 1].value);
  }
  if (breakpoints_.size() >= 1) {
    check_segment(breakpoints_.size() - 1, breakpoints_.back().t,
                  breakpoints_.back().value, breakpoints_.front().t + period_,
                  breakpoints_.front().value);
  }
}

}  // namespace vrptd
