#pragma once

#include <string>
#include <vector>

namespace vrptd {

// Periodic piecewise-linear arc travel time. Breakpoints live in [0, period);
// the last segment wraps around to (period, first value), which keeps the
// function continuous at the period boundary. Departing at any t >= 0
// evaluates the function at t mod period.
class TravelTimeFunction {
public:
  struct Breakpoint {
    double t = 0.0;
    double value = 0.0;
  };

  TravelTimeFunction() = default;
  TravelTimeFunction(double period_s, std::vector<Breakpoint> breakpoints);

  static TravelTimeFunction constant(double period_s, double value);

  double period() const { return period_; }
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

  // Travel time when departing at t (t >= 0, reduced modulo the period).
  double evaluate(double t) const;

  // Arrival time at the head: t + evaluate(t).
  double arrival(double t) const { return t + evaluate(t); }

  // Checks structural invariants plus the FIFO condition (every linear piece,
  // including the wrap-around one, has slope >= -1). Throws
  // std::invalid_argument with `where` prefixed to the diagnostic so loaders
  // can name the offending arc and segment.
  void validate(const std::string& where = {}) const;

private:
  double period_ = 0.0;
  std::vector<Breakpoint> breakpoints_;
};

}  // namespace vrptd
