#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "subsidy_game/error.hpp"
#include "subsidy_game/model.hpp"

namespace sg {

// Coefficients of the firm's quadratic value function
// v(t, x) = k2/2 x^2 + k1 x + k0.
struct Coefficients {
  double k2 = 0.0;
  double k1 = 0.0;
  double k0 = 0.0;

  double value(double x) const noexcept { return 0.5 * k2 * x * x + k1 * x + k0; }
  double slope(double x) const noexcept { return k2 * x + k1; }

  friend bool operator==(const Coefficients&, const Coefficients&) = default;
};

inline Coefficients operator+(Coefficients a, const Coefficients& b) noexcept {
  return {a.k2 + b.k2, a.k1 + b.k1, a.k0 + b.k0};
}
inline Coefficients operator*(double c, const Coefficients& a) noexcept { return {c * a.k2, c * a.k1, c * a.k0}; }

struct SegmentSpec {
  double t_start = 0.0;
  double t_end = 0.0;
  double subsidy = 0.0;
  Coefficients terminal{};
};

struct IntegratorOptions {
  double step = 1e-3;
  double escape_bound = 1e12;
};

// Time derivative of (k2, k1, k0) under a constant subsidy s:
//   rho k2 - k2' = beta/2 (w2/beta + k2)^2
//   rho k1 - k1' = beta/2 (w1/beta + k1 + s)(w2/beta + k2)
//   rho k0 - k0' = beta/4 (w1/beta + s + k1)^2
inline Coefficients riccati_rhs(const GameParameters& params, double subsidy, const Coefficients& k) noexcept {
  const double beta = params.beta;
  const double quad = params.w2() / beta + k.k2;
  const double lin = params.w1() / beta + subsidy + k.k1;
  return {params.rho * k.k2 - 0.5 * beta * quad * quad,
          params.rho * k.k1 - 0.5 * beta * lin * quad,
          params.rho * k.k0 - 0.25 * beta * lin * lin};
}

// Number of uniform steps covering `length` with spacing at most `step`,
// rounded up to an even count so composite Simpson applies on every segment.
inline std::size_t steps_for(double length, double step) {
  auto n = static_cast<std::size_t>(std::ceil(length / step - 1e-9));
  if (n < 2) n = 2;
  if (n % 2 != 0) ++n;
  return n;
}

inline std::vector<double> uniform_grid(double t_start, double t_end, double step) {
  const std::size_t n = steps_for(t_end - t_start, step);
  const double h = (t_end - t_start) / static_cast<double>(n);
  std::vector<double> times(n + 1);
  for (std::size_t i = 0; i < n; ++i) times[i] = t_start + static_cast<double>(i) * h;
  times[n] = t_end;
  return times;
}

// Dense coefficient samples on one constant-subsidy segment. Values between
// samples come from cubic Hermite interpolation with the ODE slopes.
struct CoefficientSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double subsidy = 0.0;
  std::vector<double> times;
  std::vector<Coefficients> values;
  std::vector<Coefficients> slopes;

  const Coefficients& front() const { return values.front(); }
  const Coefficients& back() const { return values.back(); }

  Coefficients at(double t) const {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const double h = times[1] - times[0];
    auto i = static_cast<std::size_t>((t - times.front()) / h);
    if (i >= times.size() - 1) i = times.size() - 2;
    const double dt = times[i + 1] - times[i];
    const double u = (t - times[i]) / dt;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    return h00 * values[i] + (h10 * dt) * slopes[i] + h01 * values[i + 1] + (h11 * dt) * slopes[i + 1];
  }
};

// Classical RK4, integrated backward from seg.t_end to seg.t_start.
inline CoefficientSegment integrate_segment(const GameParameters& params, const SegmentSpec& seg,
                                            const IntegratorOptions& options = {}) {
  if (!(seg.t_start < seg.t_end)) throw ValidationError("segment must satisfy t_start < t_end");
  if (!(options.step > 0.0)) throw ValidationError("integrator step must be positive");
  if (!std::isfinite(seg.terminal.k2) || !std::isfinite(seg.terminal.k1) || !std::isfinite(seg.terminal.k0)) {
    throw ValidationError("terminal coefficients must be finite");
  }

  CoefficientSegment out;
  out.t_start = seg.t_start;
  out.t_end = seg.t_end;
  out.subsidy = seg.subsidy;
  out.times = uniform_grid(seg.t_start, seg.t_end, options.step);
  const std::size_t n = out.times.size() - 1;
  out.values.resize(n + 1);
  out.slopes.resize(n + 1);

  auto f = [&](const Coefficients& k) { return riccati_rhs(params, seg.subsidy, k); };
  auto escaped = [&](const Coefficients& k) {
    const double bound = options.escape_bound;
    return !(std::abs(k.k2) <= bound && std::abs(k.k1) <= bound && std::abs(k.k0) <= bound);
  };

  Coefficients k = seg.terminal;
  out.values[n] = k;
  out.slopes[n] = f(k);
  for (std::size_t i = n; i > 0; --i) {
    const double h = out.times[i - 1] - out.times[i];  // negative
    const Coefficients a = f(k);
    const Coefficients b = f(k + (0.5 * h) * a);
    const Coefficients c = f(k + (0.5 * h) * b);
    const Coefficients d = f(k + h * c);
    k = k + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d);
    if (escaped(k)) throw RiccatiEscape(out.times[i - 1], -1);
    out.values[i - 1] = k;
    out.slopes[i - 1] = f(k);
  }
  return out;
}

// A maximal time interval with constant subsidy. `date_index` is the
// decision-date index whose level is in force, -1 before the first date and
// N after the program ends.
struct SubsidyInterval {
  double t_start = 0.0;
  double t_end = 0.0;
  double subsidy = 0.0;
  int date_index = 0;
};

// Intervals {0, tau_1, ..., tau_{N+1}, T} with their subsidy levels.
inline std::vector<SubsidyInterval> subsidy_intervals(const GameParameters& params, const SubsidyProgram& program,
                                                      const SubsidySchedule& schedule) {
  const auto& dates = program.decision_dates;
  const int n = static_cast<int>(dates.size());
  std::vector<SubsidyInterval> out;
  const double first = n > 0 ? dates.front() : program.end_date;
  if (first > 0.0) out.push_back({0.0, first, program.initial_subsidy, -1});
  for (int i = 0; i < n; ++i) {
    const double end = i + 1 < n ? dates[static_cast<std::size_t>(i) + 1] : program.end_date;
    out.push_back({dates[static_cast<std::size_t>(i)], end, schedule[static_cast<std::size_t>(i)], i});
  }
  out.push_back({program.end_date, params.T, 0.0, n});
  return out;
}

// Chains segments backward from `terminal` at the end of the last interval,
// sharing endpoint values so every coefficient is continuous.
inline std::vector<CoefficientSegment> integrate_intervals(const GameParameters& params,
                                                           std::span<const SubsidyInterval> intervals,
                                                           Coefficients terminal,
                                                           const IntegratorOptions& options = {}) {
  std::vector<CoefficientSegment> segments(intervals.size());
  for (std::size_t i = intervals.size(); i > 0; --i) {
    const auto& iv = intervals[i - 1];
    try {
      segments[i - 1] = integrate_segment(params, {iv.t_start, iv.t_end, iv.subsidy, terminal}, options);
    } catch (const RiccatiEscape& e) {
      throw RiccatiEscape(e.time(), static_cast<int>(i - 1));
    }
    terminal = segments[i - 1].front();
  }
  return segments;
}

// Piecewise coefficient trajectories over [0, T].
class CoefficientPath {
 public:
  CoefficientPath() = default;
  explicit CoefficientPath(std::vector<CoefficientSegment> segments) : segments_{std::move(segments)} {}

  const std::vector<CoefficientSegment>& segments() const noexcept { return segments_; }

  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& s : segments_) out.push_back(s.t_start);
    if (!segments_.empty()) out.push_back(segments_.back().t_end);
    return out;
  }

  // Index of the segment containing t; breakpoints belong to the segment
  // that starts there.
  std::size_t segment_index(double t) const {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (t < segments_[i].t_end) return i;
    }
    return segments_.size() - 1;
  }

  Coefficients at(double t) const { return segments_[segment_index(t)].at(t); }

  Coefficients initial() const { return segments_.front().front(); }

  double firm_value(double x0) const { return initial().value(x0); }

 private:
  std::vector<CoefficientSegment> segments_;
};

inline CoefficientPath solve_coefficients(const GameParameters& params, const SubsidyProgram& program,
                                          const SubsidySchedule& schedule, const IntegratorOptions& options = {}) {
  const auto intervals = subsidy_intervals(params, program, schedule);
  return CoefficientPath(integrate_intervals(params, intervals, Coefficients{}, options));
}

}  // namespace sg
