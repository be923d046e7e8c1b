#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sise {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace core {

/// One (status, time) measurement of one individual.
struct ObservationRecord {
  std::string individual_id;
  double time = 0.0;
  int status = 0;  // 1 = the event has occurred by `time`
};

/// Bracket (left, right) around an unobserved event time. `left == right`
/// encodes an exact observation; `right == +inf` a right-censored one.
struct CensoredInterval {
  double left = 0.0;
  double right = kInf;
  int multiplicity = 1;

  bool is_exact() const noexcept { return left == right; }
  bool is_right_censored() const noexcept { return right == kInf; }
  /// Finite, non-degenerate bracket (includes left-censored (c, R)).
  bool is_interval_censored() const noexcept { return left < right && right != kInf; }
};

/// Event-occurrence time frame (B^L, B^R) inside the support (c, C).
struct TimeFrame {
  double left = 0.0;
  double right = 1.0;
  double support_left = 0.0;
  double support_right = kInf;

  double width() const noexcept { return right - left; }
};

struct IndividualSeries {
  std::string individual_id;
  std::vector<ObservationRecord> records;  // sorted by time
};

/// Validates and checks a frame; throws EmptyFrame / InvalidArgument.
TimeFrame make_time_frame(double left, double right, double support_left = 0.0,
                          double support_right = kInf);

void validate_interval(const CensoredInterval& interval);

/// Groups records by individual (order of first appearance), sorts each series
/// by time and checks that the event indicator never reverts from 1 to 0.
std::vector<IndividualSeries> validate_records(std::span<const ObservationRecord> records);

/// Two-number summary of one validated series:
///   left  = max_j { T_j (1 - Z_j) + c Z_j }
///   right = min_j { T_j Z_j + C (1 - Z_j) }
CensoredInterval summarize_observations(std::span<const ObservationRecord> series,
                                        double support_left = 0.0,
                                        double support_right = kInf);

/// Convenience: validate + summarize every individual, in first-appearance order.
std::vector<CensoredInterval> summarize_all(std::span<const ObservationRecord> records,
                                            double support_left = 0.0,
                                            double support_right = kInf);

/// Observed time frame (min T, max T) over all records.
TimeFrame estimate_time_frame(std::span<const ObservationRecord> records);

/// Frame spanned by the finite, positive endpoints of a set of intervals. Used
/// when only summarized data are available.
TimeFrame frame_from_intervals(std::span<const CensoredInterval> data);

/// (L, +inf) -> (L, C). Exact and finite intervals pass through.
CensoredInterval close_right(const CensoredInterval& interval, double support_right);

/// Inverse of close_right for a known C: (L, C) -> (L, +inf).
CensoredInterval open_right(const CensoredInterval& interval, double support_right);

}  // namespace core
}  // namespace sise
