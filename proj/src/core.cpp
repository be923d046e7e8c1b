#include "sise/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "sise/error.hpp"

namespace sise {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kMonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::kNegativeTime: return "NegativeTime";
    case ErrorCode::kInvalidRecord: return "InvalidRecord";
    case ErrorCode::kEmptyData: return "EmptyData";
    case ErrorCode::kEmptyFrame: return "EmptyFrame";
    case ErrorCode::kNoFeasibleSupport: return "NoFeasibleSupport";
    case ErrorCode::kNegativeBandwidth: return "NegativeBandwidth";
    case ErrorCode::kTooFewBins: return "TooFewBins";
    case ErrorCode::kZeroLikelihoodObservation: return "ZeroLikelihoodObservation";
    case ErrorCode::kDegenerateDensity: return "DegenerateDensity";
    case ErrorCode::kEmptyInterval: return "EmptyInterval";
    case ErrorCode::kZeroPrevalence: return "ZeroPrevalence";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

namespace core {

TimeFrame make_time_frame(double left, double right, double support_left, double support_right) {
  if (!std::isfinite(left) || !std::isfinite(right)) {
    throw Error(ErrorCode::kInvalidArgument, "time frame bounds must be finite");
  }
  if (!(left < right)) {
    throw Error(ErrorCode::kEmptyFrame, "frame left " + std::to_string(left) +
                                            " is not below right " + std::to_string(right));
  }
  if (left < 0.0 || support_left > left || right > support_right) {
    throw Error(ErrorCode::kInvalidArgument, "frame must satisfy 0 <= c <= B^L < B^R <= C");
  }
  return TimeFrame{left, right, support_left, support_right};
}

void validate_interval(const CensoredInterval& interval) {
  if (!(interval.left >= 0.0) || !std::isfinite(interval.left)) {
    throw Error(ErrorCode::kNegativeTime, "interval left endpoint must be finite and >= 0");
  }
  if (std::isnan(interval.right) || interval.right < interval.left) {
    throw Error(ErrorCode::kInvalidArgument, "interval right endpoint below left endpoint");
  }
  if (interval.multiplicity < 1) {
    throw Error(ErrorCode::kInvalidArgument, "interval multiplicity must be positive");
  }
}

namespace {

void check_record(const ObservationRecord& r) {
  if (std::isnan(r.time) || r.time < 0.0) {
    throw Error(ErrorCode::kNegativeTime, "individual '" + r.individual_id + "' has time < 0");
  }
  if (!std::isfinite(r.time)) {
    throw Error(ErrorCode::kInvalidRecord, "individual '" + r.individual_id + "' has non-finite time");
  }
  if (r.status != 0 && r.status != 1) {
    throw Error(ErrorCode::kInvalidRecord,
                "individual '" + r.individual_id + "' has status outside {0, 1}");
  }
}

}  // namespace

std::vector<IndividualSeries> validate_records(std::span<const ObservationRecord> records) {
  std::vector<IndividualSeries> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& r : records) {
    check_record(r);
    auto [it, inserted] = index.try_emplace(r.individual_id, out.size());
    if (inserted) out.push_back(IndividualSeries{r.individual_id, {}});
    out[it->second].records.push_back(r);
  }
  for (auto& series : out) {
    auto& rs = series.records;
    std::stable_sort(rs.begin(), rs.end(),
                     [](const ObservationRecord& a, const ObservationRecord& b) { return a.time < b.time; });
    for (std::size_t j = 1; j < rs.size(); ++j) {
      const bool reverted = rs[j - 1].status == 1 && rs[j].status == 0;
      const bool tie_conflict = rs[j - 1].time == rs[j].time && rs[j - 1].status != rs[j].status;
      if (reverted || tie_conflict) {
        throw Error(ErrorCode::kMonotonicityViolation,
                    "individual '" + series.individual_id + "' reports the event at time " +
                        std::to_string(rs[j - 1].time) + " and no event at time " +
                        std::to_string(rs[j].time));
      }
    }
  }
  return out;
}

CensoredInterval summarize_observations(std::span<const ObservationRecord> series,
                                        double support_left, double support_right) {
  if (series.empty()) throw Error(ErrorCode::kEmptyData, "cannot summarize an empty series");
  double left = -kInf;
  double right = kInf;
  for (const auto& r : series) {
    check_record(r);
    left = std::max(left, r.status == 0 ? r.time : support_left);
    right = std::min(right, r.status == 1 ? r.time : support_right);
  }
  if (right < left) {
    throw Error(ErrorCode::kMonotonicityViolation, "series is not monotone in its status");
  }
  return CensoredInterval{left, right, 1};
}

std::vector<CensoredInterval> summarize_all(std::span<const ObservationRecord> records,
                                            double support_left, double support_right) {
  const auto series = validate_records(records);
  std::vector<CensoredInterval> out;
  out.reserve(series.size());
  for (const auto& s : series) {
    out.push_back(summarize_observations(s.records, support_left, support_right));
  }
  return out;
}

TimeFrame estimate_time_frame(std::span<const ObservationRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyData, "no records to estimate a time frame from");
  double lo = kInf;
  double hi = -kInf;
  for (const auto& r : records) {
    check_record(r);
    lo = std::min(lo, r.time);
    hi = std::max(hi, r.time);
  }
  return make_time_frame(lo, hi);
}

TimeFrame frame_from_intervals(std::span<const CensoredInterval> data) {
  if (data.empty()) throw Error(ErrorCode::kEmptyData, "no intervals to derive a time frame from");
  double lo = kInf;
  double hi = -kInf;
  for (const auto& iv : data) {
    validate_interval(iv);
    for (double t : {iv.left, iv.right}) {
      if (std::isfinite(t) && t > 0.0) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
    }
  }
  if (!std::isfinite(lo)) throw Error(ErrorCode::kEmptyFrame, "intervals carry no finite positive endpoint");
  return make_time_frame(lo, hi);
}

CensoredInterval close_right(const CensoredInterval& interval, double support_right) {
  CensoredInterval out = interval;
  if (out.is_right_censored()) out.right = support_right;
  return out;
}

CensoredInterval open_right(const CensoredInterval& interval, double support_right) {
  CensoredInterval out = interval;
  if (out.left < out.right && out.right == support_right) out.right = kInf;
  return out;
}

}  // namespace core
}  // namespace sise
