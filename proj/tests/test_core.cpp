#include "doctest.h"

#include <vector>

#include "sise/core.hpp"
#include "sise/error.hpp"

using namespace sise;
using core::CensoredInterval;
using core::ObservationRecord;

namespace {

// Four individuals, three visits each.
std::vector<ObservationRecord> four_people() {
  return {{"A", 38, 0}, {"A", 60, 1}, {"A", 70, 1}, {"B", 41, 0}, {"B", 48, 1}, {"B", 55, 1},
          {"C", 35, 0}, {"C", 44, 0}, {"C", 62, 0}, {"D", 36, 1}, {"D", 42, 1}, {"D", 48, 1}};
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("validate_records sorts and accepts monotone series") {
  const std::vector<ObservationRecord> recs{{"a", 70, 1}, {"a", 38, 0}, {"a", 60, 1}};
  const auto series = core::validate_records(recs);
  REQUIRE(series.size() == 1);
  CHECK(series[0].records[0].time == 38);
  CHECK(series[0].records[2].time == 70);
  CHECK(core::validate_records({}).empty());
}

TEST_CASE("validate_records rejects reversals and negative times") {
  const std::vector<ObservationRecord> back{{"a", 60, 1}, {"a", 70, 0}};
  CHECK(code_of([&] { core::validate_records(back); }) == ErrorCode::kMonotonicityViolation);
  const std::vector<ObservationRecord> neg{{"a", -1, 0}};
  CHECK(code_of([&] { core::validate_records(neg); }) == ErrorCode::kNegativeTime);
}

TEST_CASE("summarize_observations reproduces the four brackets") {
  const auto recs = four_people();
  const auto iv = core::summarize_all(recs);
  REQUIRE(iv.size() == 4);
  CHECK(iv[0].left == 38);
  CHECK(iv[0].right == 60);
  CHECK(iv[1].left == 41);
  CHECK(iv[1].right == 48);
  CHECK(iv[2].left == 62);
  CHECK(iv[2].right == kInf);
  CHECK(iv[3].left == 0);
  CHECK(iv[3].right == 36);
}

TEST_CASE("summarize_observations honours a finite support") {
  const std::vector<ObservationRecord> s{{"c", 35, 0}, {"c", 62, 0}};
  const auto iv = core::summarize_observations(s, 5.0, 120.0);
  CHECK(iv.left == 62);
  CHECK(iv.right == 120);
  const std::vector<ObservationRecord> d{{"d", 36, 1}};
  CHECK(core::summarize_observations(d, 5.0, 120.0).left == 5);
}

TEST_CASE("estimate_time_frame is the min and max visit time") {
  const auto f = core::estimate_time_frame(four_people());
  CHECK(f.left == 35);
  CHECK(f.right == 70);
  CHECK(f.support_left == 0);
  CHECK(f.support_right == kInf);

  const std::vector<ObservationRecord> ends{{"a", 0.0, 0}, {"b", 100.0, 1}};
  const auto g = core::estimate_time_frame(ends);
  CHECK(g.left == 0.0);
  CHECK(g.right == 100.0);

  const std::vector<ObservationRecord> one{{"a", 50, 0}};
  CHECK(code_of([&] { core::estimate_time_frame(one); }) == ErrorCode::kEmptyFrame);
  CHECK(code_of([] { core::estimate_time_frame({}); }) == ErrorCode::kEmptyData);
}

TEST_CASE("close_right and open_right round trip") {
  for (const CensoredInterval iv : {CensoredInterval{3, kInf}, CensoredInterval{2, 9}, CensoredInterval{4, 4}}) {
    const auto closed = core::close_right(iv, 150.0);
    CHECK(closed.right != kInf);
    const auto back = core::open_right(closed, 150.0);
    CHECK(back.left == iv.left);
    CHECK(back.right == iv.right);
  }
}

TEST_CASE("validate_interval") {
  CHECK_NOTHROW(core::validate_interval({1, 1}));
  CHECK_NOTHROW(core::validate_interval({0, kInf}));
  CHECK_THROWS_AS(core::validate_interval({5, 2}), Error);
  CHECK_THROWS_AS(core::validate_interval({-1, 2}), Error);
}

TEST_CASE("summarized intervals are non-degenerate") {
  const auto iv = core::summarize_all(four_people());
  for (const auto& i : iv) CHECK(i.left < i.right);
}
