#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "sise/error.hpp"
#include "sise/io.hpp"

using namespace sise;
namespace fs = std::filesystem;

namespace {

std::string parse_error(std::string_view text) {
  try {
    io::parse_csv(text, "data.csv");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    return e.what();
  }
  FAIL("expected a parse error");
  return {};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sise_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("observation tables") {
  const auto t = io::parse_csv("id,time,status\na,10,0\na,20,1\nb,15,0\n");
  CHECK(t.kind == io::CsvKind::kObservations);
  REQUIRE(t.records.size() == 3);
  CHECK(t.records[1].individual_id == "a");
  CHECK(t.records[1].time == 20.0);
  CHECK(t.records[1].status == 1);

  const auto in = io::prepare(t);
  REQUIRE(in.intervals.size() == 2);
  CHECK(in.intervals[0].left == 10.0);
  CHECK(in.intervals[0].right == 20.0);
  CHECK(in.intervals[1].right == kInf);
  CHECK(in.m_counts == std::vector<int>{2, 1});
}

TEST_CASE("interval tables accept inf") {
  const auto t = io::parse_csv("id,left,right\nx,0,36\ny,41,inf\n");
  CHECK(t.kind == io::CsvKind::kIntervals);
  REQUIRE(t.intervals.size() == 2);
  CHECK(t.intervals[1].interval.right == kInf);
  const auto in = io::prepare(t, 0.0, 100.0);
  CHECK(in.frame.left == 0.0);
  CHECK(in.frame.right == 100.0);
  CHECK(in.m_counts.empty());
}

TEST_CASE("malformed rows name the line") {
  CHECK(parse_error("id,time,status\nx,abc,1\n").find("data.csv:2") != std::string::npos);
  CHECK(parse_error("id,time,status\nx,1,1\nx,2,7\n").find("data.csv:3") != std::string::npos);
  CHECK(parse_error("id,time,status\nx,1\n").find(":2") != std::string::npos);
  CHECK(parse_error("id,left,right\nx,5,2\n").find(":2") != std::string::npos);
  CHECK(parse_error("id,time,status\nx,-1,0\n").find(":2") != std::string::npos);
  CHECK(parse_error("who,when\n").find(":1") != std::string::npos);
  CHECK(parse_error("").find(":1") != std::string::npos);
}

TEST_CASE("format_number round trips") {
  for (double x : {0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5}) {
    CHECK(std::stod(io::format_number(x)) == x);
  }
  CHECK(io::format_number(kInf) == "inf");
  CHECK(io::format_number(0.5) == "0.5");
}

TEST_CASE("scenario JSON is strict and round trips") {
  simbench::ScenarioConfig cfg;
  cfg.name = "x";
  cfg.prevalence = 0.25;
  cfg.mixture = simbench::MixtureComponent{65.0, 0.3};
  const auto back = io::scenario_from_json(io::to_json(cfg));
  CHECK(back.name == "x");
  CHECK(back.prevalence == 0.25);
  REQUIRE(back.mixture.has_value());
  CHECK(back.mixture->mean_onset == 65.0);
  CHECK(io::to_json(back).dump() == io::to_json(cfg).dump());

  try {
    io::scenario_from_json(io::json{{"prevalance", 0.5}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidConfig);
    CHECK(std::string(e.what()).find("prevalance") != std::string::npos);
  }
  CHECK_THROWS_AS(io::scenario_from_json(io::json{{"n_individuals", "many"}}), Error);
}

TEST_CASE("density JSON round trips") {
  npmle::GriddedDensity g;
  g.grid_start = 2.0;
  g.step = 0.5;
  g.values = {0.2, 0.6, 1.2};
  g.total_mass = 1.0;
  const auto back = io::density_from_json(io::json{{"grid", io::to_json(g)}});
  CHECK(back.values == g.values);
  CHECK(back.grid_start == 2.0);
  try {
    io::density_from_json(io::json{{"nothing", 1}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
  }
}

TEST_CASE("ArtifactWriter writes only on commit") {
  const auto dir = fresh_dir("writer");
  io::ArtifactWriter w(dir);
  w.stage("a.txt", "alpha");
  w.stage("b.txt", "beta");
  CHECK_FALSE(fs::exists(dir / "a.txt"));
  const auto names = w.commit();
  CHECK(names.size() == 2);
  CHECK(io::read_file(dir / "b.txt") == "beta");
  for (const auto& entry : fs::directory_iterator(dir)) {
    CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("missing files are parse errors") {
  CHECK_THROWS_AS(io::read_csv("/nonexistent/sise.csv"), Error);
}
