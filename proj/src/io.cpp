#include "sise/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "sise/error.hpp"

namespace sise::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& message) {
  throw Error(ErrorCode::kParseError, source + ":" + std::to_string(line) + ": " + message);
}

double parse_double(std::string_view field, const std::string& what, bool allow_inf, const std::string& source,
                    std::size_t line) {
  if (allow_inf && (field == "inf" || field == "Inf" || field == "+inf" || field == "INF")) return kInf;
  double value = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    fail(source, line, what + " '" + std::string(field) + "' is not a number");
  }
  return value;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

// Non-blank lines with their 1-based numbers; the first one is the header.
std::vector<Line> lines_of(std::string_view text, const std::string& source) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    ++number;
    const auto line = trim(text.substr(pos, end - pos));
    if (!line.empty()) lines.push_back({number, line});
    pos = end + 1;
  }
  if (lines.empty()) fail(source, 1, "empty file (expected a header line)");
  return lines;
}

bool header_is(std::string_view header, std::initializer_list<std::string_view> names) {
  const auto cols = split(header);
  return cols.size() == names.size() && std::equal(cols.begin(), cols.end(), names.begin());
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
  const auto lines = lines_of(text, source);
  const Line& header = lines.front();
  CsvTable table;
  if (header_is(header.text, {"id", "time", "status"})) {
    table.kind = CsvKind::kObservations;
  } else if (header_is(header.text, {"id", "left", "right"})) {
    table.kind = CsvKind::kIntervals;
  } else {
    fail(source, header.number,
         "unrecognised header '" + std::string(header.text) + "' (expected 'id,time,status' or 'id,left,right')");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = lines[i].number;
    const auto f = split(lines[i].text);
    if (f.size() != 3) fail(source, line, "expected 3 fields, found " + std::to_string(f.size()));
    if (f[0].empty()) fail(source, line, "empty id");
    if (table.kind == CsvKind::kObservations) {
      const double t = parse_double(f[1], "time", false, source, line);
      if (t < 0.0) fail(source, line, "time must be >= 0");
      if (f[2] != "0" && f[2] != "1") fail(source, line, "status '" + std::string(f[2]) + "' must be 0 or 1");
      table.records.push_back({std::string(f[0]), t, f[2] == "1" ? 1 : 0});
    } else {
      core::CensoredInterval iv;
      iv.left = parse_double(f[1], "left", false, source, line);
      iv.right = parse_double(f[2], "right", true, source, line);
      try {
        core::validate_interval(iv);
      } catch (const Error& e) {
        fail(source, line, e.what());
      }
      table.intervals.push_back({std::string(f[0]), iv});
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path), path.string()); }

std::vector<std::pair<std::string, double>> read_onsets(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const std::string source = path.string();
  const auto lines = lines_of(text, source);
  if (!header_is(lines.front().text, {"id", "onset"})) {
    fail(source, lines.front().number,
         "unrecognised header '" + std::string(lines.front().text) + "' (expected 'id,onset')");
  }
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i].text);
    if (f.size() != 2) fail(source, lines[i].number, "expected 2 fields, found " + std::to_string(f.size()));
    out.emplace_back(std::string(f[0]), parse_double(f[1], "onset", false, source, lines[i].number));
  }
  return out;
}

FitInput prepare(const CsvTable& table, std::optional<double> frame_left, std::optional<double> frame_right) {
  const bool estimate = !(frame_left && frame_right);
  FitInput in;
  if (table.kind == CsvKind::kObservations) {
    if (table.records.empty()) throw Error(ErrorCode::kEmptyData, "no observation rows");
    for (const auto& s : core::validate_records(table.records)) {
      in.ids.push_back(s.individual_id);
      in.intervals.push_back(core::summarize_observations(s.records, 0.0, kInf));
      in.m_counts.push_back(static_cast<int>(s.records.size()));
    }
    if (estimate) in.frame = core::estimate_time_frame(table.records);
  } else {
    if (table.intervals.empty()) throw Error(ErrorCode::kEmptyData, "no interval rows");
    for (const auto& row : table.intervals) {
      in.ids.push_back(row.id);
      in.intervals.push_back(row.interval);
    }
    if (estimate) in.frame = core::frame_from_intervals(in.intervals);
  }
  in.frame = core::make_time_frame(frame_left.value_or(in.frame.left), frame_right.value_or(in.frame.right),
                                   in.frame.support_left, in.frame.support_right);
  return in;
}

std::string format_number(double x) {
  if (x == kInf) return "inf";
  if (x == -kInf) return "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const smoothing::FitReport& r) {
  return json{{"bandwidth", r.bandwidth},
              {"log_likelihood", number_or_null(r.log_likelihood)},
              {"turning_points", r.turning_points},
              {"penalty_weight", r.penalty_weight},
              {"bic_s", number_or_null(r.bic_s)},
              {"n_e", optional_json(r.n_e)},
              {"zero_penalty_base", r.zero_penalty_base}};
}

json to_json(const npmle::GriddedDensity& g) {
  return json{{"grid_start", g.grid_start},
              {"step", g.step},
              {"bandwidth", g.bandwidth},
              {"total_mass", g.total_mass},
              {"values", g.values}};
}

json to_json(const core::TimeFrame& f) {
  return json{{"left", f.left},
              {"right", f.right},
              {"support_left", f.support_left},
              {"support_right", number_or_null(f.support_right)}};
}

json raw_fit_json(const bandwidth::SmoothedFit& fit, double step) {
  json support = json::array();
  for (const auto& s : fit.estimate.support) support.push_back({s.left, number_or_null(s.right)});
  return json{{"support", support},
              {"masses", fit.estimate.masses},
              {"converged", fit.estimate.converged},
              {"iterations", fit.estimate.iterations},
              {"residual", fit.estimate.residual},
              {"frame", to_json(fit.estimate.frame)},
              {"delta_t", step},
              {"step_too_coarse", fit.step_too_coarse},
              {"grid", to_json(fit.raw)}};
}

json smoothed_fit_json(const bandwidth::SmoothedFit& fit, const core::TimeFrame& frame) {
  return json{{"bandwidth", fit.smoothed_report.bandwidth},
              {"frame", to_json(frame)},
              {"delta_t", fit.smoothed.step},
              {"grid", to_json(fit.smoothed)}};
}

json fit_report_json(const bandwidth::SmoothedFit& fit) {
  return json{{"raw", to_json(fit.raw_report)}, {"smoothed", to_json(fit.smoothed_report)}};
}

npmle::GriddedDensity density_from_json(const json& j) {
  try {
    const json& g = j.at("grid");
    npmle::GriddedDensity d;
    d.grid_start = g.at("grid_start").get<double>();
    d.step = g.at("step").get<double>();
    d.bandwidth = g.at("bandwidth").get<double>();
    d.total_mass = g.at("total_mass").get<double>();
    d.values = g.at("values").get<std::vector<double>>();
    npmle::check_density(d);
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("fit JSON: ") + e.what());
  }
}

json to_json(const simbench::ScenarioConfig& c) {
  json j{{"name", c.name},
         {"n_individuals", c.n_individuals},
         {"mean_onset", c.mean_onset},
         {"onset_sd", c.onset_sd},
         {"prevalence", c.prevalence},
         {"n_obs", c.n_obs},
         {"followup_length", c.followup_length},
         {"baseline_mean", c.baseline_mean},
         {"baseline_sd", c.baseline_sd},
         {"gap_sd", c.gap_sd},
         {"frame_right", c.frame_right},
         {"point_mass", c.point_mass},
         {"mixture", nullptr},
         {"penalty", std::string(smoothing::to_string(c.penalty))},
         {"replicates", c.replicates},
         {"seed", c.seed},
         {"delta_t", c.delta_t},
         {"bootstrap_replicates", c.bootstrap_replicates},
         {"global_budget", c.global_budget}};
  if (c.mixture) j["mixture"] = json{{"mean_onset", c.mixture->mean_onset}, {"weight", c.mixture->weight}};
  return j;
}

simbench::ScenarioConfig scenario_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "scenario config must be a JSON object");
  simbench::ScenarioConfig c;
  const auto bad = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::kInvalidConfig, field + ": " + why);
  };
  const auto number = [&](const json& v, const std::string& field) {
    if (!v.is_number()) bad(field, "expected a number");
    return v.get<double>();
  };
  const auto integer = [&](const json& v, const std::string& field) {
    if (!v.is_number_integer()) bad(field, "expected an integer");
    return v.get<long long>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "name") {
      if (!v.is_string()) bad(key, "expected a string");
      c.name = v.get<std::string>();
    } else if (key == "n_individuals") {
      c.n_individuals = static_cast<int>(integer(v, key));
    } else if (key == "mean_onset") {
      c.mean_onset = number(v, key);
    } else if (key == "onset_sd") {
      c.onset_sd = number(v, key);
    } else if (key == "prevalence") {
      c.prevalence = number(v, key);
    } else if (key == "n_obs") {
      c.n_obs = static_cast<int>(integer(v, key));
    } else if (key == "followup_length") {
      c.followup_length = number(v, key);
    } else if (key == "baseline_mean") {
      c.baseline_mean = number(v, key);
    } else if (key == "baseline_sd") {
      c.baseline_sd = number(v, key);
    } else if (key == "gap_sd") {
      c.gap_sd = number(v, key);
    } else if (key == "frame_right") {
      c.frame_right = number(v, key);
    } else if (key == "point_mass") {
      c.point_mass = number(v, key);
    } else if (key == "mixture") {
      if (v.is_null()) continue;
      if (!v.is_object()) bad(key, "expected an object or null");
      simbench::MixtureComponent m;
      for (const auto& [mk, mv] : v.items()) {
        if (mk == "mean_onset") {
          m.mean_onset = number(mv, "mixture.mean_onset");
        } else if (mk == "weight") {
          m.weight = number(mv, "mixture.weight");
        } else {
          bad("mixture." + mk, "unknown field");
        }
      }
      if (!v.contains("mean_onset")) bad("mixture.mean_onset", "required");
      c.mixture = m;
    } else if (key == "penalty") {
      if (!v.is_string()) bad(key, "expected \"n\", \"nm\" or \"ne\"");
      try {
        c.penalty = smoothing::parse_penalty(v.get<std::string>());
      } catch (const Error&) {
        bad(key, "expected \"n\", \"nm\" or \"ne\"");
      }
    } else if (key == "replicates") {
      c.replicates = static_cast<int>(integer(v, key));
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        bad(key, "expected a non-negative integer");
      }
      c.seed = v.get<std::uint64_t>();
    } else if (key == "delta_t") {
      c.delta_t = number(v, key);
    } else if (key == "bootstrap_replicates") {
      c.bootstrap_replicates = static_cast<int>(integer(v, key));
    } else if (key == "global_budget") {
      c.global_budget = static_cast<int>(integer(v, key));
    } else {
      bad(key, "unknown field");
    }
  }
  simbench::validate(c);
  return c;
}

json to_json(const simbench::ScenarioReport& r) {
  json methods = json::array();
  for (const auto& m : r.methods) {
    methods.push_back({{"method", m.method},
                       {"arise", optional_json(m.arise)},
                       {"armse_w", optional_json(m.armse_w)},
                       {"armse_o", optional_json(m.armse_o)},
                       {"mean_coverage", optional_json(m.mean_coverage)},
                       {"mean_coverage_analytic", optional_json(m.mean_coverage_analytic)},
                       {"mean_bandwidth", optional_json(m.mean_bandwidth)}});
  }
  json changes = json::array();
  for (const auto& c : r.changes) {
    changes.push_back({{"estimator", c.estimator},
                       {"metric", c.metric},
                       {"change_of_averages", c.of_averages},
                       {"median_change", c.median},
                       {"replicates_improved", c.replicates_improved},
                       {"replicates", c.replicates}});
  }
  json j{{"config", to_json(r.config)},
         {"methods", methods},
         {"percent_change", changes},
         {"out_of_frame_imputations", r.out_of_frame_imputations},
         {"nonconverged_fits", r.nonconverged_fits},
         {"bootstrap_excluded", r.bootstrap_excluded}};
  for (const auto& m : r.methods) {
    if (m.mean_coverage && m.method == "tb_raw") j["mean_coverage_raw"] = *m.mean_coverage;
    if (m.mean_coverage && m.method == "tb_smooth") j["mean_coverage_smoothed"] = *m.mean_coverage;
  }
  return j;
}

json to_json(const inference::BootstrapResult& r) {
  return json{{"replicates", r.requested},
              {"included", r.requested - r.excluded},
              {"excluded", r.excluded},
              {"excluded_replicates", r.excluded_replicates},
              {"failures", r.failure_messages},
              {"bandwidths", r.bandwidths}};
}

std::string curve_csv(const npmle::GriddedDensity& g) {
  const auto s = npmle::grid_to_survival(g);
  std::string out = "tau,density,survival\n";
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    // The density at an edge is that of the bin starting there (the last
    // edge repeats the last bin).
    const double f = g.values[std::min(k, g.size() - 1)];
    out += format_number(s.tau(k)) + "," + format_number(f) + "," + format_number(s.values[k]) + "\n";
  }
  return out;
}

std::string bands_csv(const inference::BootstrapResult& r) {
  std::string out = "tau,raw_lo,raw_hi,smooth_lo,smooth_hi\n";
  for (std::size_t k = 0; k < r.raw.grid.size(); ++k) {
    out += format_number(r.raw.grid[k]) + "," + format_number(r.raw.lower[k]) + "," + format_number(r.raw.upper[k]) +
           "," + format_number(r.smoothed.lower[k]) + "," + format_number(r.smoothed.upper[k]) + "\n";
  }
  return out;
}

std::string metrics_csv(const simbench::ScenarioReport& r) {
  std::string out = "replicate,method,metric,value\n";
  for (const auto& v : r.values) {
    out += std::to_string(v.replicate) + "," + v.method + "," + v.metric + "," + format_number(v.value) + "\n";
  }
  return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path directory) : directory_(std::move(directory)) {}

void ArtifactWriter::stage(const std::string& name, std::string content) {
  files_.emplace_back(name, std::move(content));
}

std::vector<std::string> ArtifactWriter::commit() {
  std::filesystem::create_directories(directory_);
  std::vector<std::filesystem::path> temps;
  try {
    for (const auto& [name, content] : files_) {
      const auto tmp = directory_ / ("." + name + ".tmp");
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      out.close();
      if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write '" + tmp.string() + "'");
      temps.push_back(tmp);
    }
  } catch (...) {
    for (const auto& t : temps) std::filesystem::remove(t);
    throw;
  }
  std::vector<std::string> written;
  for (std::size_t i = 0; i < files_.size(); ++i) {
    const auto target = directory_ / files_[i].first;
    std::filesystem::rename(temps[i], target);
    written.push_back(target.string());
  }
  files_.clear();
  return written;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  ArtifactWriter writer(dir);
  writer.stage(path.filename().string(), content);
  writer.commit();
}

}  // namespace sise::io
