#include "sise/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "CLI11.hpp"

#include "sise/bandwidth.hpp"
#include "sise/error.hpp"
#include "sise/inference.hpp"
#include "sise/io.hpp"
#include "sise/runtime.hpp"
#include "sise/simbench.hpp"
#include "sise/version.hpp"

namespace sise::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

// Input, usage and configuration problems are the caller's to fix; anything
// else failed while computing.
int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidRecord:
    case ErrorCode::kNegativeTime:
    case ErrorCode::kMonotonicityViolation:
    case ErrorCode::kEmptyData:
    case ErrorCode::kEmptyFrame:
    case ErrorCode::kNegativeBandwidth:
      return kUsage;
    default:
      return kFitFailure;
  }
}

CommandResult failure(const Error& e) { return {exit_code_for(e.code()), {}, e.what()}; }

bandwidth::FitOptions fit_options(const FitArgs& a) {
  bandwidth::FitOptions opt;
  opt.step = a.delta_t;
  opt.penalty = smoothing::parse_penalty(a.penalty);
  opt.optimizer.upper = a.max_bandwidth;
  opt.optimizer.seed = a.seed;
  opt.optimizer.global_budget = a.global_budget;
  if (!(a.delta_t > 0.0)) throw Error(ErrorCode::kInvalidArgument, "--delta-t must be positive");
  if (a.max_bandwidth && !(*a.max_bandwidth >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "--max-bandwidth must be >= 0");
  }
  bandwidth::validate(opt.optimizer);
  return opt;
}

io::FitInput load(const FitArgs& a, const bandwidth::FitOptions& opt) {
  auto in = io::prepare(io::read_csv(a.input), a.frame_left, a.frame_right);
  if (opt.penalty == smoothing::PenaltyKind::kObservationCount && in.m_counts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "penalty nm needs an observations table (id,time,status)");
  }
  return in;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string describe(const std::vector<std::string>& artifacts) {
  std::string s;
  for (const auto& a : artifacts) s += (s.empty() ? "" : ", ") + a;
  return s;
}

}  // namespace

CommandResult cmd_fit(const FitArgs& args) {
  try {
    const auto opt = fit_options(args);
    const auto in = load(args, opt);
    const auto fit = bandwidth::fit_turnbull(in.intervals, in.frame, in.m_counts, opt);
    if (!fit.estimate.converged) {
      throw Error(ErrorCode::kNoFeasibleSupport, "Turnbull EM did not converge in " +
                                                     std::to_string(fit.estimate.iterations) + " iterations");
    }
    io::ArtifactWriter out(args.output_dir);
    out.stage("raw_fit.json", dump(io::raw_fit_json(fit, opt.step)));
    out.stage("smoothed_fit.json", dump(io::smoothed_fit_json(fit, in.frame)));
    out.stage("report.json", dump(io::fit_report_json(fit)));
    out.stage("raw_curve.csv", io::curve_csv(fit.raw));
    out.stage("smoothed_curve.csv", io::curve_csv(fit.smoothed));
    CommandResult r;
    r.artifacts = out.commit();
    std::ostringstream s;
    s << "fit " << in.intervals.size() << " individuals: bandwidth " << io::format_number(fit.smoothed_report.bandwidth)
      << ", BIC_s " << io::format_number(fit.raw_report.bic_s) << " -> "
      << io::format_number(fit.smoothed_report.bic_s);
    r.summary = s.str();
    return r;
  } catch (const Error& e) {
    return failure(e);
  }
}

CommandResult cmd_simulate(const SimulateArgs& args) {
  try {
    simbench::RunOptions run;
    run.threads = static_cast<int>(resolve_threads(args.threads));
    io::ArtifactWriter out(args.output_dir);
    std::string summary;

    if (args.preset == "split") {
      if (args.input.empty() || args.onsets.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "--preset split needs --input and --onsets");
      }
      const auto table = io::read_csv(args.input);
      if (table.kind != io::CsvKind::kObservations) {
        throw Error(ErrorCode::kInvalidArgument, "--preset split needs an observations table (id,time,status)");
      }
      simbench::SplitConfig cfg;
      cfg.splits = args.splits;
      cfg.seed = args.seed.value_or(0);
      const auto report = simbench::run_split({table.records, io::read_onsets(args.onsets)}, cfg, run);
      out.stage("split.json", dump(io::to_json(report)));
      out.stage("split.csv", io::metrics_csv(report));
      summary = "split-sample evaluation, " + std::to_string(cfg.splits) + " splits";
    } else {
      std::vector<simbench::ScenarioConfig> configs;
      if (!args.preset.empty()) {
        if (!args.config.empty()) throw Error(ErrorCode::kInvalidArgument, "give a config file or --preset, not both");
        configs = simbench::preset(args.preset);
      } else if (!args.config.empty()) {
        json j;
        try {
          j = json::parse(io::read_file(args.config));
        } catch (const json::parse_error& e) {
          throw Error(ErrorCode::kParseError, args.config + ": " + e.what());
        }
        configs.push_back(io::scenario_from_json(j));
      } else {
        throw Error(ErrorCode::kInvalidArgument, "give a config file or --preset");
      }
      for (auto& cfg : configs) {
        if (args.replicates) cfg.replicates = *args.replicates;
        if (args.seed) cfg.seed = *args.seed;
        if (cfg.name.empty()) cfg.name = "scenario";
        simbench::validate(cfg);
      }
      for (const auto& cfg : configs) {
        const auto report = simbench::run_scenario(cfg, run);
        out.stage(cfg.name + ".json", dump(io::to_json(report)));
        out.stage(cfg.name + ".csv", io::metrics_csv(report));
      }
      summary = std::to_string(configs.size()) + " scenario(s) simulated";
    }
    CommandResult r;
    r.artifacts = out.commit();
    r.summary = summary + ": " + describe(r.artifacts);
    return r;
  } catch (const Error& e) {
    return failure(e);
  }
}

CommandResult cmd_impute(const ImputeArgs& args) {
  try {
    json j;
    try {
      j = json::parse(io::read_file(args.fit));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParseError, args.fit + ": " + e.what());
    }
    const auto g = io::density_from_json(j);
    const auto in = io::prepare(io::read_csv(args.input), g.grid_start, g.grid_end());
    std::string csv = "id,left,right,imputed\n";
    for (std::size_t i = 0; i < in.intervals.size(); ++i) {
      const auto& iv = in.intervals[i];
      double x = 0.0;
      try {
        x = inference::impute_event_time(iv, g);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kEmptyInterval) throw;
        throw Error(ErrorCode::kEmptyInterval, "individual '" + in.ids[i] + "': " + e.what());
      }
      csv += in.ids[i] + "," + io::format_number(iv.left) + "," + io::format_number(iv.right) + "," +
             io::format_number(x) + "\n";
    }
    io::write_atomic(args.output, csv);
    return {kOk, {args.output}, "imputed " + std::to_string(in.intervals.size()) + " event times"};
  } catch (const Error& e) {
    return failure(e);
  }
}

CommandResult cmd_bootstrap(const BootstrapArgs& args) {
  try {
    if (args.replicates < 2) throw Error(ErrorCode::kInvalidArgument, "-B must be >= 2");
    auto opt = fit_options(args.fit);
    const auto in = load(args.fit, opt);
    const auto point = bandwidth::fit_turnbull(in.intervals, in.frame, in.m_counts, opt);
    if (args.reuse_bandwidth) opt.fixed_bandwidth = point.smoothed_report.bandwidth;

    inference::BootstrapOptions bo;
    bo.replicates = args.replicates;
    bo.seed = args.fit.seed;
    bo.threads = static_cast<int>(resolve_threads(args.threads));
    const auto result = inference::bootstrap_bands(in.intervals, inference::turnbull_pipeline(in.frame, opt, in.m_counts),
                                                   point.raw, bo);
    if (10 * result.excluded > result.requested) {
      throw Error(ErrorCode::kNoFeasibleSupport, std::to_string(result.excluded) + " of " +
                                                     std::to_string(result.requested) +
                                                     " bootstrap replicates failed");
    }
    json summary = io::to_json(result);
    summary["point_bandwidth"] = point.smoothed_report.bandwidth;
    summary["reuse_bandwidth"] = args.reuse_bandwidth;
    summary["seed"] = args.fit.seed;
    io::ArtifactWriter out(args.fit.output_dir);
    out.stage("bands.csv", io::bands_csv(result));
    out.stage("summary.json", dump(summary));
    CommandResult r;
    r.artifacts = out.commit();
    r.summary = "bootstrap " + std::to_string(result.requested) + " replicates, " + std::to_string(result.excluded) +
                " excluded";
    return r;
  } catch (const Error& e) {
    return failure(e);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Smoothed NPMLE survival estimation for censored data", "sise"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: SISE_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  const auto add_fit_flags = [](CLI::App* sub, FitArgs& a) {
    sub->add_option("input", a.input, "Observations (id,time,status) or intervals (id,left,right) CSV")->required();
    sub->add_option("-o,--output", a.output_dir, "Output directory");
    sub->add_option("--penalty", a.penalty, "ln N_s variant")->check(CLI::IsMember({"n", "nm", "ne"}));
    sub->add_option("--delta-t", a.delta_t, "Grid step");
    sub->add_option("--max-bandwidth", a.max_bandwidth, "Upper bound of the bandwidth search");
    sub->add_option("--seed", a.seed, "Optimizer seed");
    sub->add_option("--global-budget", a.global_budget, "Objective calls in the global search");
    sub->add_option("--frame-left", a.frame_left, "Override B^L");
    sub->add_option("--frame-right", a.frame_right, "Override B^R");
  };

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit raw and smoothed NPMLE");
  add_fit_flags(fit_cmd, fit);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run simulation scenarios");
  sim_cmd->add_option("config", sim.config, "ScenarioConfig JSON");
  sim_cmd->add_option("--preset", sim.preset, "Built-in configuration")
      ->check(CLI::IsMember({"s1-desk", "s1-full", "s2", "s3", "split"}));
  sim_cmd->add_option("--input", sim.input, "Observations CSV for --preset split");
  sim_cmd->add_option("--onsets", sim.onsets, "id,onset CSV for --preset split");
  sim_cmd->add_option("--splits", sim.splits, "Random 50-50 splits")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--replicates", sim.replicates, "Override replicate count")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Override seed");
  sim_cmd->add_option("-o,--output", sim.output_dir, "Output directory");

  ImputeArgs imp;
  auto* imp_cmd = app.add_subcommand("impute", "Impute event times from a fitted density");
  imp_cmd->add_option("fit", imp.fit, "raw_fit.json or smoothed_fit.json")->required();
  imp_cmd->add_option("input", imp.input, "Intervals or observations CSV")->required();
  imp_cmd->add_option("-o,--output", imp.output, "Output CSV");

  BootstrapArgs boot;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Bootstrap confidence bands");
  add_fit_flags(boot_cmd, boot.fit);
  boot_cmd->add_option("-B,--replicates", boot.replicates, "Bootstrap replicates");
  boot_cmd->add_flag("--reuse-bandwidth", boot.reuse_bandwidth, "Smooth every resample at the point estimate's d*");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front()) {
      err << "run '" << sub->get_name() << " --help' for usage\n";
    }
    return kUsage;
  }

  if (threads == 0) {
    if (const char* env = std::getenv("SISE_THREADS"); env != nullptr && *env != '\0') {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        err << "error: SISE_THREADS must be an integer\n";
        return kUsage;
      }
    }
  }
  sim.threads = threads;
  boot.threads = threads;

  CommandResult result;
  try {
    if (fit_cmd->parsed()) {
      result = cmd_fit(fit);
    } else if (sim_cmd->parsed()) {
      result = cmd_simulate(sim);
    } else if (imp_cmd->parsed()) {
      result = cmd_impute(imp);
    } else {
      result = cmd_bootstrap(boot);
    }
  } catch (const fs::filesystem_error& e) {
    result = {kUsage, {}, e.what()};
  } catch (const std::exception& e) {
    result = {kFitFailure, {}, e.what()};
  }
  if (result.exit_code == kOk) {
    out << result.summary << "\n";
  } else {
    err << "error: " << result.summary << "\n";
  }
  return result.exit_code;
}

}  // namespace sise::cli
