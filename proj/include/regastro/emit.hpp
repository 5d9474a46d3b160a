// File emission for experiment stores: per-run trajectories, aggregated
// progress curves, solvability profiles, and SVG charts. All output is
// byte-deterministic given the store.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "regastro/config.hpp"
#include "regastro/harness.hpp"
#include "regastro/svg.hpp"
#include "regastro/telemetry.hpp"

namespace regastro {

struct EmitFormats {
  bool csv = true;
  bool jsonl = true;
  bool svg = true;
};

inline EmitFormats parse_formats(const std::string& spec) {
  EmitFormats f{false, false, false};
  std::string token;
  std::istringstream in(spec);
  while (std::getline(in, token, ',')) {
    if (token == "csv") f.csv = true;
    else if (token == "jsonl") f.jsonl = true;
    else if (token == "svg") f.svg = true;
    else throw ConfigError("unknown format '" + token + "'");
  }
  if (!f.csv && !f.jsonl && !f.svg)
    throw ConfigError("format list selects nothing");
  return f;
}

struct EmitSummary {
  int files_written = 0;
  int svg_charts = 0;
};

namespace detail {

inline std::string run_stem(const ExperimentResult& result,
                            const RunResult& run) {
  return "run_s" + std::to_string(run.start_idx) + "_" +
         result.config.solvers[static_cast<size_t>(run.solver_idx)].name +
         "_r" + std::to_string(run.rep);
}

}  // namespace detail

// Per-solver progress curve pooling every (start, rep) pair.
inline AggregateCurve solver_progress_curve(const ExperimentResult& result,
                                            int solver_idx) {
  std::vector<std::vector<double>> pooled;
  for (const auto& per_solver : result.values)
    for (const auto& rep : per_solver[static_cast<size_t>(solver_idx)])
      pooled.push_back(rep);
  return progress_curve(pooled, result.config.budget_grid);
}

inline SolvabilityProfile solver_profile(const ExperimentResult& result,
                                         int solver_idx) {
  std::vector<std::vector<std::vector<double>>> by_start;
  for (const auto& per_solver : result.values)
    by_start.push_back(per_solver[static_cast<size_t>(solver_idx)]);
  return solvability_profile(by_start, result.references, result.start_values,
                             result.config.gap_threshold,
                             result.config.budget_grid);
}

inline EmitSummary emit_experiment(const ExperimentResult& result,
                                   const EmitFormats& formats,
                                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  EmitSummary summary;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "runs", ec);
  if (ec)
    throw std::runtime_error("cannot create output directory: " + out_dir);

  auto emit_file = [&](const fs::path& p, const std::string& content) {
    write_file(p.string(), content);
    summary.files_written += 1;
  };

  for (const auto& run : result.runs) {
    const std::string stem = detail::run_stem(result, run);
    if (formats.jsonl)
      emit_file(fs::path(out_dir) / "runs" / (stem + ".jsonl"),
                trajectory_to_jsonl(run.trajectory));
    if (formats.csv)
      emit_file(fs::path(out_dir) / "runs" / (stem + ".csv"),
                trajectory_to_csv(run.trajectory));
  }

  const int nv = static_cast<int>(result.config.solvers.size());
  std::vector<AggregateCurve> curves;
  std::vector<SolvabilityProfile> profiles;
  for (int v = 0; v < nv; ++v) {
    curves.push_back(solver_progress_curve(result, v));
    profiles.push_back(solver_profile(result, v));
  }

  if (formats.csv) {
    std::string out = "solver,budget,mean,ci_half_width\n";
    for (int v = 0; v < nv; ++v)
      for (size_t i = 0; i < curves[v].budgets.size(); ++i)
        out += result.config.solvers[static_cast<size_t>(v)].name + "," +
               std::to_string(curves[v].budgets[i]) + "," +
               detail::fmt_double(curves[v].mean[i]) + "," +
               detail::fmt_double(curves[v].ci_half_width[i]) + "\n";
    emit_file(fs::path(out_dir) / "progress.csv", out);

    out = "solver,budget,fraction_solved\n";
    for (int v = 0; v < nv; ++v)
      for (size_t i = 0; i < profiles[v].budgets.size(); ++i)
        out += result.config.solvers[static_cast<size_t>(v)].name + "," +
               std::to_string(profiles[v].budgets[i]) + "," +
               detail::fmt_double(profiles[v].fraction[i]) + "\n";
    emit_file(fs::path(out_dir) / "profile.csv", out);
  }

  if (formats.svg && !curves.empty()) {
    SvgChart chart("Mean objective vs budget", "oracle calls", "objective");
    for (int v = 0; v < nv; ++v) {
      SvgSeries s;
      s.label = result.config.solvers[static_cast<size_t>(v)].name;
      for (size_t i = 0; i < curves[v].budgets.size(); ++i)
        s.x.push_back(static_cast<double>(curves[v].budgets[i]));
      s.y = curves[v].mean;
      s.ci = curves[v].ci_half_width;
      chart.add_series(std::move(s));
    }
    emit_file(fs::path(out_dir) / "progress.svg", chart.render());
    summary.svg_charts += 1;

    SvgChart prof_chart("Fraction solved vs budget", "oracle calls",
                        "fraction within gap");
    for (int v = 0; v < nv; ++v) {
      SvgSeries s;
      s.label = result.config.solvers[static_cast<size_t>(v)].name;
      for (size_t i = 0; i < profiles[v].budgets.size(); ++i)
        s.x.push_back(static_cast<double>(profiles[v].budgets[i]));
      s.y = profiles[v].fraction;
      prof_chart.add_series(std::move(s));
    }
    emit_file(fs::path(out_dir) / "profile.svg", prof_chart.render());
    summary.svg_charts += 1;
  }

  return summary;
}

}  // namespace regastro
