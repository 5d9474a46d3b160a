// Trajectory serialization: JSONL (one record per line) and CSV with a fixed
// column order. Output is byte-deterministic given the records.
#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "regastro/solver.hpp"

namespace regastro {

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "k",         "n_k",          "n_k_s",       "n_hess_total",
      "delta_k",   "lambda_k",     "rho_k",       "accept",
      "step_norm", "g_bar_norm",   "g_bar_s_norm", "f_bar",
      "f_bar_s",   "truth_f",      "truth_g_norm", "budget_cum",
      "truncated"};
  return cols;
}

namespace detail {
// Shortest round-trip representation keeps files compact and deterministic.
inline std::string fmt_double(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}
}  // namespace detail

inline nlohmann::ordered_json record_to_json(const IterationRecord& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["n_k"] = r.n_k;
  j["n_k_s"] = r.n_k_s;
  j["n_hess_total"] = r.n_hess_total;
  j["delta_k"] = r.delta_k;
  j["lambda_k"] = r.lambda_k;
  j["rho_k"] = std::isfinite(r.rho_k) ? nlohmann::ordered_json(r.rho_k)
                                      : nlohmann::ordered_json(nullptr);
  j["accept"] = std::string(1, acceptance_code(r.accept));
  j["step_norm"] = r.step_norm;
  j["g_bar_norm"] = r.g_bar_norm;
  j["g_bar_s_norm"] = r.g_bar_s_norm;
  j["f_bar"] = r.f_bar;
  j["f_bar_s"] = r.f_bar_s;
  if (r.truth_f) j["truth_f"] = *r.truth_f; else j["truth_f"] = nullptr;
  if (r.truth_g_norm) j["truth_g_norm"] = *r.truth_g_norm;
  else j["truth_g_norm"] = nullptr;
  j["budget_cum"] = r.budget_cum;
  j["truncated"] = r.truncated;
  return j;
}

inline std::string record_to_csv_row(const IterationRecord& r) {
  using detail::fmt_double;
  std::string row;
  row += std::to_string(r.k) + ",";
  row += std::to_string(r.n_k) + ",";
  row += std::to_string(r.n_k_s) + ",";
  row += std::to_string(r.n_hess_total) + ",";
  row += fmt_double(r.delta_k) + ",";
  row += fmt_double(r.lambda_k) + ",";
  row += fmt_double(r.rho_k) + ",";
  row += std::string(1, acceptance_code(r.accept)) + ",";
  row += fmt_double(r.step_norm) + ",";
  row += fmt_double(r.g_bar_norm) + ",";
  row += fmt_double(r.g_bar_s_norm) + ",";
  row += fmt_double(r.f_bar) + ",";
  row += fmt_double(r.f_bar_s) + ",";
  row += (r.truth_f ? fmt_double(*r.truth_f) : "") + std::string(",");
  row += (r.truth_g_norm ? fmt_double(*r.truth_g_norm) : "") + std::string(",");
  row += std::to_string(r.budget_cum) + ",";
  row += r.truncated ? "1" : "0";
  return row;
}

inline std::string trajectory_to_jsonl(
    const std::vector<IterationRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  return out;
}

inline std::string trajectory_to_csv(
    const std::vector<IterationRecord>& records) {
  std::string out;
  const auto& cols = record_columns();
  for (size_t i = 0; i < cols.size(); ++i)
    out += cols[i] + (i + 1 < cols.size() ? "," : "\n");
  for (const auto& r : records) out += record_to_csv_row(r) + "\n";
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

}  // namespace regastro
