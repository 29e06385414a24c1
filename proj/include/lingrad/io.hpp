#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "lingrad/core.hpp"
#include "lingrad/errors.hpp"
#include "lingrad/version.hpp"

namespace lingrad {

/// 17 significant digits round-trip any double, so identical runs produce
/// byte-identical files.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct RunMetadata {
  std::string system;
  Params params;
  std::string scheme;
  std::string policy;
  double tau = 0.0;
  int steps = 0;
  double tol = 0.0;
};

namespace detail {

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace detail

/// Header t,x1..xn,V1..Vm,iters,residual; one row per stored step.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  traj.validate();
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (std::size_t j = 1; j <= traj.v_values.size(); ++j) os << ",V" << j;
  os << ",iters,residual\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << format_g17(traj.times[k]);
    for (int i = 0; i < n; ++i) os << "," << format_g17(traj.states[k][i]);
    for (const auto& row : traj.v_values) os << "," << format_g17(row[k]);
    os << "," << traj.diagnostics[k].iterations << ","
       << format_g17(traj.diagnostics[k].residual) << "\n";
  }
}

/// Same records as the CSV plus a metadata object; no timestamps, so output
/// is a pure function of the run.
inline void write_trajectory_json(std::ostream& os, const Trajectory& traj,
                                  const RunMetadata& meta) {
  traj.validate();
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  os << "{\n  \"metadata\": {\n";
  os << "    \"system\": \"" << detail::json_escape(meta.system) << "\",\n";
  os << "    \"params\": {";
  bool first = true;
  for (const auto& [key, value] : meta.params) {
    if (!first) os << ", ";
    first = false;
    os << "\"" << detail::json_escape(key) << "\": " << format_g17(value);
  }
  os << "},\n";
  os << "    \"scheme\": \"" << detail::json_escape(meta.scheme) << "\",\n";
  os << "    \"policy\": \"" << detail::json_escape(meta.policy) << "\",\n";
  os << "    \"tau\": " << format_g17(meta.tau) << ",\n";
  os << "    \"steps\": " << meta.steps << ",\n";
  os << "    \"tol\": " << format_g17(meta.tol) << ",\n";
  os << "    \"version\": \"" << kVersion << "\"\n";
  os << "  },\n  \"steps\": [\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << "    {\"t\": " << format_g17(traj.times[k]) << ", \"x\": [";
    for (int i = 0; i < n; ++i) {
      if (i) os << ", ";
      os << format_g17(traj.states[k][i]);
    }
    os << "], \"V\": [";
    for (std::size_t j = 0; j < traj.v_values.size(); ++j) {
      if (j) os << ", ";
      os << format_g17(traj.v_values[j][k]);
    }
    os << "], \"iters\": " << traj.diagnostics[k].iterations
       << ", \"residual\": " << format_g17(traj.diagnostics[k].residual)
       << "}";
    if (k + 1 < traj.states.size()) os << ",";
    os << "\n";
  }
  os << "  ]\n}\n";
}

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_output_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw InvalidArgumentError("unknown format '" + s + "' (csv or json)");
}

inline void write_trajectory_file(const std::string& path, OutputFormat fmt,
                                  const Trajectory& traj,
                                  const RunMetadata& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (fmt == OutputFormat::Csv) {
    write_trajectory_csv(out, traj);
  } else {
    write_trajectory_json(out, traj, meta);
  }
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace lingrad
