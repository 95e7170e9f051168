#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "otfpf/ensemble.hpp"
#include "otfpf/errors.hpp"
#include "otfpf/experiments.hpp"
#include "otfpf/rng.hpp"
#include "otfpf/version.hpp"

// Output files written next to each other in the run directory:
//   moments.csv    time,filter,estimator,rep_mean,sim_var,ref_var
//   particles.csv  time,particle,component,value           (optional)
//   manifest.json  config echo, seed, version, per-file checksums, duration
// Numbers are printed with shortest round-trip representation, so reading a
// CSV back reproduces every finite value bit-exactly. Empty cells stand for
// values that do not apply (e.g. missing reference curves).

namespace otfpf {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw io_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw io_error("parse_double: cannot parse '" + std::string(text) + "'");
  return value;
}

inline std::uint64_t fnv1a64_bytes(std::string_view bytes) {
  return seeds::fnv1a64(bytes);
}

inline std::string checksum_hex(std::uint64_t checksum) {
  std::ostringstream out;
  out << "0x" << std::hex << checksum;
  return out.str();
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open file for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw io_error("write failed: " + path.string());
}

inline std::string moments_csv_text(const ExperimentReport& report) {
  std::ostringstream out;
  out << "time,filter,estimator,rep_mean,sim_var,ref_var\n";
  const auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  for (std::size_t ti = 0; ti < report.times.size(); ++ti) {
    for (const auto& s : report.series) {
      out << format_double(report.times[ti]) << ',' << to_string(s.kind) << ','
          << s.estimator << ',' << cell(s.rep_mean[ti]) << ',' << cell(s.sim_var[ti])
          << ',' << cell(s.ref_var[ti]) << '\n';
    }
  }
  return out.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

/// Inverse of moments_csv_text; used by the round-trip tests and by plot helpers.
inline ExperimentReport read_moments_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file_bytes(path));
  std::string line;
  if (!std::getline(in, line) || line != "time,filter,estimator,rep_mean,sim_var,ref_var")
    throw io_error("read_moments_csv: unexpected header in " + path.string());

  ExperimentReport report;
  const auto value = [](const std::string& cell) {
    return cell.empty() ? kMissingValue : parse_double(cell);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) throw io_error("read_moments_csv: malformed row '" + line + "'");
    const double time = parse_double(cells[0]);
    const FilterKind kind = filter_kind_from_string(cells[1]);
    if (report.times.empty() || time != report.times.back()) {
      if (!report.times.empty() && time < report.times.back())
        throw io_error("read_moments_csv: times out of order");
      if (std::find(report.times.begin(), report.times.end(), time) == report.times.end())
        report.times.push_back(time);
    }
    EstimatorSeries* series = nullptr;
    for (auto& s : report.series)
      if (s.kind == kind && s.estimator == cells[2]) series = &s;
    if (series == nullptr) {
      report.series.push_back(EstimatorSeries{kind, cells[2], {}, {}, {}});
      series = &report.series.back();
    }
    series->rep_mean.push_back(value(cells[3]));
    series->sim_var.push_back(value(cells[4]));
    series->ref_var.push_back(value(cells[5]));
  }
  for (const auto& s : report.series)
    if (s.rep_mean.size() != report.times.size())
      throw io_error("read_moments_csv: inconsistent series lengths");
  return report;
}

inline std::string particles_csv_text(const FilterRun& run) {
  std::ostringstream out;
  out << "time,particle,component,value\n";
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const Eigen::MatrixXd& p = run.snapshots[k];
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j)
        out << format_double(run.moments[k].time) << ',' << i << ',' << j << ','
            << format_double(p(i, j)) << '\n';
  }
  return out.str();
}

struct RunManifest {
  nlohmann::ordered_json doc;
  std::filesystem::path path;
};

struct EmitOptions {
  std::string command;
  nlohmann::ordered_json config_echo;
  std::uint64_t seed = 0;
  double duration_ms = 0.0;
  const FilterRun* particles = nullptr;  // also writes particles.csv when set
};

/// Serializes the effective configuration into the manifest echo.
inline nlohmann::ordered_json config_echo(const ExperimentConfig& cfg) {
  const auto matrix_json = [](const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::ordered_json doc;
  doc["model"]["A"] = matrix_json(cfg.model.A());
  doc["model"]["C"] = matrix_json(cfg.model.C());
  nlohmann::ordered_json mean = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < cfg.init.mean.size(); ++i) mean.push_back(cfg.init.mean(i));
  doc["init"]["mean"] = std::move(mean);
  doc["init"]["cov"] = matrix_json(cfg.init.cov.matrix());
  doc["run"]["kind"] = std::string(to_string(cfg.kind));
  doc["run"]["N"] = cfg.particles;
  doc["run"]["R"] = cfg.replications;
  doc["run"]["t_max"] = cfg.t_max;
  doc["run"]["dt"] = cfg.dt;
  doc["run"]["seed"] = cfg.seed;
  return doc;
}

/// Writes moments.csv (and optionally particles.csv) plus manifest.json into
/// out_dir; the manifest lists a fnv1a64 checksum for every emitted data file.
inline RunManifest emit_report(const ExperimentReport& report,
                               const std::filesystem::path& out_dir,
                               const EmitOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw io_error("cannot create output directory: " + out_dir.string());

  nlohmann::ordered_json outputs;
  const auto emit_file = [&](const std::string& name, const std::string& bytes) {
    write_file_bytes(out_dir / name, bytes);
    outputs[name]["fnv1a64"] = checksum_hex(fnv1a64_bytes(bytes));
    outputs[name]["bytes"] = bytes.size();
  };

  emit_file("moments.csv", moments_csv_text(report));
  if (options.particles != nullptr && !options.particles->snapshots.empty())
    emit_file("particles.csv", particles_csv_text(*options.particles));

  RunManifest manifest;
  manifest.doc["artifact"] = std::string(kArtifactName);
  manifest.doc["version"] = std::string(kVersion);
  manifest.doc["command"] = options.command;
  manifest.doc["seed"] = options.seed;
  manifest.doc["config"] = options.config_echo;
  manifest.doc["outputs"] = std::move(outputs);
  manifest.doc["duration_ms"] = options.duration_ms;
  manifest.path = out_dir / "manifest.json";
  write_file_bytes(manifest.path, manifest.doc.dump(2) + "\n");
  return manifest;
}

}  // namespace otfpf
