#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "otfpf/errors.hpp"
#include "otfpf/experiments.hpp"

// Run configuration file format: INI-style sections with key = value lines.
//
//   # Brownian diffusion variance study
//   [model]
//   A = 0            # d x d, rows separated by ';'
//   C = 0            # m x d
//   [init]
//   mean = 0         # optional, default zero vector
//   cov = 1          # optional, default identity
//   [run]
//   kind = monte_carlo
//   N = 80
//   R = 500
//   t_max = 1.0
//   dt = 0.001
//   seed = 42
//
// Unknown sections or keys are rejected; missing optional keys fall back to
// the documented defaults (N=80, R=500, t_max=1.0, dt=1e-3, seed=0).

namespace otfpf {

namespace detail {

struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

inline std::string strip(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t\r");
  return std::string(text.substr(begin, end - begin + 1));
}

inline std::vector<IniEntry> parse_ini(std::string_view text, const std::string& origin) {
  std::vector<IniEntry> entries;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    // '#' starts a comment; ';' is reserved as the matrix row separator
    if (const auto pos = line.find('#'); pos != std::string::npos)
      line = line.substr(0, pos);
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error(origin + ":" + std::to_string(line_no) + ": malformed section header");
      section = strip(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty())
        throw config_error(origin + ":" + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(origin + ":" + std::to_string(line_no) + ": expected key = value");
    IniEntry entry;
    entry.section = section;
    entry.key = strip(std::string_view(line).substr(0, eq));
    entry.value = strip(std::string_view(line).substr(eq + 1));
    entry.line = line_no;
    if (entry.section.empty())
      throw config_error(origin + ":" + std::to_string(line_no) + ": key outside any section");
    if (entry.key.empty())
      throw config_error(origin + ":" + std::to_string(line_no) + ": empty key");
    if (entry.value.empty())
      throw config_error(origin + ":" + std::to_string(line_no) + ": empty value for '" +
                         entry.key + "'");
    entries.push_back(std::move(entry));
  }
  return entries;
}

inline double parse_number(const std::string& text, const std::string& field) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw config_error("config field '" + field + "': cannot parse number '" + text + "'");
  return value;
}

inline std::uint64_t parse_seed(const std::string& text, const std::string& field) {
  std::uint64_t value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw config_error("config field '" + field + "': cannot parse unsigned integer '" +
                       text + "'");
  return value;
}

inline Eigen::Index parse_count(const std::string& text, const std::string& field) {
  long long value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || value < 0)
    throw config_error("config field '" + field + "': cannot parse count '" + text + "'");
  return static_cast<Eigen::Index>(value);
}

/// Rows separated by ';', entries by whitespace; e.g. "0 1; -1 -0.5".
inline Eigen::MatrixXd parse_matrix(const std::string& text, const std::string& field) {
  std::vector<std::vector<double>> rows;
  std::string row_text;
  std::istringstream row_stream(text);
  while (std::getline(row_stream, row_text, ';')) {
    std::vector<double> row;
    std::istringstream entry_stream(row_text);
    std::string token;
    while (entry_stream >> token) row.push_back(parse_number(token, field));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw config_error("config field '" + field + "': empty matrix");
  const std::size_t cols = rows.front().size();
  for (const auto& row : rows)
    if (row.size() != cols)
      throw config_error("config field '" + field + "': ragged rows");
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline Eigen::VectorXd parse_vector(const std::string& text, const std::string& field) {
  const Eigen::MatrixXd m = parse_matrix(text, field);
  if (m.rows() != 1 && m.cols() != 1)
    throw config_error("config field '" + field + "': expected a vector");
  if (m.rows() == 1) return m.row(0).transpose();
  return m.col(0);
}

}  // namespace detail

inline ExperimentConfig parse_config_text(std::string_view text,
                                          const std::string& origin = "<config>") {
  const auto entries = detail::parse_ini(text, origin);

  const std::set<std::string> known = {
      "model.A", "model.C", "init.mean", "init.cov",
      "run.kind", "run.N",  "run.R",     "run.t_max", "run.dt", "run.seed"};
  std::set<std::string> seen;
  const auto lookup = [&](const std::string& name) -> const detail::IniEntry* {
    const detail::IniEntry* found = nullptr;
    for (const auto& e : entries)
      if (e.section + "." + e.key == name) found = &e;
    return found;
  };
  for (const auto& e : entries) {
    const std::string name = e.section + "." + e.key;
    if (!known.contains(name))
      throw config_error(origin + ":" + std::to_string(e.line) + ": unknown key '" + name + "'");
    if (seen.contains(name))
      throw config_error(origin + ":" + std::to_string(e.line) + ": duplicate key '" + name + "'");
    seen.insert(name);
  }
  const auto require = [&](const std::string& name) -> const detail::IniEntry& {
    const auto* found = lookup(name);
    if (found == nullptr)
      throw config_error(origin + ": missing required field '" + name + "'");
    return *found;
  };

  const Eigen::MatrixXd a = detail::parse_matrix(require("model.A").value, "model.A");
  const Eigen::MatrixXd c = detail::parse_matrix(require("model.C").value, "model.C");
  LinearGaussianModel model(a, c);
  const Eigen::Index d = model.state_dim();

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  if (const auto* e = lookup("init.mean"))
    mean = detail::parse_vector(e->value, "init.mean");
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d);
  if (const auto* e = lookup("init.cov")) {
    cov = detail::parse_matrix(e->value, "init.cov");
    if (cov.rows() == 1 && cov.cols() == 1 && d == 1) {
      // scalar shorthand stays 1 x 1
    }
  }
  if (mean.size() != d)
    throw config_error("config field 'init.mean': expected length " + std::to_string(d));
  if (cov.rows() != d || cov.cols() != d)
    throw config_error("config field 'init.cov': expected a " + std::to_string(d) + " x " +
                       std::to_string(d) + " matrix");

  GaussianBelief init = [&] {
    try {
      return GaussianBelief(mean, SpdMatrix(cov));
    } catch (const error& e) {
      throw config_error(std::string("config field 'init.cov': ") + e.what());
    }
  }();

  ExperimentConfig cfg{std::move(model), std::move(init)};
  cfg.kind = filter_kind_from_string(require("run.kind").value);
  if (const auto* e = lookup("run.N")) cfg.particles = detail::parse_count(e->value, "run.N");
  if (const auto* e = lookup("run.R")) cfg.replications = detail::parse_count(e->value, "run.R");
  if (const auto* e = lookup("run.t_max")) cfg.t_max = detail::parse_number(e->value, "run.t_max");
  if (const auto* e = lookup("run.dt")) cfg.dt = detail::parse_number(e->value, "run.dt");
  if (const auto* e = lookup("run.seed")) cfg.seed = detail::parse_seed(e->value, "run.seed");
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

}  // namespace otfpf
