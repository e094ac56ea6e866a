#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/model.hpp>

namespace adfsmc::harness {

inline constexpr int kResultSchemaVersion = 1;

/// One row of the result CSV: one timestep (filters) or one iteration (PMMH)
/// of one run.
///
/// estimate: posterior mean (continuous) or flattened marginal tables
/// (discrete), ';'-separated. estimate_var: matching variances (continuous
/// only). mse: squared error of the mean against the true parameter,
/// averaged over coordinates. kl: summed per-cell KL(exact || estimate).
/// For PMMH rows, `updates` holds the accept flag and ess is nan.
struct ResultRow {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string algorithm;
  std::string model;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t l = 0;
  std::size_t timestep = 0;
  double ess = NAN;
  std::vector<double> state_mean;
  std::vector<double> estimate;
  std::vector<double> estimate_var;
  double mse = NAN;
  double kl = NAN;
  double log_evidence = NAN;
  double wall_ms = 0.0;
  std::uint64_t allocations = 0;
  std::size_t updates = 0;
  std::size_t distinct = 0;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return NAN;
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + s + "' in CSV");
  }
  if (used != s.size()) throw ConfigError("bad number '" + s + "' in CSV");
  return v;
}

namespace detail {

inline bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

inline bool same(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!same(a[k], b[k])) return false;
  }
  return true;
}

inline std::string join(std::span<const double> v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ';';
    out += format_double(v[k]);
  }
  return out;
}

inline std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(';', start);
    out.push_back(parse_double(s.substr(start, end - start)));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_unsigned(const std::string& s) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw ConfigError("bad integer '" + s + "' in CSV");
    return static_cast<T>(v);
  } catch (const std::logic_error&) {
    throw ConfigError("bad integer '" + s + "' in CSV");
  }
}

}  // namespace detail

inline bool operator==(const ResultRow& a, const ResultRow& b) {
  using detail::same;
  return a.run_id == b.run_id && a.seed == b.seed && a.algorithm == b.algorithm && a.model == b.model &&
         a.n == b.n && a.m == b.m && a.l == b.l && a.timestep == b.timestep && same(a.ess, b.ess) &&
         same(a.state_mean, b.state_mean) && same(a.estimate, b.estimate) &&
         same(a.estimate_var, b.estimate_var) && same(a.mse, b.mse) && same(a.kl, b.kl) &&
         same(a.log_evidence, b.log_evidence) && same(a.wall_ms, b.wall_ms) && a.allocations == b.allocations &&
         a.updates == b.updates && a.distinct == b.distinct;
}

inline const char* result_csv_header() {
  return "schema,run_id,seed,algorithm,model,N,M,L,timestep,ess,state_mean,estimate,estimate_var,mse,kl,"
         "log_evidence,wall_ms,allocations,updates,distinct";
}

inline void write_result_row(std::ostream& out, const ResultRow& r) {
  out << kResultSchemaVersion << ',' << r.run_id << ',' << r.seed << ',' << r.algorithm << ',' << r.model << ','
      << r.n << ',' << r.m << ',' << r.l << ',' << r.timestep << ',' << format_double(r.ess) << ','
      << detail::join(r.state_mean) << ',' << detail::join(r.estimate) << ',' << detail::join(r.estimate_var) << ','
      << format_double(r.mse) << ',' << format_double(r.kl) << ',' << format_double(r.log_evidence) << ','
      << format_double(r.wall_ms) << ',' << r.allocations << ',' << r.updates << ',' << r.distinct << '\n';
}

inline void write_result_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << result_csv_header() << '\n';
  for (const auto& r : rows) write_result_row(out, r);
}

inline std::vector<ResultRow> read_result_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != result_csv_header()) throw ConfigError("result CSV header mismatch");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 20) throw ConfigError("result CSV row has " + std::to_string(f.size()) + " fields, expected 20");
    if (f[0] != std::to_string(kResultSchemaVersion)) throw ConfigError("unsupported result schema " + f[0]);
    ResultRow r;
    r.run_id = f[1];
    r.seed = detail::parse_unsigned<std::uint64_t>(f[2]);
    r.algorithm = f[3];
    r.model = f[4];
    r.n = detail::parse_unsigned<std::size_t>(f[5]);
    r.m = detail::parse_unsigned<std::size_t>(f[6]);
    r.l = detail::parse_unsigned<std::size_t>(f[7]);
    r.timestep = detail::parse_unsigned<std::size_t>(f[8]);
    r.ess = parse_double(f[9]);
    r.state_mean = detail::split_doubles(f[10]);
    r.estimate = detail::split_doubles(f[11]);
    r.estimate_var = detail::split_doubles(f[12]);
    r.mse = parse_double(f[13]);
    r.kl = parse_double(f[14]);
    r.log_evidence = parse_double(f[15]);
    r.wall_ms = parse_double(f[16]);
    r.allocations = detail::parse_unsigned<std::uint64_t>(f[17]);
    r.updates = detail::parse_unsigned<std::size_t>(f[18]);
    r.distinct = detail::parse_unsigned<std::size_t>(f[19]);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Trajectory CSV: t, x0..x{d-1}, y0..y{m-1}.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << 't';
  for (std::size_t j = 0; j < traj.states.dim(); ++j) out << ",x" << j;
  for (std::size_t j = 0; j < traj.observations.dim(); ++j) out << ",y" << j;
  out << '\n';
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    out << t;
    for (double v : traj.states[t]) out << ',' << format_double(v);
    for (double v : traj.observations[t]) out << ',' << format_double(v);
    out << '\n';
  }
}

inline Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trajectory CSV is empty");
  const auto header = detail::split_fields(line);
  std::size_t d = 0, m = 0;
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k].starts_with("x")) ++d;
    else if (header[k].starts_with("y")) ++m;
    else throw ConfigError("unexpected trajectory column '" + header[k] + "'");
  }
  if (header.empty() || header[0] != "t" || d == 0 || m == 0) throw ConfigError("bad trajectory CSV header");
  Trajectory traj{Series(d), Series(m)};
  std::vector<double> x(d), y(m);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 1 + d + m) throw ConfigError("trajectory row has the wrong number of fields");
    for (std::size_t j = 0; j < d; ++j) x[j] = parse_double(f[1 + j]);
    for (std::size_t j = 0; j < m; ++j) y[j] = parse_double(f[1 + d + j]);
    traj.states.push_back(x);
    traj.observations.push_back(y);
  }
  return traj;
}

}  // namespace adfsmc::harness
