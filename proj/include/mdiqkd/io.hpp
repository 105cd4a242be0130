#pragma once

// Run configuration, flat key=value config files, and CSV/JSON emission of
// scan records. Output files are written atomically (temp file + rename) so
// a failed run never leaves a partial file behind.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mdiqkd/key_rate.hpp"
#include "mdiqkd/types.hpp"

namespace mdiqkd {

enum class OutputFormat { csv, json };

// Fixed signal intensity and reference values for the standard channel
// (eta_a = eta_b = 0.1) that the table1 command compares against.
inline constexpr double table1_signal = 0.36;
inline constexpr double table1_reference_y11_z = 4.1967e-3;
inline constexpr double table1_reference_e11_x = 2.7241e-2;
inline constexpr double table1_reference_rate = 1.3548e-4;

struct RunConfig {
  ChannelParams channel;  // defaults are the standard parameter set
  ScanGrid grid;
  double n_alpha = 5.0;
  std::vector<double> sample_sizes;  // empty = asymptotic only
  std::vector<double> etas = {0.5, 0.2, 0.1, 0.05, 0.02};
  std::vector<Method> methods = {Method::vacuum_weak, Method::infinite};
  OutputFormat format = OutputFormat::csv;
  std::string out_path;  // empty = stdout
  bool distance_column = false;

  void validate() const {
    channel.validate();
    grid.validate();
    if (!(n_alpha > 0.0)) throw std::invalid_argument("config: n_alpha must be > 0");
    for (double n : sample_sizes)
      if (!(n > 0.0)) throw std::invalid_argument("config: N must be > 0");
    if (etas.empty()) throw std::invalid_argument("config: eta list is empty");
    for (double eta : etas)
      if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("config: eta must be in (0, 1]");
    if (methods.empty()) throw std::invalid_argument("config: method list is empty");
  }

  FluctuationConfig fluctuation(double sample_size) const { return {n_alpha, sample_size}; }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto from = s.find_first_not_of(" \t\r\n");
  if (from == std::string_view::npos) return {};
  const auto to = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(from, to - from + 1));
}

inline double parse_double(const std::string& token, const std::string& what) {
  if (token == "inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for " + what + ": '" + token + "'");
  }
  if (used != token.size())
    throw std::invalid_argument("config: bad numeric value for " + what + ": '" + token + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& what) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + what + ": '" + v + "'");
}

}  // namespace detail

inline std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& tok : detail::split(s, ','))
    out.push_back(detail::parse_double(tok, what));
  return out;
}

inline Method parse_method(const std::string& s) {
  if (s == "vacuum+weak") return Method::vacuum_weak;
  if (s == "infinite") return Method::infinite;
  throw std::invalid_argument("config: unknown method '" + s +
                              "' (expected vacuum+weak or infinite)");
}

inline std::vector<Method> parse_method_list(const std::string& s) {
  std::vector<Method> out;
  for (const std::string& tok : detail::split(s, ',')) out.push_back(parse_method(tok));
  return out;
}

inline ScanGrid parse_grid(const std::string& s) {
  const std::vector<std::string> parts = detail::split(s, ':');
  if (parts.size() != 3)
    throw std::invalid_argument("config: grid must be LO:HI:STEP, got '" + s + "'");
  ScanGrid g;
  g.lo = detail::parse_double(parts[0], "grid lo");
  g.hi = detail::parse_double(parts[1], "grid hi");
  g.step = detail::parse_double(parts[2], "grid step");
  g.validate();
  return g;
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw std::invalid_argument("config: unknown format '" + s + "' (expected csv or json)");
}

// Applies one key=value pair; keys follow the conventional symbol names.
inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "e_d") cfg.channel.misalignment = detail::parse_double(value, key);
  else if (key == "P_d") cfg.channel.dark_count = detail::parse_double(value, key);
  else if (key == "eta") cfg.channel.eta_a = cfg.channel.eta_b = detail::parse_double(value, key);
  else if (key == "eta_a") cfg.channel.eta_a = detail::parse_double(value, key);
  else if (key == "eta_b") cfg.channel.eta_b = detail::parse_double(value, key);
  else if (key == "e_0") cfg.channel.background_error = detail::parse_double(value, key);
  else if (key == "f") cfg.channel.f_ec = detail::parse_double(value, key);
  else if (key == "n_alpha") cfg.n_alpha = detail::parse_double(value, key);
  else if (key == "N") cfg.sample_sizes = parse_double_list(value, key);
  else if (key == "etas") cfg.etas = parse_double_list(value, key);
  else if (key == "methods") cfg.methods = parse_method_list(value);
  else if (key == "grid") cfg.grid = parse_grid(value);
  else if (key == "symmetric") cfg.grid.symmetric = detail::parse_bool(value, key);
  else if (key == "format") cfg.format = parse_format(value);
  else if (key == "out") cfg.out_path = value;
  else if (key == "distance") cfg.distance_column = detail::parse_bool(value, key);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

inline void parse_config_stream(std::istream& in, RunConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key = value");
    apply_config_entry(cfg, detail::trim(stripped.substr(0, eq)),
                       detail::trim(stripped.substr(eq + 1)));
  }
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  RunConfig cfg;
  parse_config_stream(in, cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// Record serialization

// 10 significant digits, scientific, locale-independent.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

// Per-arm fiber length consistent with 0.2 dB/km attenuation.
inline double distance_km_from_eta(double eta) { return -50.0 * std::log10(eta); }

inline std::string csv_header(bool with_distance) {
  std::string h = "eta,method,N,mu2,mu1,y11_z,e11_x,Q_z,E_z,R_raw,R";
  if (with_distance) h += ",distance_km";
  return h;
}

// The decoy column is reported as 0 for the infinite-decoy method, whose
// rate involves no decoy state.
inline double reported_decoy(const ScanRecord& r) {
  return r.method == Method::infinite ? 0.0 : r.point.alice.decoy;
}

inline std::string csv_row(const ScanRecord& r, bool with_distance) {
  std::string row;
  row += format_double(r.eta);
  row += ',';
  row += to_string(r.method);
  row += ',';
  row += format_double(r.sample_size);
  for (double v : {r.point.alice.signal, reported_decoy(r), r.point.y11_z, r.point.e11_x,
                   r.point.q_z, r.point.e_z, r.point.rate_raw, r.point.rate}) {
    row += ',';
    row += format_double(v);
  }
  if (with_distance) {
    row += ',';
    row += format_double(distance_km_from_eta(r.eta));
  }
  return row;
}

inline std::string render_csv(const std::vector<ScanRecord>& records, bool with_distance) {
  std::string out = csv_header(with_distance) + "\n";
  for (const ScanRecord& r : records) out += csv_row(r, with_distance) + "\n";
  return out;
}

inline nlohmann::json sample_size_to_json(double n) {
  if (std::isinf(n)) return "inf";
  return n;
}

inline double sample_size_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("records: bad N value '" + j.get<std::string>() + "'");
  }
  return j.get<double>();
}

inline nlohmann::json record_to_json(const ScanRecord& r, bool with_distance) {
  nlohmann::json j{{"eta", r.eta},
                   {"method", to_string(r.method)},
                   {"N", sample_size_to_json(r.sample_size)},
                   {"mu2", r.point.alice.signal},
                   {"mu1", reported_decoy(r)},
                   {"y11_z", r.point.y11_z},
                   {"e11_x", r.point.e11_x},
                   {"Q_z", r.point.q_z},
                   {"E_z", r.point.e_z},
                   {"R_raw", r.point.rate_raw},
                   {"R", r.point.rate}};
  if (with_distance) j["distance_km"] = distance_km_from_eta(r.eta);
  return j;
}

inline nlohmann::json records_to_json(const std::vector<ScanRecord>& records,
                                      bool with_distance) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ScanRecord& r : records) arr.push_back(record_to_json(r, with_distance));
  return arr;
}

inline std::vector<ScanRecord> records_from_json(const nlohmann::json& arr) {
  std::vector<ScanRecord> out;
  out.reserve(arr.size());
  for (const nlohmann::json& j : arr) {
    ScanRecord r;
    r.eta = j.at("eta").get<double>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.sample_size = sample_size_from_json(j.at("N"));
    r.point.alice.signal = r.point.bob.signal = j.at("mu2").get<double>();
    r.point.alice.decoy = r.point.bob.decoy = j.at("mu1").get<double>();
    r.point.y11_z = j.at("y11_z").get<double>();
    r.point.e11_x = j.at("e11_x").get<double>();
    r.point.q_z = j.at("Q_z").get<double>();
    r.point.e_z = j.at("E_z").get<double>();
    r.point.rate_raw = j.at("R_raw").get<double>();
    r.point.rate = j.at("R").get<double>();
    out.push_back(r);
  }
  return out;
}

inline std::string render_records(const std::vector<ScanRecord>& records, OutputFormat fmt,
                                  bool with_distance) {
  if (fmt == OutputFormat::csv) return render_csv(records, with_distance);
  return records_to_json(records, with_distance).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Output sink

inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp(target);
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("failed writing output file '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, target);
}

inline void emit(const std::string& content, const std::string& out_path, std::ostream& fallback) {
  if (out_path.empty())
    fallback << content;
  else
    write_file_atomic(out_path, content);
}

// ---------------------------------------------------------------------------
// Commands

struct Table1Report {
  double optimal_decoy = 0.0;  // grid-optimized mu1 = nu1 under the fixed signal
  KeyRatePoint point;
  double sample_size = std::numeric_limits<double>::infinity();
};

// Fixed signal intensity, decoy intensity optimized on the grid; bounds and
// rate at the optimum, for comparison against the bundled reference values.
inline Table1Report run_table1(const RunConfig& cfg) {
  cfg.validate();
  const double n = cfg.sample_sizes.empty() ? std::numeric_limits<double>::infinity()
                                            : cfg.sample_sizes.front();
  const FluctuationConfig fluct = cfg.fluctuation(n);
  Table1Report report;
  report.sample_size = n;
  bool found = false;
  for (double decoy : cfg.grid.values()) {
    if (!(decoy < table1_signal)) continue;
    const IntensityTriple a{0.0, decoy, table1_signal};
    const KeyRatePoint pt = evaluate_key_point(cfg.channel, a, a, fluct);
    if (!found || detail::better_point(pt, report.point)) {
      report.point = pt;
      report.optimal_decoy = decoy;
      found = true;
    }
  }
  if (!found)
    throw std::invalid_argument("table1: no grid point lies below the fixed signal intensity");
  return report;
}

inline std::string render_table1(const Table1Report& r) {
  std::ostringstream out;
  out << "vacuum+weak decoy estimate at mu2 = nu2 = " << format_double(table1_signal)
      << ", optimized mu1 = nu1 = " << format_double(r.optimal_decoy) << "\n";
  if (!std::isinf(r.sample_size)) out << "sample size N = " << format_double(r.sample_size) << "\n";
  auto line = [&](const char* name, double got, double ref) {
    const double dev = ref != 0.0 ? (got - ref) / ref * 100.0 : 0.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-6s %-17s reference %-14s (dev %+.3f%%)\n", name,
                  format_double(got).c_str(), format_double(ref).c_str(), dev);
    out << buf;
  };
  line("Y11_z", r.point.y11_z, table1_reference_y11_z);
  line("e11_x", r.point.e11_x, table1_reference_e11_x);
  line("R", r.point.rate, table1_reference_rate);
  return out.str();
}

inline ScanRecord table1_record(const RunConfig& cfg, const Table1Report& r) {
  return ScanRecord{cfg.channel.eta_a, Method::vacuum_weak, r.sample_size, r.point};
}

namespace detail {

inline std::vector<std::pair<Method, double>> scan_combos(const RunConfig& cfg,
                                                          bool expand_samples) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<Method, double>> combos;
  for (Method m : cfg.methods) {
    if (m == Method::vacuum_weak) {
      if (cfg.sample_sizes.empty()) {
        combos.emplace_back(m, inf);
      } else if (expand_samples) {
        for (double n : cfg.sample_sizes) combos.emplace_back(m, n);
      } else {
        combos.emplace_back(m, cfg.sample_sizes.front());
      }
    } else {
      combos.emplace_back(m, inf);  // the infinite reference is always asymptotic
    }
  }
  return combos;
}

inline std::vector<ScanRecord> run_records(const RunConfig& cfg, bool expand_samples) {
  cfg.validate();
  const std::vector<std::pair<Method, double>> combos = scan_combos(cfg, expand_samples);
  // One scan per (method, N) combo, stitched together eta-major.
  std::vector<std::vector<ScanRecord>> per_combo;
  per_combo.reserve(combos.size());
  for (const auto& [method, n] : combos) {
    const Method methods[1] = {method};
    per_combo.push_back(
        scan_transmission(cfg.channel, cfg.etas, cfg.grid, cfg.fluctuation(n), methods));
  }
  std::vector<ScanRecord> out;
  out.reserve(cfg.etas.size() * combos.size());
  for (std::size_t ei = 0; ei < cfg.etas.size(); ++ei)
    for (std::size_t ci = 0; ci < combos.size(); ++ci) out.push_back(per_combo[ci][ei]);
  return out;
}

}  // namespace detail

// Scan records behind the key-rate curves: one per (eta, method, N).
inline std::vector<ScanRecord> run_scan(const RunConfig& cfg) {
  return detail::run_records(cfg, /*expand_samples=*/true);
}

// Optimal intensities per (eta, method); vacuum+weak uses the first
// configured N (or asymptotic when none).
inline std::vector<ScanRecord> run_optimize(const RunConfig& cfg) {
  return detail::run_records(cfg, /*expand_samples=*/false);
}

}  // namespace mdiqkd
