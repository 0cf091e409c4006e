#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "idnc/episode.hpp"

namespace idnc {

inline constexpr const char* kVersion = "idnc 0.1.0";
inline constexpr double kErasureBand = 0.05;
inline constexpr double kErasureCap = 0.95;

enum class Sweep { players, ratio };

struct ExperimentSpec {
  std::vector<Scheme> schemes;
  Metric metric = Metric::completion_time;
  Sweep sweep = Sweep::players;
  std::vector<double> grid;
  int M = 20;       // fixed when sweeping the ratio
  int N = 30;
  double Q = 0.2;
  double P = 0.1;   // fixed when sweeping M
  int iterations = 100;
  std::uint64_t seed = 1;
  int V = 2;
  double epsilon = 0.5;
  int max_stages = 0;  // 0: 50 * N
  int exhaustive_limit = 10;
  Variant opt_variant = Variant::plain;

  int stage_limit() const { return max_stages > 0 ? max_stages : 50 * N; }

  void validate() const {
    if (schemes.empty()) throw std::invalid_argument("spec: no schemes");
    if (grid.empty()) throw std::invalid_argument("spec: empty grid");
    if (iterations < 1) throw std::invalid_argument("spec: iterations must be >= 1");
    if (N < 1) throw std::invalid_argument("spec: N must be >= 1");
    if (!(Q >= 0.0 && Q < 1.0)) throw std::invalid_argument("spec: Q outside [0,1)");
    if (sweep == Sweep::players) {
      if (!(P >= 0.0 && P < 1.0)) throw std::invalid_argument("spec: P outside [0,1)");
      for (double g : grid)
        if (g < 1 || g != static_cast<int>(g)) throw std::invalid_argument("spec: M grid must hold positive integers");
    } else {
      if (M < 1) throw std::invalid_argument("spec: M must be >= 1");
      for (double g : grid)
        if (!(g >= 0.0 && g * Q < 1.0)) throw std::invalid_argument("spec: ratio grid gives P outside [0,1)");
    }
  }
};

struct ResultRow {
  std::string scheme;
  double sweep_value = 0.0;
  double mean_completion_time = 0.0;
  double mean_max_delay = 0.0;
  double mean_sum_delay = 0.0;
  double mean_collisions = 0.0;
  long episodes = 0;
  long cutoffs = 0;
  bool operator==(const ResultRow&) const = default;
};

inline double draw_around(Engine& rng, double mean) {
  const double lo = std::max(0.0, mean - kErasureBand);
  const double hi = std::min(kErasureCap, mean + kErasureBand);
  return uniform(rng, lo, hi);
}

// One iteration's channel: every link and base-station erasure drawn
// independently around its mean.
inline GameConfig draw_config(const ExperimentSpec& spec, int M, double P, std::uint64_t key) {
  Engine rng = make_stream(spec.seed, Stream::erasure, {key});
  GameConfig c;
  c.M = M;
  c.N = spec.N;
  c.P = ErasureMatrix(M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (i != j) c.P.set(i, j, draw_around(rng, P));
  c.Q.resize(M);
  for (int i = 0; i < M; ++i) c.Q[i] = draw_around(rng, spec.Q);
  c.V = spec.V;
  c.epsilon = spec.epsilon;
  c.max_stages = spec.stage_limit();
  c.seed = spec.seed;
  c.validate();
  return c;
}

inline std::uint64_t episode_key(std::size_t point, int iteration) {
  return (static_cast<std::uint64_t>(point) << 32) | static_cast<std::uint32_t>(iteration);
}

// All schemes at a point share the erasure draw, the initial phase and the
// per-stage channel streams. Ratio sweeps also share them across points
// (same uniforms mapped around a different mean), so the points are paired.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<ResultRow> table;
  for (std::size_t p = 0; p < spec.grid.size(); ++p) {
    const double v = spec.grid[p];
    const int M = spec.sweep == Sweep::players ? static_cast<int>(v) : spec.M;
    const double P = spec.sweep == Sweep::players ? spec.P : v * spec.Q;
    std::vector<ResultRow> rows(spec.schemes.size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
      rows[s].scheme = scheme_name(spec.schemes[s]);
      rows[s].sweep_value = v;
    }
    for (int it = 0; it < spec.iterations; ++it) {
      const std::uint64_t key = episode_key(spec.sweep == Sweep::ratio ? 0 : p, it);
      const GameConfig config = draw_config(spec, M, P, key);
      Engine init = make_stream(spec.seed, Stream::initial_phase, {key});
      const StateMatrix S = initial_phase(config, init);
      for (std::size_t s = 0; s < rows.size(); ++s) {
        EpisodeOptions opt;
        opt.metric = spec.metric;
        opt.opt_variant = spec.opt_variant;
        opt.exhaustive_limit = spec.exhaustive_limit;
        opt.key = key;
        const auto tr = run_episode(spec.schemes[s], config, S, opt);
        auto& r = rows[s];
        r.mean_completion_time += tr.T;
        r.mean_max_delay += static_cast<double>(tr.max_delay());
        r.mean_sum_delay += static_cast<double>(tr.sum_delay());
        r.mean_collisions += static_cast<double>(tr.collisions);
        r.episodes += 1;
        r.cutoffs += tr.cutoff ? 1 : 0;
      }
    }
    for (auto& r : rows) {
      const double k = static_cast<double>(r.episodes);
      r.mean_completion_time /= k;
      r.mean_max_delay /= k;
      r.mean_sum_delay /= k;
      r.mean_collisions /= k;
      table.push_back(r);
    }
  }
  return table;
}

inline std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string format_6g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline const char* kCsvHeader =
    "scheme,sweep_value,mean_completion_time,mean_max_decoding_delay,mean_sum_decoding_delay,"
    "mean_collisions,episodes,cutoffs";

inline std::string spec_metadata(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << "# " << kVersion << "\n# schemes=";
  for (std::size_t i = 0; i < spec.schemes.size(); ++i) os << (i ? ";" : "") << scheme_name(spec.schemes[i]);
  os << "\n# metric=" << metric_name(spec.metric)
     << " sweep=" << (spec.sweep == Sweep::players ? "M" : "ratio") << " grid=";
  for (std::size_t i = 0; i < spec.grid.size(); ++i) os << (i ? ";" : "") << format_6g(spec.grid[i]);
  os << "\n# N=" << spec.N << " Q=" << format_6g(spec.Q);
  if (spec.sweep == Sweep::players) os << " P=" << format_6g(spec.P);
  else os << " M=" << spec.M;
  os << "\n# iterations=" << spec.iterations << " seed=" << spec.seed << " V=" << spec.V
     << " epsilon=" << format_6g(spec.epsilon) << " max_stages=" << spec.stage_limit()
     << " exhaustive_limit=" << spec.exhaustive_limit
     << " opt_game=" << (spec.opt_variant == Variant::plain ? "plain" : "regularized")
     << "\n# erasures drawn per iteration uniform on [max(0,mean-" << kErasureBand << "),min("
     << kErasureCap << ",mean+" << kErasureBand << ")]\n";
  return os.str();
}

inline std::string format_csv(const std::vector<ResultRow>& table, const std::string& metadata = "") {
  if (table.empty()) throw std::invalid_argument("emit_csv: empty table");
  std::string out = metadata;
  out += kCsvHeader;
  out += "\n";
  for (const auto& r : table) {
    out += csv_quote(r.scheme) + "," + format_6g(r.sweep_value) + "," + format_6g(r.mean_completion_time) +
           "," + format_6g(r.mean_max_delay) + "," + format_6g(r.mean_sum_delay) + "," +
           format_6g(r.mean_collisions) + "," + std::to_string(r.episodes) + "," +
           std::to_string(r.cutoffs) + "\n";
  }
  return out;
}

inline void emit_csv(const std::vector<ResultRow>& table, const std::string& path,
                     const std::string& metadata = "") {
  const std::string text = format_csv(table, metadata);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::vector<std::vector<std::string>> split_csv_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
      }
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<ResultRow> parse_csv(const std::string& text) {
  std::string body;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (line.empty() || line[0] != '#') body += line + "\n";
  auto records = split_csv_records(body);
  if (records.empty()) throw std::invalid_argument("parse_csv: no header");
  std::vector<ResultRow> table;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != 8) throw std::invalid_argument("parse_csv: expected 8 fields");
    table.push_back({f[0], std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]),
                     std::stod(f[5]), std::stol(f[6]), std::stol(f[7])});
  }
  return table;
}

}  // namespace idnc
