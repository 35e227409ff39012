#pragma once

// Experiment persistence: key = value configuration files, per-trial and
// aggregate CSV files, and gnuplot scripts for the aggregate curves.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmmi/experiment.hpp"

namespace cmmi {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

using ConfigMap = std::map<std::string, std::string>;

/// Flat `key = value` lines; `#` starts a comment. Duplicate keys are an error.
inline ConfigMap parse_config_text(std::string_view text) {
  ConfigMap out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

inline ConfigMap load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a number: '" + v + "'");
  }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    const auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a non-negative integer: '" + v + "'");
  }
}

inline std::string fmt_g12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace detail

inline std::vector<Method> parse_method_list(std::string_view s) {
  std::vector<Method> out;
  for (const auto& tok : split(s, ',')) {
    if (tok.empty()) continue;
    const Method m = parse_method(tok);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

inline std::vector<double> parse_sweep_list(std::string_view s) {
  std::vector<double> out;
  for (const auto& tok : split(s, ','))
    if (!tok.empty()) out.push_back(detail::to_double("sweep", tok));
  return out;
}

/// Applies configuration keys onto `spec`. Unknown keys are rejected.
inline void apply_config(const ConfigMap& cfg, ExperimentSpec& spec) {
  SystemConfig& sc = spec.config;
  bool nt_given = false;
  for (const auto& [key, v] : cfg) {
    using detail::to_double;
    using detail::to_u64;
    if (key == "nx") sc.nx = to_u64(key, v);
    else if (key == "nt") { sc.nt = to_u64(key, v); nt_given = true; }
    else if (key == "nb") sc.nb = to_u64(key, v);
    else if (key == "nm") sc.nm = to_u64(key, v);
    else if (key == "nm_prime") sc.nm_prime = to_u64(key, v);
    else if (key == "beta") sc.beta = to_double(key, v);
    else if (key == "p") sc.p = to_double(key, v);
    else if (key == "pm") sc.pm = to_double(key, v);
    else if (key == "sigma_a2") sc.sigma_a2 = to_double(key, v);
    else if (key == "sigma_m2") sc.sigma_m2 = to_double(key, v);
    else if (key == "sigma_b2") sc.sigma_b2 = to_double(key, v);
    else if (key == "sigma_mrx2") sc.sigma_mrx2 = to_double(key, v);
    else if (key == "mod_order") sc.mod_order = to_u64(key, v);
    else if (key == "samples") sc.samples = to_u64(key, v);
    else if (key == "jammer_precoding") {
      if (v == "random") sc.precoding = JammerPrecoding::RandomSemiUnitary;
      else if (v == "null-space") sc.precoding = JammerPrecoding::ReceiveNullSpace;
      else throw std::invalid_argument("config key 'jammer_precoding': expected random|null-space");
    }
    else if (key == "trials") spec.trials = to_u64(key, v);
    else if (key == "seed") spec.master_seed = to_u64(key, v);
    else if (key == "workers") spec.workers = to_u64(key, v);
    else if (key == "methods") spec.methods = parse_method_list(v);
    else if (key == "sweep") spec.sweep = parse_sweep_list(v);
    else if (key == "fixed_sinr_db") spec.fixed_sinr_db = to_double(key, v);
    else if (key == "mi_draws") spec.mi_draws = to_u64(key, v);
    else if (key == "rank_mode") {
      if (v == "oracle") spec.rank_mode = RankMode::Oracle;
      else if (v == "aic") spec.rank_mode = RankMode::Aic;
      else throw std::invalid_argument("config key 'rank_mode': expected oracle|aic");
    }
    else if (key == "sinr_convention") {
      if (v == "jnr") spec.sinr_convention = SinrConvention::JammingToNoise;
      else if (v == "desired") spec.sinr_convention = SinrConvention::DesiredToInterference;
      else throw std::invalid_argument("config key 'sinr_convention': expected jnr|desired");
    }
    else if (key == "scm_convention") {
      if (v == "raw") spec.scm_convention = ScmConvention::Raw;
      else if (v == "known-noise") spec.scm_convention = ScmConvention::KnownNoise;
      else throw std::invalid_argument("config key 'scm_convention': expected raw|known-noise");
    }
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  if (!nt_given && cfg.count("nx")) sc.nt = SystemConfig::activated_antennas(sc.nx);
}

/// Fully resolved spec in the same key = value format (re-loadable).
inline std::string format_config(const ExperimentSpec& spec) {
  const SystemConfig& c = spec.config;
  std::ostringstream o;
  o << "# experiment " << kind_name(spec.kind) << "\n";
  o << "# secrecy rate: Bob scalar after the ZFC combiner, Mallory whitened by its own\n"
       "# AN + self-interference + thermal covariance\n";
  o << "nx = " << c.nx << "\nnt = " << c.nt << "\nnb = " << c.nb << "\nnm = " << c.nm
    << "\nnm_prime = " << c.nm_prime << "\n";
  o << "beta = " << detail::fmt_g12(c.beta) << "\np = " << detail::fmt_g12(c.p)
    << "\npm = " << detail::fmt_g12(c.pm) << "\n";
  o << "sigma_a2 = " << detail::fmt_g12(c.sigma_a2) << "\nsigma_m2 = " << detail::fmt_g12(c.sigma_m2)
    << "\nsigma_b2 = " << detail::fmt_g12(c.sigma_b2)
    << "\nsigma_mrx2 = " << detail::fmt_g12(c.sigma_mrx2) << "\n";
  o << "mod_order = " << c.mod_order << "\nsamples = " << c.samples << "\n";
  o << "jammer_precoding = "
    << (c.precoding == JammerPrecoding::RandomSemiUnitary ? "random" : "null-space") << "\n";
  o << "trials = " << spec.trials << "\nseed = " << spec.master_seed
    << "\nworkers = " << spec.workers << "\n";
  o << "methods = ";
  for (std::size_t i = 0; i < spec.methods.size(); ++i)
    o << (i ? "," : "") << method_name(spec.methods[i]);
  o << "\nsweep = ";
  for (std::size_t i = 0; i < spec.sweep.size(); ++i)
    o << (i ? "," : "") << detail::fmt_g12(spec.sweep[i]);
  o << "\nfixed_sinr_db = " << detail::fmt_g12(spec.fixed_sinr_db)
    << "\nmi_draws = " << spec.mi_draws << "\n";
  o << "rank_mode = " << (spec.rank_mode == RankMode::Oracle ? "oracle" : "aic") << "\n";
  o << "sinr_convention = "
    << (spec.sinr_convention == SinrConvention::JammingToNoise ? "jnr" : "desired") << "\n";
  o << "scm_convention = " << (spec.scm_convention == ScmConvention::Raw ? "raw" : "known-noise")
    << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// CSV

inline std::vector<std::string> trial_columns(std::span<const Method> methods) {
  std::vector<std::string> cols{"sweep_index", "sweep_value", "trial", "seed", "true_rank",
                                "detected_rank", "rank_used", "jd_converged"};
  for (Method m : methods) {
    const std::string n(method_name(m));
    for (const char* metric : {"nmse_", "sjnr_", "sr_", "flops_"}) cols.push_back(metric + n);
  }
  return cols;
}

inline std::string format_trial_row(const TrialRecord& r, std::span<const Method> methods) {
  std::ostringstream o;
  o << r.sweep_index << ',' << detail::fmt_g12(r.sweep_value) << ',' << r.trial_index << ','
    << r.seed << ',' << r.true_rank << ',' << r.detected_rank << ',' << r.rank_used << ','
    << (r.jd_converged ? 1 : 0);
  for (Method m : methods) {
    const auto it = r.metrics.find(m);
    const MethodMetrics mm = it == r.metrics.end() ? MethodMetrics{} : it->second;
    for (double v : {mm.nmse, mm.sjnr, mm.secrecy_rate, mm.flops}) o << ',' << detail::fmt_g12(v);
  }
  return o.str();
}

namespace detail {

inline std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

inline void join(std::ostream& o, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) o << (i ? "," : "") << cols[i];
  o << '\n';
}

}  // namespace detail

inline void write_trials_csv(const fs::path& path, std::span<const TrialRecord> records,
                             std::span<const Method> methods) {
  if (methods.empty()) throw std::invalid_argument("write_trials_csv: empty method subset");
  if (records.empty()) throw std::invalid_argument("write_trials_csv: no records");
  auto out = detail::open_for_write(path);
  detail::join(out, trial_columns(methods));
  for (const auto& r : records) out << format_trial_row(r, methods) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

struct ParsedTrials {
  std::vector<Method> methods;
  std::vector<TrialRecord> records;
};

inline ParsedTrials parse_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trials csv: missing header");
  const auto header = split(line, ',');
  ParsedTrials out;
  if (header.size() < 8 || (header.size() - 8) % 4 != 0) {
    throw std::runtime_error("trials csv: unexpected header");
  }
  for (std::size_t c = 8; c < header.size(); c += 4) {
    out.methods.push_back(parse_method(header[c].substr(header[c].find('_') + 1)));
  }
  if (header != trial_columns(out.methods)) throw std::runtime_error("trials csv: header mismatch");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) {
      throw std::runtime_error("trials csv line " + std::to_string(line_no) + ": wrong field count");
    }
    TrialRecord r;
    r.sweep_index = std::stoull(f[0]);
    r.sweep_value = std::stod(f[1]);
    r.trial_index = std::stoull(f[2]);
    r.seed = std::stoull(f[3]);
    r.true_rank = std::stoull(f[4]);
    r.detected_rank = std::stoull(f[5]);
    r.rank_used = std::stoull(f[6]);
    r.jd_converged = f[7] == "1";
    for (std::size_t k = 0; k < out.methods.size(); ++k) {
      MethodMetrics mm;
      mm.nmse = std::stod(f[8 + 4 * k]);
      mm.sjnr = std::stod(f[9 + 4 * k]);
      mm.secrecy_rate = std::stod(f[10 + 4 * k]);
      mm.flops = std::stod(f[11 + 4 * k]);
      r.metrics[out.methods[k]] = mm;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

inline ParsedTrials parse_trials_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_trials_csv(in);
}

/// Per sweep point: mean and standard error of every numeric trial column,
/// plus the fraction of trials whose detected rank equals the true rank.
struct AggregateTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline AggregateTable aggregate(std::span<const TrialRecord> records,
                                std::span<const Method> methods) {
  std::map<std::size_t, std::vector<const TrialRecord*>> cells;
  for (const auto& r : records) cells[r.sweep_index].push_back(&r);

  AggregateTable t;
  t.columns = {"sweep_index", "sweep_value", "trials"};
  auto add_stat_cols = [&](const std::string& name) {
    t.columns.push_back(name + "_mean");
    t.columns.push_back(name + "_stderr");
  };
  add_stat_cols("rank_correct");
  add_stat_cols("detected_rank");
  add_stat_cols("jd_converged");
  for (Method m : methods) {
    const std::string n(method_name(m));
    for (const char* metric : {"nmse_", "sjnr_", "sr_", "flops_"}) add_stat_cols(metric + n);
  }

  for (const auto& [idx, rows] : cells) {
    std::vector<double> row{static_cast<double>(idx), rows.front()->sweep_value,
                            static_cast<double>(rows.size())};
    auto push = [&](auto getter) {
      std::vector<double> xs;
      xs.reserve(rows.size());
      for (const auto* r : rows) xs.push_back(getter(*r));
      const CellStats s = summarize(xs);
      row.push_back(s.mean);
      row.push_back(s.stderr_);
    };
    push([](const TrialRecord& r) { return r.detected_rank == r.true_rank ? 1.0 : 0.0; });
    push([](const TrialRecord& r) { return static_cast<double>(r.detected_rank); });
    push([](const TrialRecord& r) { return r.jd_converged ? 1.0 : 0.0; });
    for (Method m : methods) {
      for (auto field : {&MethodMetrics::nmse, &MethodMetrics::sjnr,
                         &MethodMetrics::secrecy_rate, &MethodMetrics::flops}) {
        push([&](const TrialRecord& r) {
          const auto it = r.metrics.find(m);
          return it == r.metrics.end() ? std::numeric_limits<double>::quiet_NaN()
                                       : it->second.*field;
        });
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_aggregate_csv(const fs::path& path, std::span<const TrialRecord> records,
                                std::span<const Method> methods) {
  if (methods.empty()) throw std::invalid_argument("write_aggregate_csv: empty method subset");
  if (records.empty()) throw std::invalid_argument("write_aggregate_csv: no records");
  const AggregateTable t = aggregate(records, methods);
  auto out = detail::open_for_write(path);
  detail::join(out, t.columns);
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::fmt_g12(row[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// trials.csv and aggregate.csv into `dir` (created if missing).
inline void emit_csv(std::span<const TrialRecord> records, std::span<const Method> methods,
                     const fs::path& dir) {
  if (methods.empty()) throw std::invalid_argument("emit_csv: empty method subset");
  if (records.empty()) throw std::invalid_argument("emit_csv: no records");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_trials_csv(dir / "trials.csv", records, methods);
  write_aggregate_csv(dir / "aggregate.csv", records, methods);
}

// ---------------------------------------------------------------------------
// Plot scripts

struct PlotLayout {
  std::string metric;  // column stem in the aggregate file
  std::string xlabel;
  std::string ylabel;
  bool log_y = false;
};

inline PlotLayout plot_layout(std::string_view figure_kind) {
  if (figure_kind == "nmse-sinr") return {"nmse", "SINR (dB)", "NMSE", true};
  if (figure_kind == "nmse-samples") return {"nmse", "Number of samples L", "NMSE", true};
  if (figure_kind == "sr-sinr") return {"sr", "SINR (dB)", "Secrecy rate (bits/channel use)", false};
  if (figure_kind == "rank-detect") return {"rank_correct", "SINR (dB)", "Detection probability", false};
  throw std::invalid_argument("unknown figure kind '" + std::string(figure_kind) + "'");
}

/// Series names (methods, or the metric itself for rank detection) whose
/// mean column exists in an aggregate header. The ideal covariance has zero
/// NMSE and is left off log-scale plots.
inline std::vector<std::string> plot_series(const std::vector<std::string>& header,
                                            const PlotLayout& layout) {
  std::vector<std::string> out;
  for (const auto& col : header) {
    const std::string prefix = layout.metric + "_";
    if (col.rfind(prefix, 0) != 0 || col.size() < 5 || col.substr(col.size() - 5) != "_mean") continue;
    std::string series = col.substr(prefix.size(), col.size() - prefix.size() - 5);
    if (layout.metric == "rank_correct") series = "AIC";
    if (layout.log_y && series == "ideal") continue;
    out.push_back(series);
  }
  return out;
}

inline std::string plot_script(const fs::path& aggregate_path, std::string_view figure_kind) {
  const PlotLayout layout = plot_layout(figure_kind);
  std::ifstream in(aggregate_path);
  if (!in) throw std::runtime_error("cannot open aggregate file " + aggregate_path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("aggregate file is empty");
  const auto header = split(line, ',');
  auto col_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("aggregate file lacks column " + name);
    return static_cast<std::size_t>(it - header.begin()) + 1;  // gnuplot is 1-based
  };

  std::ostringstream o;
  o << "# gnuplot script generated for " << figure_kind << "\n";
  o << "set datafile separator ','\n";
  o << "set key autotitle columnhead\n";
  o << "set grid\n";
  o << "set xlabel '" << layout.xlabel << "'\n";
  o << "set ylabel '" << layout.ylabel << "'\n";
  o << (layout.log_y ? "set logscale y\n" : "unset logscale y\n");
  o << "set terminal pngcairo size 800,600\n";
  o << "set output 'plot." << figure_kind << ".png'\n";
  const auto series = plot_series(header, layout);
  if (series.empty()) throw std::runtime_error("aggregate file has no series for " + std::string(figure_kind));
  o << "plot \\\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string stem =
        layout.metric == "rank_correct" ? layout.metric : layout.metric + "_" + series[i];
    o << "  '" << aggregate_path.filename().string() << "' using " << col_of("sweep_value") << ":"
      << col_of(stem + "_mean") << ":" << col_of(stem + "_stderr")
      << " with yerrorlines title '" << series[i] << "'" << (i + 1 < series.size() ? ", \\\n" : "\n");
  }
  return o.str();
}

inline fs::path emit_plot_script(const fs::path& aggregate_path, std::string_view figure_kind) {
  const std::string text = plot_script(aggregate_path, figure_kind);
  const fs::path out_path =
      aggregate_path.parent_path() / ("plot." + std::string(figure_kind) + ".txt");
  auto out = detail::open_for_write(out_path);
  out << text;
  return out_path;
}

}  // namespace cmmi
