#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <locale>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bandlab/entropy.hpp"
#include "bandlab/error.hpp"
#include "bandlab/mde.hpp"
#include "bandlab/model.hpp"
#include "bandlab/spectra.hpp"
#include "bandlab/transfer.hpp"

namespace bandlab {

inline constexpr std::string_view kVersion = "1.0.0";

enum class Experiment {
  logdet_identity,
  logdet_limit,
  esd,
  lsv_tail,
  rigidity,
  mde_compare,
  concentration,
  ginibre,
};

inline constexpr std::array<std::pair<Experiment, std::string_view>, 8> kExperimentNames = {{
    {Experiment::logdet_identity, "logdet-identity"},
    {Experiment::logdet_limit, "logdet-limit"},
    {Experiment::esd, "esd"},
    {Experiment::lsv_tail, "lsv-tail"},
    {Experiment::rigidity, "rigidity"},
    {Experiment::mde_compare, "mde-compare"},
    {Experiment::concentration, "concentration"},
    {Experiment::ginibre, "ginibre"},
}};

inline std::string_view to_string(Experiment e) {
  for (const auto& [kind, name] : kExperimentNames)
    if (kind == e) return name;
  throw InvalidArgument("unknown experiment");
}

inline Experiment parse_experiment(std::string_view name) {
  for (const auto& [kind, label] : kExperimentNames)
    if (label == name) return kind;
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

enum class OutputFormat { csv, json };

inline OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ConfigError("unknown format '" + std::string(name) + "' (csv or json)");
}

struct ExperimentConfig {
  Experiment experiment = Experiment::logdet_identity;
  int n = 8;
  int ell = 4;
  Complex z = 0.0;
  AtomLaw law;
  int trials = 10;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  long max_dense = kDefaultDenseCap;
  Complex xi{2.0, 1.0};             // spectral parameter for mde-compare
  double rigidity_exponent = 50.0;  // threshold ℓ^{-exponent} on singular values
  double regime_exponent = 1.0;     // d in n ≥ ℓ^d, reported only
  int workers = 1;
  std::string out = "-";
  OutputFormat format = OutputFormat::csv;

  void validate() const {
    if (n < 1 || ell < 1) throw ConfigError("n and ell must be positive");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (max_dense < 1) throw ConfigError("max_dense must be positive");
    if (!(rigidity_exponent >= 0.0)) throw ConfigError("rigidity exponent must be >= 0");
    if (!(regime_exponent >= 0.0)) throw ConfigError("regime exponent must be >= 0");
    if (experiment == Experiment::mde_compare && n < 3)
      throw ConfigError("mde-compare uses the periodic ensemble and needs n >= 3");
    if (experiment == Experiment::mde_compare && !(xi.imag() > 0.0))
      throw ConfigError("mde-compare needs Im xi > 0");
    if (experiment == Experiment::lsv_tail && trials < 2)
      throw ConfigError("lsv-tail needs trials >= 2");
    if (experiment == Experiment::esd && static_cast<long>(n) * ell > kEigenvalueCap)
      throw ConfigError("esd dimension exceeds the eigenvalue cap");
    try {
      law.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
};

struct TrialRecord {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;  // derived per-trial stream id
  std::vector<double> values;
  bool failed = false;
  std::string error;
};

struct ColumnAggregate {
  std::string name;
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
  double max = 0.0;

  friend bool operator==(const ColumnAggregate&, const ColumnAggregate&) = default;
};

struct ResultRecord {
  ExperimentConfig config;
  std::vector<std::string> columns;
  std::vector<TrialRecord> trials;
  std::vector<ColumnAggregate> aggregate;
  std::map<std::string, double> summary;
  double wall_time_seconds = 0.0;
  std::string version{kVersion};

  [[nodiscard]] std::size_t failed_count() const {
    return static_cast<std::size_t>(
        std::count_if(trials.begin(), trials.end(), [](const TrialRecord& t) { return t.failed; }));
  }
};

/// Mean, sample std-dev and quantiles of each column over trials that did not fail.
inline std::vector<ColumnAggregate> aggregate_columns(const std::vector<std::string>& columns,
                                                      const std::vector<TrialRecord>& trials) {
  std::vector<ColumnAggregate> out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    ColumnAggregate agg;
    agg.name = columns[c];
    std::vector<double> v;
    for (const auto& t : trials)
      if (!t.failed && c < t.values.size()) v.push_back(t.values[c]);
    agg.count = v.size();
    if (!v.empty()) {
      std::sort(v.begin(), v.end());
      agg.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      if (v.size() > 1) {
        double acc = 0.0;
        for (double x : v) acc += (x - agg.mean) * (x - agg.mean);
        agg.stddev = std::sqrt(acc / static_cast<double>(v.size() - 1));
      }
      agg.min = v.front();
      agg.max = v.back();
      agg.q05 = empirical_quantile(v, 0.05);
      agg.q25 = empirical_quantile(v, 0.25);
      agg.median = empirical_quantile(v, 0.5);
      agg.q75 = empirical_quantile(v, 0.75);
      agg.q95 = empirical_quantile(v, 0.95);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

namespace detail {

inline std::vector<std::string> experiment_columns(Experiment e) {
  switch (e) {
    case Experiment::logdet_identity: return {"transfer", "lu", "abs_error"};
    case Experiment::logdet_limit: return {"value"};
    case Experiment::esd: return {"fraction_in_disk", "radial_distance"};
    case Experiment::lsv_tail: return {"s_min", "log_s_min"};
    case Experiment::rigidity: return {"count", "s_min"};
    case Experiment::mde_compare: return {"stieltjes_re", "stieltjes_im"};
    case Experiment::concentration: return {"value"};
    case Experiment::ginibre: return {"value"};
  }
  throw InvalidArgument("unknown experiment");
}

inline std::vector<double> run_trial(const ExperimentConfig& cfg, std::uint64_t trial) {
  const long cap = cfg.max_dense;
  switch (cfg.experiment) {
    case Experiment::logdet_identity: {
      const auto t = sample_tridiagonal(cfg.n, cfg.ell, cfg.law, cfg.seed, trial);
      const double via = logdet_via_transfer(t, cfg.z).value;
      const double lu = lu_logdet(to_dense(t, cfg.z, cap)).log_magnitude;
      return {via, lu, std::abs(via - lu)};
    }
    case Experiment::logdet_limit: {
      const auto t = sample_tridiagonal(cfg.n, cfg.ell, cfg.law, cfg.seed, trial);
      return {logdet_via_transfer(t, cfg.z).value / static_cast<double>(t.dimension())};
    }
    case Experiment::esd: {
      const auto t = sample_tridiagonal(cfg.n, cfg.ell, cfg.law, cfg.seed, trial);
      const auto s = esd(t);
      return {s.fraction_in_unit_disk, s.radial_cdf_distance};
    }
    case Experiment::lsv_tail: {
      LsvTailParams p;
      p.n = cfg.n;
      p.ell = cfg.ell;
      p.z = cfg.z;
      p.law = cfg.law;
      p.master_seed = cfg.seed;
      const double s = lsv_sample(p, trial, cap);
      return {s, std::log(s)};
    }
    case Experiment::rigidity: {
      const auto t = sample_tridiagonal(cfg.n, cfg.ell, cfg.law, cfg.seed, trial);
      const auto mu = singular_values(t, cfg.z, cap);
      const double threshold = std::pow(static_cast<double>(cfg.ell), -cfg.rigidity_exponent);
      return {static_cast<double>(rigidity_count(mu, threshold * threshold)),
              std::sqrt(mu.atoms().front())};
    }
    case Experiment::mde_compare: {
      const auto p = sample_periodic(cfg.n, cfg.ell, cfg.law, cfg.seed, trial);
      const Complex m = empirical_stieltjes(singular_values(p, cfg.z, cap), cfg.xi);
      return {m.real(), m.imag()};
    }
    case Experiment::concentration: {
      const auto t = sample_tridiagonal(cfg.n, cfg.ell, cfg.law, cfg.seed, trial);
      return {logdet_via_transfer(t, cfg.z).product_logdet() / static_cast<double>(t.dimension())};
    }
    case Experiment::ginibre:
      return {ginibre_logdet_sample(cfg.n, cfg.law, cfg.seed, trial)};
  }
  throw InvalidArgument("unknown experiment");
}

inline std::map<std::string, double> experiment_summary(const ExperimentConfig& cfg,
                                                        const std::vector<TrialRecord>& trials,
                                                        const std::vector<ColumnAggregate>& agg) {
  std::map<std::string, double> s;
  s["regime_holds"] =
      static_cast<double>(cfg.n) >= std::pow(static_cast<double>(cfg.ell), cfg.regime_exponent) ? 1.0 : 0.0;
  switch (cfg.experiment) {
    case Experiment::logdet_identity: {
      double worst = 0.0;
      for (const auto& t : trials)
        if (!t.failed) worst = std::max(worst, t.values[2] / std::max(1.0, std::abs(t.values[1])));
      s["max_relative_error"] = worst;
      break;
    }
    case Experiment::logdet_limit:
      s["target"] = ginibre_potential(cfg.z);
      s["deviation"] = std::abs(agg[0].mean - s["target"]);
      break;
    case Experiment::ginibre:
      s["target"] = ginibre_logdet_limit();
      s["deviation"] = std::abs(agg[0].mean - s["target"]);
      break;
    case Experiment::mde_compare: {
      const Complex limit = solve_mc(cfg.xi, cfg.z);
      s["limit_re"] = limit.real();
      s["limit_im"] = limit.imag();
      s["deviation"] = std::abs(Complex(agg[0].mean, agg[1].mean) - limit);
      break;
    }
    case Experiment::lsv_tail: {
      std::vector<double> samples;
      for (const auto& t : trials)
        if (!t.failed) samples.push_back(t.values[0]);
      if (samples.size() >= 2) {
        const auto tail = tabulate_lsv_tail(std::move(samples), cfg.n, cfg.ell);
        s["p05"] = tail.p05;
        s["log_moment4"] = tail.log_moment4;
        s["calibrated_constant"] = tail.calibrated_constant;
        const auto [lo, hi] = std::minmax_element(tail.ratio.begin(), tail.ratio.end());
        s["tail_ratio_spread"] = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
      }
      break;
    }
    case Experiment::rigidity:
      s["threshold"] = std::pow(static_cast<double>(cfg.ell), -cfg.rigidity_exponent);
      break;
    case Experiment::esd:
    case Experiment::concentration:
      break;
  }
  return s;
}

}  // namespace detail

/// Runs every trial on a bounded worker pool. Trial k always uses stream
/// index k, so the record does not depend on the worker count.
inline ResultRecord run(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ResultRecord rec;
  rec.config = cfg;
  rec.columns = detail::experiment_columns(cfg.experiment);
  rec.trials.resize(static_cast<std::size_t>(cfg.trials));
  const SeedScheme seeds(cfg.seed);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rec.trials.size(); i = next++) {
      TrialRecord& tr = rec.trials[i];
      tr.index = i;
      tr.seed = seeds.derive(i, 0, Role::trial);
      try {
        tr.values = detail::run_trial(cfg, i);
      } catch (const std::exception& e) {
        tr.failed = true;
        tr.error = e.what();
        tr.values.assign(rec.columns.size(), std::numeric_limits<double>::quiet_NaN());
      }
    }
  };
  const int pool = std::min<int>(cfg.workers, cfg.trials);
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int w = 0; w < pool; ++w) threads.emplace_back(worker);
  }

  rec.aggregate = aggregate_columns(rec.columns, rec.trials);
  rec.summary = detail::experiment_summary(cfg, rec.trials, rec.aggregate);
  rec.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// 0 when every trial succeeded, 3 when some failed.
inline int exit_code(const ResultRecord& rec) { return rec.failed_count() == 0 ? 0 : 3; }

// ---- JSON ------------------------------------------------------------------

namespace detail {

// nlohmann writes non-finite doubles as null; keep them as tagged strings.
inline nlohmann::json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double number_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("expected a number, got '" + s + "'");
  }
  if (!j.is_number()) throw ConfigError("expected a number");
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {
      {"experiment", std::string(to_string(c.experiment))},
      {"n", c.n},
      {"ell", c.ell},
      {"z_re", c.z.real()},
      {"z_im", c.z.imag()},
      {"law", std::string(to_string(c.law.kind))},
      {"smoothing", c.law.smoothing_exponent},
      {"smoothing_ell", c.law.smoothing_ell},
      {"trials", c.trials},
      {"seed", c.seed},
      {"tol", c.tol},
      {"max_dense", c.max_dense},
      {"xi_re", c.xi.real()},
      {"xi_im", c.xi.imag()},
      {"rigidity_exponent", c.rigidity_exponent},
      {"regime_exponent", c.regime_exponent},
      {"workers", c.workers},
      {"out", c.out},
      {"format", c.format == OutputFormat::csv ? "csv" : "json"},
  };
}

/// Applies the keys present in `j` on top of `base`; unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "experiment") base.experiment = parse_experiment(v.get<std::string>());
      else if (key == "n") base.n = v.get<int>();
      else if (key == "ell") base.ell = v.get<int>();
      else if (key == "z_re") base.z.real(v.get<double>());
      else if (key == "z_im") base.z.imag(v.get<double>());
      else if (key == "law") base.law.kind = parse_atom_kind(v.get<std::string>());
      else if (key == "smoothing") base.law.smoothing_exponent = v.get<double>();
      else if (key == "smoothing_ell") base.law.smoothing_ell = v.get<int>();
      else if (key == "trials") base.trials = v.get<int>();
      else if (key == "seed") base.seed = v.get<std::uint64_t>();
      else if (key == "tol") base.tol = v.get<double>();
      else if (key == "max_dense") base.max_dense = v.get<long>();
      else if (key == "xi_re") base.xi.real(v.get<double>());
      else if (key == "xi_im") base.xi.imag(v.get<double>());
      else if (key == "rigidity_exponent") base.rigidity_exponent = v.get<double>();
      else if (key == "regime_exponent") base.regime_exponent = v.get<double>();
      else if (key == "workers") base.workers = v.get<int>();
      else if (key == "out") base.out = v.get<std::string>();
      else if (key == "format") base.format = parse_format(v.get<std::string>());
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return base;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline nlohmann::json to_json(const ResultRecord& r) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.trials) {
    nlohmann::json values = nlohmann::json::array();
    for (double v : t.values) values.push_back(detail::number_to_json(v));
    trials.push_back({{"index", t.index},
                      {"seed", t.seed},
                      {"values", values},
                      {"failed", t.failed},
                      {"error", t.error}});
  }
  nlohmann::json agg = nlohmann::json::array();
  for (const auto& a : r.aggregate) {
    agg.push_back({{"name", a.name},
                   {"count", a.count},
                   {"mean", detail::number_to_json(a.mean)},
                   {"stddev", detail::number_to_json(a.stddev)},
                   {"min", detail::number_to_json(a.min)},
                   {"q05", detail::number_to_json(a.q05)},
                   {"q25", detail::number_to_json(a.q25)},
                   {"median", detail::number_to_json(a.median)},
                   {"q75", detail::number_to_json(a.q75)},
                   {"q95", detail::number_to_json(a.q95)},
                   {"max", detail::number_to_json(a.max)}});
  }
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [k, v] : r.summary) summary[k] = detail::number_to_json(v);
  return {{"version", r.version},
          {"config", config_to_json(r.config)},
          {"columns", r.columns},
          {"trials", trials},
          {"aggregate", agg},
          {"summary", summary},
          {"wall_time_seconds", r.wall_time_seconds}};
}

inline ResultRecord record_from_json(const nlohmann::json& j) {
  ResultRecord r;
  try {
    r.version = j.at("version").get<std::string>();
    r.config = config_from_json(j.at("config"));
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& t : j.at("trials")) {
      TrialRecord tr;
      tr.index = t.at("index").get<std::uint64_t>();
      tr.seed = t.at("seed").get<std::uint64_t>();
      for (const auto& v : t.at("values")) tr.values.push_back(detail::number_from_json(v));
      tr.failed = t.at("failed").get<bool>();
      tr.error = t.at("error").get<std::string>();
      r.trials.push_back(std::move(tr));
    }
    for (const auto& a : j.at("aggregate")) {
      ColumnAggregate c;
      c.name = a.at("name").get<std::string>();
      c.count = a.at("count").get<std::size_t>();
      c.mean = detail::number_from_json(a.at("mean"));
      c.stddev = detail::number_from_json(a.at("stddev"));
      c.min = detail::number_from_json(a.at("min"));
      c.q05 = detail::number_from_json(a.at("q05"));
      c.q25 = detail::number_from_json(a.at("q25"));
      c.median = detail::number_from_json(a.at("median"));
      c.q75 = detail::number_from_json(a.at("q75"));
      c.q95 = detail::number_from_json(a.at("q95"));
      c.max = detail::number_from_json(a.at("max"));
      r.aggregate.push_back(std::move(c));
    }
    for (const auto& [k, v] : j.at("summary").items()) r.summary[k] = detail::number_from_json(v);
    r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("result record: ") + e.what());
  }
  return r;
}

// ---- emit ------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// CSV: header `trial,seed,<columns>,failed`, one row per trial, values at 17
/// significant digits.
inline void emit_csv(const ResultRecord& r, std::ostream& os) {
  os << "trial,seed";
  for (const auto& c : r.columns) os << ',' << c;
  os << ",failed\n";
  for (const auto& t : r.trials) {
    os << t.index << ',' << t.seed;
    for (double v : t.values) os << ',' << detail::format_double(v);
    os << ',' << (t.failed ? 1 : 0) << '\n';
  }
}

inline void emit_json(const ResultRecord& r, std::ostream& os) { os << to_json(r).dump(2) << '\n'; }

inline void emit(const ResultRecord& r, OutputFormat format, std::ostream& os) {
  if (format == OutputFormat::csv)
    emit_csv(r, os);
  else
    emit_json(r, os);
  if (!os) throw IoError("write failed");
}

inline void emit(const ResultRecord& r, OutputFormat format, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  emit(r, format, os);
}

}  // namespace bandlab
