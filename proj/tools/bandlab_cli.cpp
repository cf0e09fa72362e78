// bandlab: run one experiment and write its per-trial table.
//
//   bandlab --experiment logdet-limit --n 48 --ell 48 --trials 30 --out run.csv
//   bandlab --config sweep.json --n 64 --format json
//
// Flags override keys from --config. Exit status: 0 ok, 2 bad config, 3 some
// trials failed, 1 anything else.

#include <complex>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bandlab/bandlab.hpp"

namespace {

struct Overrides {
  std::optional<std::string> experiment, law, out, format;
  std::optional<int> n, ell, trials, workers, smoothing_ell;
  std::optional<double> z_re, z_im, tol, xi_re, xi_im, smoothing, rigidity_exponent, regime_exponent;
  std::optional<long> max_dense;
  std::optional<std::uint64_t> seed;
};

bandlab::ExperimentConfig apply(bandlab::ExperimentConfig c, const Overrides& o) {
  using bandlab::Complex;
  if (o.experiment) c.experiment = bandlab::parse_experiment(*o.experiment);
  if (o.law) {
    try {
      c.law.kind = bandlab::parse_atom_kind(*o.law);
    } catch (const bandlab::InvalidArgument& e) {
      throw bandlab::ConfigError(e.what());
    }
  }
  if (o.out) c.out = *o.out;
  if (o.format) c.format = bandlab::parse_format(*o.format);
  if (o.n) c.n = *o.n;
  if (o.ell) c.ell = *o.ell;
  if (o.trials) c.trials = *o.trials;
  if (o.workers) c.workers = *o.workers;
  if (o.smoothing) c.law.smoothing_exponent = *o.smoothing;
  if (o.smoothing_ell) c.law.smoothing_ell = *o.smoothing_ell;
  if (o.z_re) c.z.real(*o.z_re);
  if (o.z_im) c.z.imag(*o.z_im);
  if (o.xi_re) c.xi.real(*o.xi_re);
  if (o.xi_im) c.xi.imag(*o.xi_im);
  if (o.tol) c.tol = *o.tol;
  if (o.max_dense) c.max_dense = *o.max_dense;
  if (o.seed) c.seed = *o.seed;
  if (o.rigidity_exponent) c.rigidity_exponent = *o.rigidity_exponent;
  if (o.regime_exponent) c.regime_exponent = *o.regime_exponent;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random block tridiagonal matrix experiments"};
  std::string config_path;
  Overrides o;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--experiment", o.experiment,
                 "logdet-identity | logdet-limit | esd | lsv-tail | rigidity | mde-compare | "
                 "concentration | ginibre");
  app.add_option("--n", o.n, "number of blocks");
  app.add_option("--ell", o.ell, "block size");
  app.add_option("--z-re", o.z_re, "real part of the shift z");
  app.add_option("--z-im", o.z_im, "imaginary part of the shift z");
  app.add_option("--law", o.law,
                 "real-gaussian | complex-gaussian | real-uniform | smoothed-rademacher");
  app.add_option("--smoothing", o.smoothing, "smoothing exponent for smoothed-rademacher");
  app.add_option("--smoothing-ell", o.smoothing_ell, "block size the smoothing is evaluated at (0: ell)");
  app.add_option("--trials", o.trials, "number of trials");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--out", o.out, "output path, - for stdout");
  app.add_option("--format", o.format, "csv | json");
  app.add_option("--tol", o.tol, "tolerance");
  app.add_option("--max-dense", o.max_dense, "largest dense dimension");
  app.add_option("--workers", o.workers, "worker threads");
  app.add_option("--xi-re", o.xi_re, "real part of xi (mde-compare)");
  app.add_option("--xi-im", o.xi_im, "imaginary part of xi (mde-compare)");
  app.add_option("--rigidity-exponent", o.rigidity_exponent, "singular value threshold ell^-p");
  app.add_option("--regime-exponent", o.regime_exponent, "d in n >= ell^d (reported)");
  app.add_flag("--quiet", quiet, "no summary on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  bandlab::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = bandlab::load_config(config_path);
    cfg = apply(cfg, o);
    cfg.validate();
  } catch (const bandlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto record = bandlab::run(cfg);
    if (cfg.out == "-")
      bandlab::emit(record, cfg.format, std::cout);
    else
      bandlab::emit(record, cfg.format, cfg.out);
    if (!quiet) {
      std::cerr << bandlab::to_string(cfg.experiment) << ": " << record.trials.size() << " trials, "
                << record.failed_count() << " failed, " << record.wall_time_seconds << " s\n";
      for (const auto& a : record.aggregate)
        std::cerr << "  " << a.name << " mean " << a.mean << " sd " << a.stddev << '\n';
      for (const auto& [k, v] : record.summary) std::cerr << "  " << k << " = " << v << '\n';
    }
    return bandlab::exit_code(record);
  } catch (const bandlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
