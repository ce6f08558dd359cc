#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gsplab/harness.hpp"

namespace {

using gsplab::ConfigError;
using gsplab::ExperimentConfig;

struct GlobalFlags {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<long> cap;
  std::optional<int> threads;
};

ExperimentConfig load(const GlobalFlags& flags) {
  ExperimentConfig config = gsplab::load_config(flags.config_path);
  if (flags.out_dir) config.out_dir = *flags.out_dir;
  if (flags.seed) config.seed = config.model.seed = *flags.seed;
  if (flags.cap) config.cap = *flags.cap;
  if (flags.threads) config.threads = *flags.threads;
  return config;
}

void write_file(const ExperimentConfig& config, const std::string& name,
                const std::string& content) {
  std::filesystem::create_directories(config.out_dir);
  const std::filesystem::path path = std::filesystem::path(config.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  std::cerr << "wrote " << path.string() << "\n";
}

void report_skipped(const std::vector<std::string>& skipped) {
  for (const auto& message : skipped) std::cerr << "skipped " << message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gsplab: BLR factorization laboratory for gapped spin chains"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "experiment config file (key=value lines)")
      ->required();
  app.add_option("--out", flags.out_dir, "output directory (overrides config)");
  app.add_option("--seed", flags.seed, "random seed (overrides config)");
  app.add_option("--cap", flags.cap,
                 "full-space dimension cap; raising it acknowledges cubic "
                 "diagonalization cost");
  app.add_option("--threads", flags.threads, "sweep worker threads");

  auto* gap_scan = app.add_subcommand("gap-scan", "gap, degeneracy and J per chain length");
  auto* blr_sweep = app.add_subcommand("blr-sweep", "||P0 - BLR|| over (d, j, l, kappa)");
  auto* lr_cone = app.add_subcommand("lr-cone", "commutator-norm light cone and LR fit");
  auto* ranks = app.add_subcommand("ranks", "middle-cut GSP kernel ranks per chain length");
  auto* evolve = app.add_subcommand("evolve-ranks", "kernel rank growth under evolution");
  auto* fit = app.add_subcommand("fit", "exponential-decay fit of a CSV column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const ExperimentConfig config = load(flags);

    if (gap_scan->parsed()) {
      write_file(config, "gap_scan.csv", gsplab::run_gap_scan(config));
      write_file(config, "gap_scan.gp",
                 gsplab::gnuplot_script("gap_scan.csv", "d", "gap", "spectral gap"));
    } else if (blr_sweep->parsed()) {
      const gsplab::SweepResult result = gsplab::run_blr_sweep(config);
      report_skipped(result.skipped);
      write_file(config, "blr_sweep.csv", result.csv);
      write_file(config, "blr_stages.csv", result.stages_csv);
      write_file(config, "blr_sweep.gp",
                 gsplab::gnuplot_script("blr_sweep.csv", "l", "error", "||P0 - BLR||"));
    } else if (lr_cone->parsed()) {
      const gsplab::LRConeResult result = gsplab::run_lr_cone(config);
      for (const auto& note : result.notes) std::cerr << note << "\n";
      write_file(config, "lr_cone.csv", result.profile_csv);
      write_file(config, "lr_fit.csv", result.fit_csv);
      write_file(config, "lr_cone.gp",
                 gsplab::gnuplot_script("lr_cone.csv", "time", "commutator_norm",
                                        "light cone"));
    } else if (ranks->parsed()) {
      write_file(config, "rank_scan.csv", gsplab::run_rank_scan(config));
      write_file(config, "rank_scan.gp",
                 gsplab::gnuplot_script("rank_scan.csv", "d", "rank",
                                        "middle-cut epsilon-rank"));
    } else if (evolve->parsed()) {
      write_file(config, "evolve_ranks.csv", gsplab::run_evolution_ranks(config));
      write_file(config, "evolve_ranks.gp",
                 gsplab::gnuplot_script("evolve_ranks.csv", "time", "rank",
                                        "kernel rank growth"));
    } else if (fit->parsed()) {
      const gsplab::FitOutcome outcome = gsplab::run_fit(config);
      write_file(config, "decay_fit.csv", outcome.csv);
      std::cerr << "fit: c=" << outcome.fit.c
                << " prefactor=" << outcome.fit.prefactor()
                << " residual=" << outcome.fit.residual
                << " points=" << outcome.fit.points_used;
      if (outcome.chosen_l) std::cerr << " chosen_l=" << *outcome.chosen_l;
      std::cerr << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
