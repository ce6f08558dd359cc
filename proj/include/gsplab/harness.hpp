#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsplab/blr.hpp"
#include "gsplab/tensor_ranks.hpp"

namespace gsplab {

/// Bad configuration or bad user input (CLI exit code 1); numerical failures
/// surface as other exceptions (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key=value experiment configuration ('#' comments). Model keys are
/// shared with the Hamiltonian spec format; sweep lists are comma separated.
struct ExperimentConfig {
  ModelSpec model;

  std::vector<int> d_list, j_list, l_list;
  std::vector<double> kappa_list;
  double epsilon = 1e-3;

  std::string out_dir = ".";
  std::uint64_t seed = 0;
  long cap = kDefaultDimCap;
  int threads = 1;

  int quad_nodes = 64;
  int k_steps = 256;
  ThresholdRule threshold_rule{};
  ReferenceState reference = ReferenceState::kMaximallyMixed;
  std::optional<double> q_override;

  std::string initial_state = "plus";  // plus | zero | random
  std::vector<double> times;

  int lr_site = 3;
  std::vector<int> lr_probe_sites;
  std::vector<double> lr_times;

  std::string fit_input;
  std::string fit_x = "l";
  std::string fit_y = "error";
  std::optional<double> fit_epsilon;
  double fit_floor = 1e-6;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Product state |s>^d used as the evolution initial condition.
Vector product_state(const ChainGeometry& geo, const std::string& kind,
                     std::uint64_t seed);

/// Least squares of log y against x for y ~ C exp(-c x). Rows with
/// y <= noise_floor (and always y <= 0) are excluded and counted.
struct DecayFit {
  double c = 0.0;
  double log_prefactor = 0.0;
  double residual = 0.0;  // rms of the log fit
  int points_used = 0;
  int excluded = 0;

  double prefactor() const;
};

DecayFit fit_decay(const std::vector<double>& x, const std::vector<double>& y,
                   double noise_floor = 0.0);

/// ceil((1/c) ln(C / epsilon)) clamped to >= 0. Requires c > 0.
int choose_l(const DecayFit& fit, double epsilon);

// ---------------------------------------------------------------------------
// Experiment runners. Each returns finished CSV text; the CLI writes files.
// ---------------------------------------------------------------------------

struct SweepResult {
  std::string csv;                    // one row per sweep point
  std::string stages_csv;             // long-format stage diagnostics
  std::vector<std::string> skipped;   // per-point precondition messages
};

/// Cartesian sweep over d_list x j_list x l_list x kappa_list through
/// assemble_blr. Invalid points are skipped and reported, never dropped
/// silently; row order follows the sweep lists.
SweepResult run_blr_sweep(const ExperimentConfig& config);

/// Columns: d, gap, degeneracy, interaction_strength.
std::string run_gap_scan(const ExperimentConfig& config);

/// Columns: time, cut, epsilon, rank of the evolved kernel at the middle cut.
std::string run_evolution_ranks(const ExperimentConfig& config);

struct LRConeResult {
  std::string profile_csv;
  std::string fit_csv;
  std::vector<std::string> notes;
};

LRConeResult run_lr_cone(const ExperimentConfig& config);

/// Columns: d, cut, epsilon, rank (middle-cut rank of the GSP kernel per d).
std::string run_rank_scan(const ExperimentConfig& config);

struct FitOutcome {
  DecayFit fit;
  std::optional<int> chosen_l;
  std::string csv;
};

/// Reads fit_input (a CSV produced by the other runners), fits column fit_y
/// against fit_x, and inverts the fit for fit_epsilon when requested.
FitOutcome run_fit(const ExperimentConfig& config);

/// Companion gnuplot script for a CSV produced by the runners.
std::string gnuplot_script(const std::string& csv_name, const std::string& x,
                           const std::string& y, const std::string& title);

}  // namespace gsplab
