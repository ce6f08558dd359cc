#include "gsplab/harness.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "gsplab/spectral.hpp"

namespace gsplab {

namespace {

std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) parts.push_back(item.substr(b, e - b + 1));
  }
  return parts;
}

std::vector<int> parse_int_list(const std::string& value, const std::string& key) {
  std::vector<int> out;
  for (const auto& part : split_list(value)) {
    try {
      out.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw ConfigError("config: bad integer '" + part + "' in " + key);
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& value, const std::string& key) {
  std::vector<double> out;
  for (const auto& part : split_list(value)) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw ConfigError("config: bad number '" + part + "' in " + key);
    }
  }
  return out;
}

ThresholdRule parse_threshold_rule(const std::string& value) {
  ThresholdRule rule;
  if (value == "infinite") {
    rule.kind = ThresholdRule::Kind::kInfinite;
    return rule;
  }
  const auto colon = value.find(':');
  const std::string kind = value.substr(0, colon);
  const std::string number =
      (colon == std::string::npos) ? std::string() : value.substr(colon + 1);
  try {
    if (kind == "factor") {
      rule.kind = ThresholdRule::Kind::kResidualFactor;
      rule.value = number.empty() ? 10.0 : std::stod(number);
    } else if (kind == "absolute") {
      rule.kind = ThresholdRule::Kind::kAbsolute;
      rule.value = std::stod(number);
    } else {
      throw ConfigError("config: threshold_rule must be factor:<x>, absolute:<x> or infinite");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("config: bad threshold_rule value '" + value + "'");
  }
  return rule;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
    };
    strip(key);
    strip(value);

    try {
      if (key == "model") config.model.model = value;
      else if (key == "d") config.model.d = std::stoi(value);
      else if (key == "n") config.model.n = std::stoi(value);
      else if (key == "coupling") config.model.coupling = std::stod(value);
      else if (key == "field") config.model.field = std::stod(value);
      else if (key == "seed") config.seed = config.model.seed = std::stoull(value);
      else if (key == "d_list") config.d_list = parse_int_list(value, key);
      else if (key == "j_list") config.j_list = parse_int_list(value, key);
      else if (key == "l_list") config.l_list = parse_int_list(value, key);
      else if (key == "kappa_list") config.kappa_list = parse_double_list(value, key);
      else if (key == "epsilon") config.epsilon = std::stod(value);
      else if (key == "out") config.out_dir = value;
      else if (key == "cap") config.cap = std::stol(value);
      else if (key == "threads") config.threads = std::stoi(value);
      else if (key == "quad_nodes") config.quad_nodes = std::stoi(value);
      else if (key == "k_steps") config.k_steps = std::stoi(value);
      else if (key == "threshold_rule") config.threshold_rule = parse_threshold_rule(value);
      else if (key == "reference") {
        if (value == "maximally_mixed") config.reference = ReferenceState::kMaximallyMixed;
        else if (value == "ground_reduced") config.reference = ReferenceState::kGroundReduced;
        else throw ConfigError("config: reference must be maximally_mixed or ground_reduced");
      }
      else if (key == "q") config.q_override = std::stod(value);
      else if (key == "initial_state") config.initial_state = value;
      else if (key == "times") config.times = parse_double_list(value, key);
      else if (key == "lr_site") config.lr_site = std::stoi(value);
      else if (key == "lr_probe_sites") config.lr_probe_sites = parse_int_list(value, key);
      else if (key == "lr_times") config.lr_times = parse_double_list(value, key);
      else if (key == "fit_input") config.fit_input = value;
      else if (key == "fit_x") config.fit_x = value;
      else if (key == "fit_y") config.fit_y = value;
      else if (key == "fit_epsilon") config.fit_epsilon = std::stod(value);
      else if (key == "fit_floor") config.fit_floor = std::stod(value);
      else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  if (config.model.model != "tfim" && config.model.model != "random" &&
      config.model.model != "free")
    throw ConfigError("config: model must be tfim, random or free");
  if (config.threads < 1) throw ConfigError("config: threads must be >= 1");
  if (config.quad_nodes < 1 || config.k_steps < 1)
    throw ConfigError("config: quad_nodes and k_steps must be >= 1");
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in);
}

Vector product_state(const ChainGeometry& geo, const std::string& kind,
                     std::uint64_t seed) {
  const int n = geo.local_dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto site_vector = [&]() {
    Vector v(n);
    if (kind == "plus") {
      v.setConstant(Complex(1.0 / std::sqrt(double(n)), 0));
    } else if (kind == "zero") {
      v.setZero();
      v(0) = 1.0;
    } else if (kind == "random") {
      for (int i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
      v.normalize();
    } else {
      throw ConfigError("initial_state must be plus, zero or random");
    }
    return v;
  };

  Vector state = site_vector();
  for (int site = 2; site <= geo.sites(); ++site) {
    const Vector part = site_vector();
    Vector next(state.size() * n);
    for (Eigen::Index a = 0; a < state.size(); ++a)
      for (int i = 0; i < n; ++i) next(a * n + i) = state(a) * part(i);
    state = std::move(next);
  }
  return state;
}

double DecayFit::prefactor() const { return std::exp(log_prefactor); }

DecayFit fit_decay(const std::vector<double>& x, const std::vector<double>& y,
                   double noise_floor) {
  if (x.size() != y.size())
    throw std::invalid_argument("fit_decay: x and y must have equal length");
  std::vector<double> xs, logy;
  int excluded = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] <= 0.0 || y[i] <= noise_floor) {
      ++excluded;
      continue;
    }
    xs.push_back(x[i]);
    logy.push_back(std::log(y[i]));
  }
  if (xs.size() < 3)
    throw std::invalid_argument("fit_decay: need at least 3 usable points, have " +
                                std::to_string(xs.size()));

  const int m = static_cast<int>(xs.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = xs[i];
    rhs(i) = logy[i];
  }
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(rhs);

  DecayFit fit;
  fit.log_prefactor = beta(0);
  fit.c = -beta(1);
  fit.residual = std::sqrt((design * beta - rhs).squaredNorm() / m);
  fit.points_used = m;
  fit.excluded = excluded;
  return fit;
}

int choose_l(const DecayFit& fit, double epsilon) {
  if (fit.c <= 0.0)
    throw std::invalid_argument("choose_l: fitted decay rate is not positive");
  if (epsilon <= 0.0) throw std::invalid_argument("choose_l: epsilon must be > 0");
  const double raw = (fit.log_prefactor - std::log(epsilon)) / fit.c;
  const long l = std::lround(std::ceil(raw));
  return static_cast<int>(std::max(0L, l));
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

namespace {

NNIHamiltonian build_model_at(const ExperimentConfig& config, int d) {
  ModelSpec spec = config.model;
  spec.d = d;
  spec.seed = config.seed;
  return build_model(spec, config.cap);
}

}  // namespace

SweepResult run_blr_sweep(const ExperimentConfig& config) {
  SweepResult result;
  std::ostringstream head;
  head << "d,j,l,kappa,q,error,stage_bound,window_L_residual,window_R_residual,"
          "b_hermitize,b_clamp,b_rescale,ordering_gap\n";
  std::ostringstream stages_head;
  stages_head << "d,j,l,kappa,stage,operator,norm_error,support_lo,support_hi\n";

  struct Point {
    int d, j, l;
    double kappa;
  };
  std::vector<Point> points;
  for (int d : config.d_list)
    for (int j : config.j_list)
      for (int l : config.l_list)
        for (double kappa : config.kappa_list) points.push_back({d, j, l, kappa});

  // One diagonalization per chain length, shared read-only by the workers.
  std::map<int, NNIHamiltonian> models;
  std::map<int, EigenSystem> systems;
  for (int d : config.d_list) {
    if (models.count(d)) continue;
    try {
      NNIHamiltonian h = build_model_at(config, d);
      EigenSystem es = diagonalize(assemble(h));
      models.emplace(d, std::move(h));
      systems.emplace(d, std::move(es));
    } catch (const std::exception& e) {
      result.skipped.push_back("d=" + std::to_string(d) + ": " + e.what());
    }
  }

  struct Outcome {
    bool ok = false;
    std::string row, stages, skip_reason;
  };
  std::vector<Outcome> outcomes(points.size());

  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= points.size()) return;
      const Point& p = points[i];
      Outcome& out = outcomes[i];
      const std::string tag = "d=" + std::to_string(p.d) + " j=" + std::to_string(p.j) +
                              " l=" + std::to_string(p.l) + " kappa=" + fmt(p.kappa);
      auto model_it = models.find(p.d);
      if (model_it == models.end()) {
        out.skip_reason = tag + ": model unavailable for this d";
        continue;
      }
      try {
        BLRConfig blr_config;
        blr_config.kappa = p.kappa;
        blr_config.q_override = config.q_override;
        blr_config.quad_nodes = config.quad_nodes;
        blr_config.k_steps = config.k_steps;
        blr_config.threshold = config.threshold_rule;
        blr_config.reference = config.reference;
        const BLRFactors factors =
            assemble_blr(model_it->second, systems.at(p.d), p.j, p.l, blr_config);

        double window_l = 0, window_r = 0;
        for (const auto& diag : factors.diagnostics)
          if (diag.stage == "window") {
            if (diag.op == "L") window_l = diag.norm_error;
            if (diag.op == "R") window_r = diag.norm_error;
          }
        std::ostringstream row;
        row << p.d << ',' << p.j << ',' << p.l << ',' << fmt(p.kappa) << ','
            << fmt(factors.q) << ',' << fmt(factors.error) << ','
            << fmt(factors.stage_bound) << ',' << fmt(window_l) << ','
            << fmt(window_r) << ',' << fmt(factors.b_corrections.hermitize) << ','
            << fmt(factors.b_corrections.clamp) << ','
            << fmt(factors.b_corrections.rescale) << ','
            << fmt(factors.ordering_gap) << '\n';
        std::ostringstream stage_rows;
        for (const auto& diag : factors.diagnostics)
          stage_rows << p.d << ',' << p.j << ',' << p.l << ',' << fmt(p.kappa) << ','
                     << diag.stage << ',' << diag.op << ',' << fmt(diag.norm_error)
                     << ',' << diag.support.lo << ',' << diag.support.hi << '\n';
        out.ok = true;
        out.row = row.str();
        out.stages = stage_rows.str();
      } catch (const std::exception& e) {
        out.skip_reason = tag + ": " + e.what();
      }
    }
  };

  const int thread_count =
      std::max(1, std::min<int>(config.threads, static_cast<int>(points.size())));
  if (thread_count > 1) {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  } else {
    worker();
  }

  std::string csv = head.str();
  std::string stages = stages_head.str();
  for (const auto& out : outcomes) {
    if (out.ok) {
      csv += out.row;
      stages += out.stages;
    } else if (!out.skip_reason.empty()) {
      result.skipped.push_back(out.skip_reason);
    }
  }
  result.csv = std::move(csv);
  result.stages_csv = std::move(stages);
  return result;
}

std::string run_gap_scan(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "d,gap,degeneracy,interaction_strength\n";
  for (int d : config.d_list) {
    const NNIHamiltonian h = build_model_at(config, d);
    const EigenSystem es = diagonalize(assemble(h));
    out << d << ',' << fmt(es.gap) << ',' << es.degeneracy << ','
        << fmt(interaction_strength(h)) << '\n';
  }
  return out.str();
}

std::string run_evolution_ranks(const ExperimentConfig& config) {
  const NNIHamiltonian h = build_model_at(config, config.model.d);
  const EigenSystem es = diagonalize(assemble(h));
  const Vector psi = product_state(h.geo, config.initial_state, config.seed);
  const Matrix p0 = psi * psi.adjoint();
  const int cut = h.geo.sites() / 2;

  std::vector<double> times = config.times;
  if (times.empty()) times = {0.0, 0.5, 1.0, 2.0};

  std::ostringstream out;
  out << "time,cut,epsilon,rank\n";
  for (double t : times) {
    const Matrix pt = heisenberg_evolve(es, p0, t);
    const CutSpectrum cs = operator_cut_rank(pt, h.geo, cut, config.epsilon);
    out << fmt(t) << ',' << cut << ',' << fmt(config.epsilon) << ',' << cs.rank << '\n';
  }
  return out.str();
}

LRConeResult run_lr_cone(const ExperimentConfig& config) {
  const NNIHamiltonian h = build_model_at(config, config.model.d);
  const ChainGeometry& geo = h.geo;
  const EigenSystem es = diagonalize(assemble(h));
  const int n = geo.local_dim();

  // Unit-norm Hermitian single-site probe.
  Matrix probe_kernel = Matrix::Zero(n, n);
  probe_kernel(0, 0) = 1.0;
  probe_kernel(1, 1) = -1.0;

  if (config.lr_site < 1 || config.lr_site > geo.sites())
    throw ConfigError("lr_site outside the chain");
  const LocalOperator a(SupportInterval{config.lr_site, config.lr_site}, probe_kernel, n);

  std::vector<int> probe_sites = config.lr_probe_sites;
  if (probe_sites.empty())
    for (int s = config.lr_site + 2; s <= std::min(geo.sites() - 1, config.lr_site + 5); ++s)
      probe_sites.push_back(s);
  std::vector<LocalOperator> probes;
  for (int s : probe_sites) {
    if (s < 1 || s > geo.sites()) throw ConfigError("lr_probe_sites outside the chain");
    probes.emplace_back(SupportInterval{s, s}, probe_kernel, n);
  }

  std::vector<double> times = config.lr_times;
  if (times.empty()) times = {0.0, 0.25, 0.5, 0.75, 1.0};

  const LRConeProfile profile = lr_cone_profile(h, es, a, probes, times);

  LRConeResult result;
  std::ostringstream profile_csv;
  write_lr_cone_csv(profile_csv, profile);
  result.profile_csv = profile_csv.str();

  std::ostringstream fit_csv;
  fit_csv << "prefactor,decay,velocity,residual,points_used\n";
  try {
    const LRConstants fit = fit_lr_constants(profile);
    fit_csv << fmt(fit.prefactor) << ',' << fmt(fit.decay) << ',' << fmt(fit.velocity)
            << ',' << fmt(fit.residual) << ',' << fit.points_used << '\n';
  } catch (const std::exception& e) {
    result.notes.push_back(std::string("lr fit not produced: ") + e.what());
  }
  result.fit_csv = fit_csv.str();
  return result;
}

std::string run_rank_scan(const ExperimentConfig& config) {
  ModelSpec spec = config.model;
  spec.seed = config.seed;
  const auto rows = rank_saturation_scan(spec, config.epsilon, config.d_list, config.cap);
  std::ostringstream out;
  out << "d,cut,epsilon,rank\n";
  for (const auto& row : rows)
    out << row.d << ',' << row.cut << ',' << fmt(row.epsilon) << ',' << row.rank << '\n';
  return out.str();
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("fit: cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_list(line));
  }
  if (rows.empty()) throw ConfigError("fit: " + path + " is empty");
  return rows;
}

}  // namespace

FitOutcome run_fit(const ExperimentConfig& config) {
  if (config.fit_input.empty()) throw ConfigError("fit: fit_input is required");
  const auto rows = read_csv(config.fit_input);

  const auto& header = rows.front();
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ConfigError("fit: column '" + name + "' not found in " + config.fit_input);
  };
  const std::size_t xi = column(config.fit_x);
  const std::size_t yi = column(config.fit_y);

  std::vector<double> x, y;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() <= std::max(xi, yi))
      throw ConfigError("fit: short row in " + config.fit_input);
    try {
      x.push_back(std::stod(rows[r][xi]));
      y.push_back(std::stod(rows[r][yi]));
    } catch (const std::exception&) {
      throw ConfigError("fit: non-numeric data in " + config.fit_input);
    }
  }

  FitOutcome outcome;
  outcome.fit = fit_decay(x, y, config.fit_floor);

  std::ostringstream csv;
  csv << "c,log_prefactor,prefactor,residual,points_used,excluded,chosen_l\n";
  csv << fmt(outcome.fit.c) << ',' << fmt(outcome.fit.log_prefactor) << ','
      << fmt(outcome.fit.prefactor()) << ',' << fmt(outcome.fit.residual) << ','
      << outcome.fit.points_used << ',' << outcome.fit.excluded << ',';
  if (config.fit_epsilon && outcome.fit.c > 0) {
    outcome.chosen_l = choose_l(outcome.fit, *config.fit_epsilon);
    csv << *outcome.chosen_l;
  }
  csv << '\n';
  outcome.csv = csv.str();
  return outcome;
}

std::string gnuplot_script(const std::string& csv_name, const std::string& x,
                           const std::string& y, const std::string& title) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set logscale y\n"
      << "set xlabel '" << x << "'\n"
      << "set ylabel '" << y << "'\n"
      << "set title '" << title << "'\n"
      << "plot '" << csv_name << "' using '" << x << "':'" << y
      << "' with linespoints\n";
  return out.str();
}

}  // namespace gsplab
