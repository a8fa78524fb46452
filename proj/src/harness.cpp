#include "hamlearn/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hamlearn {

namespace {

std::string fmt_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header)
      : path_(path.string()), out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file " + path_);
    out_ << header << '\n';
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << field_text(fields), first = false), ...);
    out_ << '\n';
  }

  const std::string& path() const { return path_; }

 private:
  static std::string field_text(Real v) { return fmt_real(v); }
  static std::string field_text(int v) { return std::to_string(v); }
  static std::string field_text(long v) { return std::to_string(v); }
  static std::string field_text(long long v) { return std::to_string(v); }
  static std::string field_text(std::size_t v) { return std::to_string(v); }
  static std::string field_text(const std::string& v) { return v; }
  static std::string field_text(const char* v) { return v; }

  std::string path_;
  std::ofstream out_;
};

RealVector iid_normal(Eigen::Index size, Real sigma, Rng& rng) {
  std::normal_distribution<Real> gauss(0.0, 1.0);
  RealVector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = sigma * gauss(rng);
  return v;
}

}  // namespace

const char* scenario_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::kMultistateGap: return "multistate_gap";
    case Scenario::kControlsSweep: return "controls_sweep";
    case Scenario::kPosteriorContraction: return "posterior_contraction";
    case Scenario::kIsingExample: return "ising_example";
    case Scenario::kThm4Coverage: return "thm4_coverage";
    case Scenario::kBoundsCheck: return "bounds_check";
  }
  return "unknown";
}

std::optional<Scenario> scenario_from_name(const std::string& name) {
  for (const Scenario s :
       {Scenario::kMultistateGap, Scenario::kControlsSweep, Scenario::kPosteriorContraction,
        Scenario::kIsingExample, Scenario::kThm4Coverage, Scenario::kBoundsCheck}) {
    if (name == scenario_name(s)) return s;
  }
  return std::nullopt;
}

const char* bounds_trial_kind_name(BoundsTrialKind kind) {
  switch (kind) {
    case BoundsTrialKind::kExact: return "exact";
    case BoundsTrialKind::kTimeAverage: return "time_average";
    case BoundsTrialKind::kEntryNoise: return "entry_noise";
    case BoundsTrialKind::kBoth: return "both";
  }
  return "unknown";
}

ScenarioConfig default_config(Scenario scenario) {
  ScenarioConfig cfg;
  cfg.scenario = scenario;
  switch (scenario) {
    case Scenario::kMultistateGap:
      cfg.n = 6;
      cfg.basis_kind = BasisKind::kBody;
      cfg.ensemble_size = 20;
      cfg.schedule.state_counts = {1, 2, 4};
      cfg.schedule.disorder_sigma = 0.1;
      break;
    case Scenario::kControlsSweep:
      cfg.n = 6;
      cfg.basis_kind = BasisKind::kLocalChain;
      cfg.prior.sigma_c = 0.5;
      cfg.prior.sigma_v = 1e-3;
      cfg.schedule.control_counts = {1, 2, 4, 8};
      cfg.schedule.noise_levels = {1e-3, 1e-2, 1e-1};
      cfg.schedule.runs = 20;
      break;
    case Scenario::kPosteriorContraction:
      cfg.n = 8;
      cfg.basis_kind = BasisKind::kLocalChain;
      cfg.prior.sigma_c = 0.1;
      cfg.prior.sigma_v = 1e-3;
      cfg.schedule.num_controls = 4;
      cfg.schedule.runs = 100;
      cfg.noise.sigma_e = 1e-3;
      break;
    case Scenario::kIsingExample:
      cfg.n = 4;
      cfg.basis_kind = BasisKind::kBody;
      cfg.prior.sigma_c = 0.1;
      cfg.prior.mean = "ising";
      cfg.noise.sigma_e = 1e-4;
      cfg.schedule.nodes = 24;
      break;
    case Scenario::kThm4Coverage:
      cfg.n = 4;
      cfg.schedule.trials = 200;
      cfg.schedule.eps = 0.1;
      cfg.schedule.delta = 0.05;
      break;
    case Scenario::kBoundsCheck:
      cfg.n = 4;
      cfg.basis_kind = BasisKind::kLocalChain;
      cfg.schedule.trials = 200;
      break;
  }
  return cfg;
}

namespace {

struct ConfigIssues {
  std::vector<std::string> errors;
  void add(const std::string& e) { errors.push_back(e); }
};

template <typename T>
bool read_field(const nlohmann::json& j, const char* key, T& out, ConfigIssues& issues,
                const char* expectation) {
  if (!j.contains(key)) return false;
  try {
    out = j.at(key).get<T>();
    return true;
  } catch (const nlohmann::json::exception&) {
    issues.add(std::string(key) + ": expected " + expectation);
    return false;
  }
}

ScenarioConfig parse_config(const nlohmann::json& j, ConfigIssues& issues) {
  std::string name;
  if (!read_field(j, "scenario", name, issues, "string")) {
    issues.add("scenario: required");
    return ScenarioConfig{};
  }
  const auto scenario = scenario_from_name(name);
  if (!scenario) {
    issues.add("scenario: unknown name '" + name + "'");
    return ScenarioConfig{};
  }
  ScenarioConfig cfg = default_config(*scenario);

  read_field(j, "n", cfg.n, issues, "integer");
  read_field(j, "k", cfg.k, issues, "integer");
  read_field(j, "ensemble_size", cfg.ensemble_size, issues, "integer");
  read_field(j, "dense_cap", cfg.dense_cap, issues, "integer");
  std::string basis;
  if (read_field(j, "basis", basis, issues, "string")) {
    if (basis == "k_body") {
      cfg.basis_kind = BasisKind::kBody;
    } else if (basis == "k_local_chain") {
      cfg.basis_kind = BasisKind::kLocalChain;
    } else {
      issues.add("basis: must be k_body or k_local_chain");
    }
  }
  if (j.contains("seed")) {
    std::uint64_t seed = 0;
    if (read_field(j, "seed", seed, issues, "unsigned integer")) {
      cfg.seed = seed;
      cfg.seed_set = true;
    }
  }
  if (j.contains("noise")) {
    const auto& jn = j.at("noise");
    if (!jn.is_object()) {
      issues.add("noise: expected object");
    } else {
      read_field(jn, "sigma_e", cfg.noise.sigma_e, issues, "number");
      read_field(jn, "flip_rate", cfg.noise.default_flip_rate, issues, "number");
    }
  }
  if (j.contains("prior")) {
    const auto& jp = j.at("prior");
    if (!jp.is_object()) {
      issues.add("prior: expected object");
    } else {
      read_field(jp, "sigma_c", cfg.prior.sigma_c, issues, "number");
      read_field(jp, "sigma_v", cfg.prior.sigma_v, issues, "number");
      read_field(jp, "mean", cfg.prior.mean, issues, "string");
    }
  }
  if (j.contains("schedule")) {
    const auto& js = j.at("schedule");
    if (!js.is_object()) {
      issues.add("schedule: expected object");
    } else {
      ScheduleConfig& s = cfg.schedule;
      read_field(js, "state_counts", s.state_counts, issues, "integer array");
      read_field(js, "control_counts", s.control_counts, issues, "integer array");
      read_field(js, "num_controls", s.num_controls, issues, "integer");
      read_field(js, "noise_levels", s.noise_levels, issues, "number array");
      read_field(js, "runs", s.runs, issues, "integer");
      read_field(js, "trials", s.trials, issues, "integer");
      read_field(js, "time", s.time, issues, "number");
      read_field(js, "nodes", s.nodes, issues, "integer");
      read_field(js, "shots", s.shots, issues, "integer");
      read_field(js, "eps", s.eps, issues, "number");
      read_field(js, "delta", s.delta, issues, "number");
      read_field(js, "disorder_sigma", s.disorder_sigma, issues, "number");
      read_field(js, "prior_draws", s.prior_draws, issues, "integer");
      read_field(js, "dump_shots", s.dump_shots, issues, "boolean");
    }
  }

  // Range checks.
  if (cfg.n < 1) issues.add("n: must be >= 1");
  if (cfg.k < 1 || cfg.k > cfg.n) issues.add("k: must satisfy 1 <= k <= n");
  if (cfg.ensemble_size < 1) issues.add("ensemble_size: must be >= 1");
  if (cfg.noise.sigma_e < 0) issues.add("noise.sigma_e: must be >= 0");
  if (cfg.noise.default_flip_rate < 0 || cfg.noise.default_flip_rate > 0.5) {
    issues.add("noise.flip_rate: must be in [0, 0.5]");
  }
  if (cfg.prior.sigma_c < 0) issues.add("prior.sigma_c: must be >= 0");
  if (cfg.prior.sigma_v < 0) issues.add("prior.sigma_v: must be >= 0");
  if (cfg.prior.mean != "zero" && cfg.prior.mean != "ising") {
    issues.add("prior.mean: must be zero or ising");
  }
  if (cfg.schedule.runs < 1) issues.add("schedule.runs: must be >= 1");
  if (cfg.schedule.trials < 1) issues.add("schedule.trials: must be >= 1");
  if (cfg.schedule.time <= 0) issues.add("schedule.time: must be > 0");
  if (cfg.schedule.nodes < 1) issues.add("schedule.nodes: must be >= 1");
  if (cfg.schedule.shots < 0) issues.add("schedule.shots: must be >= 0");
  if (!(cfg.schedule.eps > 0 && cfg.schedule.eps < 1)) {
    issues.add("schedule.eps: must be in (0, 1)");
  }
  if (!(cfg.schedule.delta > 0 && cfg.schedule.delta < 1)) {
    issues.add("schedule.delta: must be in (0, 1)");
  }
  if (cfg.schedule.disorder_sigma < 0) issues.add("schedule.disorder_sigma: must be >= 0");
  if (cfg.schedule.prior_draws < 0) issues.add("schedule.prior_draws: must be >= 0");
  for (const int c : cfg.schedule.state_counts) {
    if (c < 1) issues.add("schedule.state_counts: entries must be >= 1");
  }
  for (const int c : cfg.schedule.control_counts) {
    if (c < 1) issues.add("schedule.control_counts: entries must be >= 1");
  }
  if (cfg.schedule.num_controls < 0) issues.add("schedule.num_controls: must be >= 0");
  for (const Real lvl : cfg.schedule.noise_levels) {
    if (lvl < 0) issues.add("schedule.noise_levels: entries must be >= 0");
  }
  if (cfg.scenario == Scenario::kIsingExample && cfg.n != 4) {
    issues.add("ising_example: n is fixed at 4");
  }
  // The dense cap guards memory, not statistics: fail fast on any request
  // beyond it rather than attempting the allocation.
  if (cfg.dense_cap < 1 || cfg.dense_cap > 16) issues.add("dense_cap: must be in [1, 16]");
  if (cfg.n > cfg.dense_cap) {
    issues.add("n: exceeds dense simulation cap (resource limit)");
  }
  return cfg;
}

}  // namespace

ScenarioConfig config_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ConfigIssues issues;
  ScenarioConfig cfg = parse_config(j, issues);
  if (!issues.errors.empty()) throw ConfigError(issues.errors.front());
  return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json_text(buffer.str());
}

std::vector<std::string> validate_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    return {std::string("config is not valid JSON: ") + e.what()};
  }
  ConfigIssues issues;
  parse_config(j, issues);
  return issues.errors;
}

std::string config_to_canonical_json(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["scenario"] = scenario_name(cfg.scenario);
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  j["basis"] = (cfg.basis_kind == BasisKind::kBody) ? "k_body" : "k_local_chain";
  j["ensemble_size"] = cfg.ensemble_size;
  j["dense_cap"] = cfg.dense_cap;
  j["seed"] = cfg.seed;
  j["noise"] = {{"sigma_e", cfg.noise.sigma_e}, {"flip_rate", cfg.noise.default_flip_rate}};
  j["prior"] = {{"sigma_c", cfg.prior.sigma_c},
                {"sigma_v", cfg.prior.sigma_v},
                {"mean", cfg.prior.mean}};
  j["schedule"] = {{"state_counts", cfg.schedule.state_counts},
                   {"control_counts", cfg.schedule.control_counts},
                   {"num_controls", cfg.schedule.num_controls},
                   {"noise_levels", cfg.schedule.noise_levels},
                   {"runs", cfg.schedule.runs},
                   {"trials", cfg.schedule.trials},
                   {"time", cfg.schedule.time},
                   {"nodes", cfg.schedule.nodes},
                   {"shots", cfg.schedule.shots},
                   {"eps", cfg.schedule.eps},
                   {"delta", cfg.schedule.delta},
                   {"disorder_sigma", cfg.schedule.disorder_sigma},
                   {"prior_draws", cfg.schedule.prior_draws},
                   {"dump_shots", cfg.schedule.dump_shots}};
  return j.dump();
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  const std::string text = config_to_canonical_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

RealVector ising_mean_couplings(const PauliBasis& basis) {
  RealVector c = RealVector::Zero(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    const PauliString& p = basis[i];
    if (p.weight() != 2) continue;
    if (p.x_bits() == p.support_mask() && p.z_bits() == 0) c(i) = 1.0;  // X..X pair
  }
  return c;
}

HamiltonianSpec sample_ising_disordered(const PauliBasis& basis, Real disorder_sigma,
                                        Rng& rng) {
  RealVector c = ising_mean_couplings(basis);
  std::normal_distribution<Real> gauss(0.0, 1.0);
  for (int i = 0; i < basis.size(); ++i) {
    if (basis[i].weight() == 2) c(i) += disorder_sigma * gauss(rng);
  }
  return HamiltonianSpec(basis, std::move(c));
}

HamiltonianSpec sample_iid_chain(int n, int k, Rng& rng) {
  PauliBasis basis = enumerate_k_local_chain(n, k);
  RealVector c = iid_normal(basis.size(), 1.0, rng);
  return HamiltonianSpec(basis, std::move(c));
}

namespace {

DensityState ground_state(const HamiltonianSpec& spec, int cap) {
  return eigenstates(spec, cap).front().state;
}

}  // namespace

ControlFieldRun run_control_field_inference(int n, int k, int num_controls, Real sigma_c,
                                            Real sigma_v, Real sigma_e, Rng& rng,
                                            int dense_cap) {
  const PauliBasis basis = enumerate_k_local_chain(n, k);
  const int m = basis.size();

  const RealVector c_bar = iid_normal(m, 1.0, rng);
  const RealVector c_true = c_bar + iid_normal(m, sigma_c, rng);
  std::vector<RealVector> v_bar, v_true;
  for (int i = 0; i < num_controls; ++i) {
    v_bar.push_back(iid_normal(m, 1.0, rng));
    v_true.push_back(v_bar.back() + iid_normal(m, sigma_v, rng));
  }

  NoiseSpec noise;
  noise.sigma_e = sigma_e;
  const ConstraintMatrix k0 = noisy_k_matrix(
      k_matrix(ground_state(HamiltonianSpec(basis, c_true), dense_cap), basis), noise, rng);
  std::vector<ConstraintMatrix> ks;
  for (int i = 0; i < num_controls; ++i) {
    ks.push_back(noisy_k_matrix(
        k_matrix(ground_state(HamiltonianSpec(basis, c_true + v_true[static_cast<std::size_t>(i)]),
                              dense_cap),
                 basis),
        noise, rng));
  }

  const Eigen::Index dim = static_cast<Eigen::Index>(num_controls + 1) * m;
  RealVector mean(dim);
  mean.head(m) = c_bar;
  RealMatrix cov = RealMatrix::Zero(dim, dim);
  cov.topLeftCorner(m, m) = sigma_c * sigma_c * RealMatrix::Identity(m, m);
  for (int i = 1; i <= num_controls; ++i) {
    mean.segment(Eigen::Index(i) * m, m) = v_bar[static_cast<std::size_t>(i - 1)];
    cov.block(Eigen::Index(i) * m, Eigen::Index(i) * m, m, m) =
        sigma_v * sigma_v * RealMatrix::Identity(m, m);
  }

  ControlFieldRun run;
  run.c_true = c_true;
  run.prior_mean_c = c_bar;
  run.prior_error_c = std::sqrt(static_cast<Real>(m)) * sigma_c;

  GaussianBelief belief(mean, cov);
  belief = online_update(belief, control_row_bare(k0, num_controls), sigma_e);
  for (int i = 1; i <= num_controls; ++i) {
    belief = online_update(
        belief, control_row(ks[static_cast<std::size_t>(i - 1)], i, num_controls), sigma_e);
  }

  run.posterior_mean_c = belief.mean.head(m);
  run.posterior_two_sigma_c =
      2.0 * belief.covariance.topLeftCorner(m, m).diagonal().cwiseSqrt();
  run.posterior_error_c = std::sqrt(belief.covariance.topLeftCorner(m, m).trace());
  int covered = 0;
  for (int j = 0; j < m; ++j) {
    if (std::abs(c_true(j) - run.posterior_mean_c(j)) <= run.posterior_two_sigma_c(j)) {
      ++covered;
    }
  }
  run.coverage_fraction = static_cast<Real>(covered) / m;
  return run;
}

BoundsTrial run_bounds_trial(BoundsTrialKind kind, int n, int k, Rng& rng, int dense_cap) {
  const PauliBasis basis = enumerate_k_local_chain(n, k);
  const int m = basis.size();

  // Resample until the single-ground-state constraint matrix is gapped; the
  // bound is vacuous (>= 1) otherwise and the trial uninformative.
  HamiltonianSpec spec(basis, RealVector::Zero(m));
  DensityState ground = DensityState::maximally_mixed(n);
  bool found = false;
  for (int attempt = 0; attempt < 50 && !found; ++attempt) {
    spec = sample_iid_chain(n, k, rng);
    ground = ground_state(spec, dense_cap);
    const SpectralReport rep = spectral_report(k_matrix(ground, basis));
    if (rep.gap > 1e-8 && rep.kernel_dim_estimate == 1) found = true;
  }
  if (!found) throw NumericalError("run_bounds_trial: no gapped instance found");

  std::uniform_real_distribution<Real> unit(0.0, 1.0);
  DensityState input_state = ground;
  if (kind == BoundsTrialKind::kTimeAverage || kind == BoundsTrialKind::kBoth) {
    const Real p = 0.02 + 0.18 * unit(rng);
    const DensityState junk = DensityState::random_mixed(n, rng);
    const ComplexMatrix mixed =
        (1.0 - p) * ground.matrix() + p * junk.matrix();
    const DensityState rho0 = DensityState::from_valid_matrix(n, mixed);
    const Real t = 5.0 + 15.0 * unit(rng);
    input_state = time_averaged_state(rho0, spec, t, 24, dense_cap);
  }

  BoundsTrial trial;
  trial.kind = kind;
  trial.delta = commutator_trace_norm(spec, input_state, dense_cap);

  ConstraintMatrix kmat = k_matrix(input_state, basis);
  if (kind == BoundsTrialKind::kEntryNoise || kind == BoundsTrialKind::kBoth) {
    trial.eps = std::pow(10.0, -4.0 + 2.0 * unit(rng));  // in [1e-4, 1e-2]
    for (int j = 0; j < m; ++j) {
      for (int l = j + 1; l < m; ++l) {
        const Real e = trial.eps * (2.0 * unit(rng) - 1.0);
        kmat.entries(j, l) += e;
        kmat.entries(l, j) -= e;
      }
    }
  }

  const SpectralReport rep = spectral_report(kmat);
  trial.gap = rep.gap;
  const KernelEstimate est = kernel_estimate(kmat.entries);
  trial.measured_infidelity = 1.0 - fidelity(spec.couplings, est.vector);
  const Real c1 = spec.couplings.lpNorm<1>();
  const Real c2 = spec.couplings.norm();
  trial.bound = (trial.eps > 0)
                    ? cor1_infidelity_bound(m, trial.delta, trial.eps, trial.gap, c1, c2)
                    : thm3_infidelity_bound(m, trial.delta, trial.gap, c2);
  trial.within_bound = (kind == BoundsTrialKind::kExact)
                           ? trial.measured_infidelity <= 1e-8
                           : trial.measured_infidelity <= trial.bound;
  return trial;
}

// --- scenario runners --------------------------------------------------

namespace {

namespace fs = std::filesystem;

PauliBasis basis_for(const ScenarioConfig& cfg) {
  return cfg.basis_kind == BasisKind::kBody ? enumerate_k_body(cfg.n, cfg.k)
                                            : enumerate_k_local_chain(cfg.n, cfg.k);
}

void run_multistate_gap(const ScenarioConfig& cfg, const fs::path& dir,
                        std::vector<std::string>& files) {
  const PauliBasis basis = basis_for(cfg);
  CsvFile sv_file(dir / "singular_values.csv", "instance,N,sv_index,sigma");
  CsvFile gap_file(dir / "gaps.csv", "instance,N,gap");
  for (int instance = 0; instance < cfg.ensemble_size; ++instance) {
    Rng rng = make_stream_rng(cfg.seed, static_cast<std::uint64_t>(instance));
    const HamiltonianSpec spec =
        sample_ising_disordered(basis, cfg.schedule.disorder_sigma, rng);
    const auto eig = eigenstates(spec, cfg.dense_cap);
    std::vector<ConstraintMatrix> ks;
    for (const int count : cfg.schedule.state_counts) {
      ks.clear();
      for (int i = 0; i < count && i < static_cast<int>(eig.size()); ++i) {
        ks.push_back(k_matrix(eig[static_cast<std::size_t>(i)].state, basis));
      }
      const ForwardOperator a = stack_states(ks);
      const SpectralReport rep = spectral_report(a);
      for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i) {
        sv_file.row(instance, count, static_cast<int>(i), rep.singular_values(i));
      }
      gap_file.row(instance, count, rep.gap);
    }
  }
  files.push_back(sv_file.path());
  files.push_back(gap_file.path());
}

void run_controls_sweep(const ScenarioConfig& cfg, const fs::path& dir,
                        std::vector<std::string>& files) {
  CsvFile detail(dir / "errors_by_seed.csv", "noise_level,N,seed,method,error");
  CsvFile agg(dir / "errors.csv", "noise_level,method,N,error");
  const PauliBasis basis = enumerate_k_local_chain(cfg.n, cfg.k);
  const int m = basis.size();
  for (std::size_t li = 0; li < cfg.schedule.noise_levels.size(); ++li) {
    const Real sigma_base = cfg.schedule.noise_levels[li];
    // Baseline spends the whole budget on the bare K; with N controls each
    // of the N+1 settings gets 1/(N+1) of the shots, so sigma scales by
    // sqrt(N+1).
    Real baseline_sum = 0.0;
    for (int seed_i = 0; seed_i < cfg.schedule.runs; ++seed_i) {
      // Distinct substream per (level, method, N, seed).
      Rng rng = make_stream_rng(cfg.seed, 1000000ULL * (li + 1) + seed_i);
      const RealVector c_bar = iid_normal(m, 1.0, rng);
      const RealVector c_true = c_bar + iid_normal(m, cfg.prior.sigma_c, rng);
      NoiseSpec noise;
      noise.sigma_e = sigma_base;
      const ConstraintMatrix k_bare = noisy_k_matrix(
          k_matrix(ground_state(HamiltonianSpec(basis, c_true), cfg.dense_cap), basis),
          noise, rng);
      const KernelEstimate est =
          kernel_estimate(k_bare.entries, c_true.norm(), &c_true);
      const Real err = (est.vector - c_true).norm();
      baseline_sum += err;
      detail.row(sigma_base, 0, seed_i, "baseline", err);
    }
    agg.row(sigma_base, "baseline", 0, baseline_sum / cfg.schedule.runs);

    for (const int num_controls : cfg.schedule.control_counts) {
      Real bhl_expected_sum = 0.0, bhl_actual_sum = 0.0, prior_sum = 0.0;
      const Real sigma_split = sigma_base * std::sqrt(Real(num_controls + 1));
      for (int seed_i = 0; seed_i < cfg.schedule.runs; ++seed_i) {
        Rng rng = make_stream_rng(cfg.seed, 1000000ULL * (li + 1) +
                                                10000ULL * (num_controls + 1) + seed_i);
        const ControlFieldRun run = run_control_field_inference(
            cfg.n, cfg.k, num_controls, cfg.prior.sigma_c, cfg.prior.sigma_v,
            sigma_split, rng, cfg.dense_cap);
        const Real actual = (run.posterior_mean_c - run.c_true).norm();
        bhl_expected_sum += run.posterior_error_c;
        bhl_actual_sum += actual;
        prior_sum += run.prior_error_c;
        detail.row(sigma_base, num_controls, seed_i, "bhl_expected", run.posterior_error_c);
        detail.row(sigma_base, num_controls, seed_i, "bhl_actual", actual);
      }
      agg.row(sigma_base, "bhl_expected", num_controls,
              bhl_expected_sum / cfg.schedule.runs);
      agg.row(sigma_base, "bhl_actual", num_controls, bhl_actual_sum / cfg.schedule.runs);
      agg.row(sigma_base, "prior", num_controls, prior_sum / cfg.schedule.runs);
    }
  }
  files.push_back(agg.path());
  files.push_back(detail.path());
}

void run_posterior_contraction(const ScenarioConfig& cfg, const fs::path& dir,
                               std::vector<std::string>& files) {
  const PauliBasis basis = enumerate_k_local_chain(cfg.n, cfg.k);
  CsvFile couplings(dir / "couplings.csv",
                    "run,coupling_index,pauli_string,true_value,prior_mean,"
                    "posterior_mean,posterior_2sigma");
  CsvFile summary(dir / "summary.csv", "run,coverage_fraction,prior_error,posterior_error");
  for (int run_i = 0; run_i < cfg.schedule.runs; ++run_i) {
    Rng rng = make_stream_rng(cfg.seed, static_cast<std::uint64_t>(run_i));
    const ControlFieldRun run = run_control_field_inference(
        cfg.n, cfg.k, cfg.schedule.num_controls, cfg.prior.sigma_c, cfg.prior.sigma_v,
        cfg.noise.sigma_e, rng, cfg.dense_cap);
    for (int j = 0; j < basis.size(); ++j) {
      couplings.row(run_i, j, basis[j].to_string(), run.c_true(j), run.prior_mean_c(j),
                    run.posterior_mean_c(j), run.posterior_two_sigma_c(j));
    }
    summary.row(run_i, run.coverage_fraction, run.prior_error_c, run.posterior_error_c);
  }
  files.push_back(couplings.path());
  files.push_back(summary.path());
}

DensityState random_product_state(int n, Rng& rng) {
  std::uniform_real_distribution<Real> unit(0.0, 1.0);
  ComplexVector ket = ComplexVector::Ones(1);
  for (int site = 0; site < n; ++site) {
    const Real theta = std::acos(1.0 - 2.0 * unit(rng));
    const Real phi = 2.0 * M_PI * unit(rng);
    Eigen::Vector2cd local;
    local << Complex(std::cos(theta / 2.0), 0),
        std::exp(Complex(0, phi)) * std::sin(theta / 2.0);
    ComplexVector next(ket.size() * 2);
    next.head(ket.size()) = local(0) * ket;
    next.tail(ket.size()) = local(1) * ket;
    ket = std::move(next);
  }
  return DensityState::pure(n, ket);
}

void run_ising_example(const ScenarioConfig& cfg, const fs::path& dir,
                       std::vector<std::string>& files) {
  const PauliBasis basis = enumerate_k_body(4, 2);
  const int m = basis.size();
  Rng rng = make_stream_rng(cfg.seed, 0);

  const RealVector prior_mean = ising_mean_couplings(basis);
  const Real sigma_c = cfg.prior.sigma_c;
  const RealVector c_true = prior_mean + iid_normal(m, sigma_c, rng);
  const HamiltonianSpec truth(basis, c_true);
  const SpectralDecomposition sd_truth = diagonalize(truth, cfg.dense_cap);

  // Spectra: prior mean, truth, and an ensemble of prior draws.
  CsvFile spectra(dir / "spectra.csv", "source,draw,level,energy");
  const HamiltonianSpec prior_h(basis, prior_mean);
  const SpectralDecomposition sd_prior = diagonalize(prior_h, cfg.dense_cap);
  for (Eigen::Index l = 0; l < sd_prior.eigenvalues.size(); ++l) {
    spectra.row("prior_mean", 0, static_cast<int>(l), sd_prior.eigenvalues(l));
  }
  for (Eigen::Index l = 0; l < sd_truth.eigenvalues.size(); ++l) {
    spectra.row("truth", 0, static_cast<int>(l), sd_truth.eigenvalues(l));
  }
  for (int draw = 0; draw < cfg.schedule.prior_draws; ++draw) {
    const HamiltonianSpec sample(basis, prior_mean + iid_normal(m, sigma_c, rng));
    const SpectralDecomposition sd = diagonalize(sample, cfg.dense_cap);
    for (Eigen::Index l = 0; l < sd.eigenvalues.size(); ++l) {
      spectra.row("prior_draw", draw + 1, static_cast<int>(l), sd.eigenvalues(l));
    }
  }
  files.push_back(spectra.path());

  // Commutator decay of quadrature time averages for the two structured
  // superpositions and a random product state.
  ComplexVector gs_ket = ComplexVector::Zero(16);
  for (const int idx : {1, 4, 11, 14}) gs_ket(idx) = Complex(1, 0);
  ComplexVector es_ket = ComplexVector::Zero(16);
  for (const int idx : {0, 3, 5, 6, 9, 10, 12, 15}) es_ket(idx) = Complex(1, 0);
  const std::vector<std::pair<std::string, DensityState>> decay_states = {
      {"gs", DensityState::pure(4, gs_ket)},
      {"es", DensityState::pure(4, es_ket)},
      {"product", random_product_state(4, rng)},
  };
  const Real h_norm = operator_norm_hermitian(dense_hamiltonian(truth, cfg.dense_cap));
  CsvFile decay(dir / "commutator_decay.csv", "state,time,commutator_norm");
  for (const auto& [label, state] : decay_states) {
    for (int i = 1; i <= 60; ++i) {
      const Real t = 0.5 * i;
      // Enough nodes that the quadrature error stays far below the 1/t trend.
      const int nodes =
          std::max(cfg.schedule.nodes, static_cast<int>(std::ceil(0.75 * h_norm * t)) + 4);
      const DensityState avg = time_averaged_state(state, sd_truth, t, nodes);
      decay.row(label, t, commutator_trace_norm(truth, avg, cfg.dense_cap));
    }
  }
  files.push_back(decay.path());

  // Online reconstruction from the 16 time-averaged prior eigenstates.
  const auto prior_eigs = eigenstates(prior_h, cfg.dense_cap);
  GaussianBelief belief(prior_mean, sigma_c * sigma_c * RealMatrix::Identity(m, m));
  for (const Eigenstate& e : prior_eigs) {
    const DensityState avg =
        time_averaged_state(e.state, sd_truth, cfg.schedule.time, cfg.schedule.nodes);
    const ConstraintMatrix kmat = k_matrix(avg, basis);
    const Real delta = commutator_trace_norm(truth, avg, cfg.dense_cap);
    const ForwardOperator a = single_operator(kmat);
    // State-preparation residual: each entry of K c is bounded by the
    // measured commutator norm, folded in as extra diagonal noise.
    ApproxErrorCov err = approx_error_covariance(belief, cfg.noise.sigma_e, a);
    err.matrix.diagonal().array() += delta * delta;
    belief = updated_belief(belief, a, err);
  }

  const EstimateReport report = make_estimate_report(belief, &c_true);
  const fs::path coup_path = dir / "couplings.csv";
  std::ofstream coup(coup_path);
  coup << estimate_report_csv(report, basis, prior_mean, &c_true);
  coup.close();
  files.push_back(coup_path.string());

  int outside = 0;
  for (int j = 0; j < m; ++j) {
    if (std::abs(c_true(j) - belief.mean(j)) > report.marginal_two_sigma(j)) ++outside;
  }
  CsvFile summary(dir / "summary.csv",
                  "prior_fidelity,posterior_fidelity,prior_error,posterior_error,"
                  "couplings_outside_2sigma");
  summary.row(fidelity(prior_mean, c_true), fidelity(belief.mean, c_true),
              std::sqrt(static_cast<Real>(m)) * sigma_c,
              std::sqrt(belief.covariance.trace()), outside);
  files.push_back(summary.path());
}

void run_thm4_coverage(const ScenarioConfig& cfg, const fs::path& dir,
                       std::vector<std::string>& files) {
  const PauliBasis basis = enumerate_k_body(cfg.n, cfg.k);
  const std::vector<PauliString>& targets = basis.elements();
  const long shots = (cfg.schedule.shots > 0)
                         ? cfg.schedule.shots
                         : thm4_shot_count(basis.size(), cfg.k, cfg.schedule.eps,
                                           cfg.schedule.delta);
  CsvFile coverage(dir / "coverage.csv", "trial,shots,max_abs_error,num_missing,all_within_eps");
  for (int trial = 0; trial < cfg.schedule.trials; ++trial) {
    Rng rng = make_stream_rng(cfg.seed, static_cast<std::uint64_t>(trial));
    const DensityState rho = DensityState::random_pure(cfg.n, rng);
    const EstimateBatch batch = pauli_shadow_estimate(rho, targets, shots, rng);
    Real max_err = 0.0;
    int missing = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (batch.missing(static_cast<int>(i))) {
        ++missing;
        continue;
      }
      max_err = std::max(max_err,
                         std::abs(batch.values(static_cast<Eigen::Index>(i)) -
                                  pauli_expectation(targets[i], rho)));
    }
    const bool ok = (missing == 0) && (max_err <= cfg.schedule.eps);
    coverage.row(trial, shots, max_err, missing, ok ? 1 : 0);

    if (trial == 0 && cfg.schedule.dump_shots) {
      Rng dump_rng = make_stream_rng(cfg.seed, 0xd0d0ULL);
      std::vector<ShotRecord> log;
      const long dump_count = std::min<long>(shots, 2000);
      for (long s = 0; s < dump_count; ++s) {
        log.push_back(measure_setting(rho, sample_random_setting(cfg.n, dump_rng), dump_rng));
      }
      const fs::path shots_path = dir / "shots_trial0.csv";
      std::ofstream shots_out(shots_path);
      shots_out << shot_log_csv(log);
      files.push_back(shots_path.string());
      const fs::path est_path = dir / "estimates_trial0.csv";
      std::ofstream est_out(est_path);
      est_out << estimate_batch_csv(batch);
      files.push_back(est_path.string());
    }
  }
  files.push_back(coverage.path());
}

void run_bounds_check(const ScenarioConfig& cfg, const fs::path& dir,
                      std::vector<std::string>& files) {
  CsvFile bounds(dir / "bounds.csv", "trial,kind,delta,eps,gap,bound,measured,within_bound");
  const BoundsTrialKind kinds[4] = {BoundsTrialKind::kExact, BoundsTrialKind::kTimeAverage,
                                    BoundsTrialKind::kEntryNoise, BoundsTrialKind::kBoth};
  for (int trial = 0; trial < cfg.schedule.trials; ++trial) {
    Rng rng = make_stream_rng(cfg.seed, static_cast<std::uint64_t>(trial));
    const BoundsTrial t =
        run_bounds_trial(kinds[trial % 4], cfg.n, cfg.k, rng, cfg.dense_cap);
    bounds.row(trial, bounds_trial_kind_name(t.kind), t.delta, t.eps, t.gap, t.bound,
               t.measured_infidelity, t.within_bound ? 1 : 0);
  }
  files.push_back(bounds.path());
}

}  // namespace

RunOutputs run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  if (!cfg.seed_set) throw ConfigError("seed: required (no wall-clock seeding)");
  if (cfg.n > cfg.dense_cap) {
    throw ResourceLimitError("scenario requests n beyond the dense cap");
  }
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  RunOutputs outputs;
  switch (cfg.scenario) {
    case Scenario::kMultistateGap: run_multistate_gap(cfg, dir, outputs.files); break;
    case Scenario::kControlsSweep: run_controls_sweep(cfg, dir, outputs.files); break;
    case Scenario::kPosteriorContraction:
      run_posterior_contraction(cfg, dir, outputs.files);
      break;
    case Scenario::kIsingExample: run_ising_example(cfg, dir, outputs.files); break;
    case Scenario::kThm4Coverage: run_thm4_coverage(cfg, dir, outputs.files); break;
    case Scenario::kBoundsCheck: run_bounds_check(cfg, dir, outputs.files); break;
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  nlohmann::json manifest;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  manifest["config_hash"] = hash_hex;
  manifest["config"] = nlohmann::json::parse(config_to_canonical_json(cfg));
  manifest["seed"] = cfg.seed;
  manifest["version"] = HAMLEARN_VERSION;
  manifest["wall_time_ms"] = elapsed;
  std::vector<std::string> names;
  for (const std::string& f : outputs.files) names.push_back(fs::path(f).filename().string());
  manifest["outputs"] = names;
  const fs::path manifest_path = dir / "manifest.json";
  std::ofstream mout(manifest_path);
  mout << manifest.dump(2) << '\n';
  outputs.files.push_back(manifest_path.string());
  return outputs;
}

}  // namespace hamlearn
