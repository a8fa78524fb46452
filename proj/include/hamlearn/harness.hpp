#pragma once

#include "hamlearn/bayes.hpp"
#include "hamlearn/forward.hpp"
#include "hamlearn/meas.hpp"
#include "hamlearn/pauli.hpp"
#include "hamlearn/qsim.hpp"
#include "hamlearn/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hamlearn {

enum class Scenario {
  kMultistateGap,
  kControlsSweep,
  kPosteriorContraction,
  kIsingExample,
  kThm4Coverage,
  kBoundsCheck,
};

enum class BasisKind { kBody, kLocalChain };

struct PriorConfig {
  Real sigma_c = 0.1;
  Real sigma_v = 1e-3;
  std::string mean = "zero";  // "zero" | "ising"
};

struct ScheduleConfig {
  std::vector<int> state_counts = {1, 2, 4};       // eigenstates stacked per instance
  std::vector<int> control_counts = {1, 2, 4, 8};  // N values for the noise sweep
  int num_controls = 4;
  std::vector<Real> noise_levels = {1e-3, 1e-2, 1e-1};
  int runs = 50;    // seeds per sweep point / end-to-end repetitions
  int trials = 200; // coverage / bound-check trials
  Real time = 3.0 * 3.14159265358979323846;  // time-averaging horizon
  int nodes = 24;                            // quadrature nodes
  long shots = 0;                            // 0 = derive from eps/delta
  Real eps = 0.1;
  Real delta = 0.05;
  Real disorder_sigma = 0.1;
  int prior_draws = 100;
  bool dump_shots = false;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::kMultistateGap;
  int n = 6;
  int k = 2;
  BasisKind basis_kind = BasisKind::kBody;
  int ensemble_size = 20;
  int dense_cap = kDefaultDenseQubitCap;
  NoiseSpec noise;
  PriorConfig prior;
  ScheduleConfig schedule;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

/// Scenario-appropriate defaults (qubit counts, priors, schedules).
ScenarioConfig default_config(Scenario scenario);

const char* scenario_name(Scenario scenario);
std::optional<Scenario> scenario_from_name(const std::string& name);

/// Parses and validates a JSON config; throws ConfigError with the first
/// problem found. Unset fields take the scenario defaults.
ScenarioConfig config_from_json_text(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);

/// All validation problems in a config text (empty = valid).
std::vector<std::string> validate_config_text(const std::string& text);

/// Canonical serialization (sorted keys, all fields explicit); two configs
/// hash equal iff they run identically.
std::string config_to_canonical_json(const ScenarioConfig& cfg);
std::uint64_t config_hash(const ScenarioConfig& cfg);

struct RunOutputs {
  std::vector<std::string> files;  // paths of everything written, manifest last
};

/// Runs one scenario, writing CSV datasets plus a JSON manifest into
/// out_dir. Re-running with an identical config and seed reproduces every
/// CSV byte for byte.
RunOutputs run_scenario(const ScenarioConfig& cfg, const std::string& out_dir);

// --- Hamiltonian ensembles -------------------------------------------------

/// All-pairs X_iX_j couplings of strength 1 on the given basis, other
/// couplings 0 (the long-range Ising mean).
RealVector ising_mean_couplings(const PauliBasis& basis);

/// Ising mean plus i.i.d. N(0, sigma) disorder on every weight-2 coupling.
HamiltonianSpec sample_ising_disordered(const PauliBasis& basis, Real disorder_sigma,
                                        Rng& rng);

/// i.i.d. N(0,1) couplings on the k-local chain basis.
HamiltonianSpec sample_iid_chain(int n, int k, Rng& rng);

// --- Reusable experiment kernels (scenario internals, also used by the
// --- acceptance suite) ------------------------------------------------

/// One end-to-end control-field inference run: draw truth from the prior,
/// build noisy constraint matrices from exact ground states of the bare and
/// controlled Hamiltonians, then update the belief sequentially (bare row
/// first, then each control row).
struct ControlFieldRun {
  RealVector c_true;
  RealVector prior_mean_c;
  RealVector posterior_mean_c;
  RealVector posterior_two_sigma_c;
  Real prior_error_c = 0.0;      // sqrt(Tr) over the c block
  Real posterior_error_c = 0.0;  // sqrt(Tr) over the c block
  Real coverage_fraction = 0.0;  // |c_j - mu_j| <= 2 sigma_j over the c block
};

ControlFieldRun run_control_field_inference(int n, int k, int num_controls,
                                            Real sigma_c, Real sigma_v, Real sigma_e,
                                            Rng& rng,
                                            int dense_cap = kDefaultDenseQubitCap);

enum class BoundsTrialKind { kExact, kTimeAverage, kEntryNoise, kBoth };

const char* bounds_trial_kind_name(BoundsTrialKind kind);

/// One bound-vs-measured trial on a random gapped chain instance: delta
/// from time averaging a warm-start state, eps from bounded entry noise,
/// infidelity of the kernel estimate against the stated bound.
struct BoundsTrial {
  BoundsTrialKind kind = BoundsTrialKind::kExact;
  Real delta = 0.0;
  Real eps = 0.0;
  Real gap = 0.0;
  Real bound = 0.0;
  Real measured_infidelity = 0.0;
  bool within_bound = false;
};

BoundsTrial run_bounds_trial(BoundsTrialKind kind, int n, int k, Rng& rng,
                             int dense_cap = kDefaultDenseQubitCap);

}  // namespace hamlearn
