#pragma once

#include "hamlearn/forward.hpp"
#include "hamlearn/pauli.hpp"
#include "hamlearn/qsim.hpp"
#include "hamlearn/types.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace hamlearn {

/// One projective measurement of a full-weight Pauli setting: +-1 per site.
struct ShotRecord {
  PauliString setting;
  std::vector<int> outcomes;
};

/// Simulated error model: Gaussian std per K entry, per-target readout flip
/// rates (two-outcome measurements flipped with probability e), and the RNG
/// seed that drives the draws.
struct NoiseSpec {
  Real sigma_e = 0.0;
  Real default_flip_rate = 0.0;
  std::unordered_map<int, Real> flip_rates;  // per measured-operator index
  std::uint64_t seed = 0;

  Real flip_rate_for(int target_index) const {
    const auto it = flip_rates.find(target_index);
    return it == flip_rates.end() ? default_flip_rate : it->second;
  }
};

// Estimates of Tr(C_i rho) for a list of Pauli targets, produced by random
// full-weight sampling: every shot measures one random setting and every
// target averages the outcome products of the settings that support it.
// A target supported by no setting keeps count 0 and is flagged missing
// rather than silently estimated as 0. shot_products keeps the raw +-1
// per-shot products so readout-flip noise can act per shot.
struct EstimateBatch {
  std::vector<PauliString> targets;
  RealVector values;
  std::vector<int> counts;
  std::vector<std::vector<std::int8_t>> shot_products;

  bool missing(int i) const { return counts[static_cast<std::size_t>(i)] == 0; }
};

/// Uniform i.i.d. letter per site over {X, Y, Z}; always full weight.
PauliString sample_random_setting(int n, Rng& rng);

/// Samples the joint n-bit outcome of measuring every site in the local
/// eigenbasis of its setting letter.
ShotRecord measure_setting(const DensityState& rho, const PauliString& setting,
                           Rng& rng);

/// Random-full-weight estimation of all target expectations from num_shots
/// settings. Target weights must not exceed the qubit count.
EstimateBatch pauli_shadow_estimate(const DensityState& rho,
                                    const std::vector<PauliString>& targets,
                                    long num_shots, Rng& rng);

/// ceil( 2/(eps^2 (1-eps)) * 3^k * ln(3 m / delta) ): settings needed so
/// all m weight<=k targets land within +-eps with probability >= 1-delta.
long thm4_shot_count(long m, int k, Real eps, Real delta);

/// Flips each stored per-shot product independently with the target's flip
/// rate, then re-averages; expectations scale by (1 - 2e).
EstimateBatch apply_readout_flip(const EstimateBatch& batch, const NoiseSpec& noise,
                                 Rng& rng);

/// K + E with one Gaussian draw per unordered index pair, applied with
/// opposite signs at (j,k) and (k,j): both entries come from the same
/// experiments, so the perturbed matrix must stay antisymmetric.
ConstraintMatrix noisy_k_matrix(const ConstraintMatrix& k, const NoiseSpec& noise,
                                Rng& rng);

/// CSV export: shot_index,setting_string,outcome_bits.
std::string shot_log_csv(const std::vector<ShotRecord>& shots);

/// CSV export: target_string,estimate,shots_used,missing_flag.
std::string estimate_batch_csv(const EstimateBatch& batch);

}  // namespace hamlearn
