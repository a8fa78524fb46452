#include "hamlearn/meas.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace hamlearn {

namespace {

// Single-qubit rotations taking each letter's eigenbasis to the Z basis:
// U P U^dag = Z for P in {X, Y, Z}.
Eigen::Matrix2cd basis_rotation(char letter) {
  const Real s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd u;
  switch (letter) {
    case 'X':
      u << s, s, s, -s;
      break;
    case 'Y':
      u << Complex(s, 0), Complex(0, -s), Complex(s, 0), Complex(0, s);
      break;
    case 'Z':
      u.setIdentity();
      break;
    default:
      throw std::invalid_argument("measurement setting must have full weight");
  }
  return u;
}

// Outcome distribution of a full-weight setting: probabilities over the d
// basis outcomes after rotating every site into its measurement basis.
RealVector outcome_distribution(const DensityState& rho, const PauliString& setting) {
  const int n = rho.num_qubits();
  const Eigen::Index d = rho.dim();
  ComplexMatrix u = ComplexMatrix::Identity(1, 1);
  for (int site = 0; site < n; ++site) {
    const Eigen::Matrix2cd local = basis_rotation(setting.letter(site));
    ComplexMatrix next(u.rows() * 2, u.cols() * 2);
    next.topLeftCorner(u.rows(), u.cols()) = local(0, 0) * u;
    next.topRightCorner(u.rows(), u.cols()) = local(0, 1) * u;
    next.bottomLeftCorner(u.rows(), u.cols()) = local(1, 0) * u;
    next.bottomRightCorner(u.rows(), u.cols()) = local(1, 1) * u;
    u = std::move(next);
  }
  const ComplexMatrix rotated = u * rho.matrix() * u.adjoint();
  RealVector probs(d);
  Real total = 0.0;
  for (Eigen::Index b = 0; b < d; ++b) {
    probs(b) = std::max(rotated(b, b).real(), 0.0);
    total += rotated(b, b).real();
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw NumericalError("measure_setting: outcome probabilities drifted from 1");
  }
  probs /= probs.sum();
  return probs;
}

std::uint64_t sample_index(const RealVector& probs, Rng& rng) {
  std::uniform_real_distribution<Real> unit(0.0, 1.0);
  const Real r = unit(rng);
  Real acc = 0.0;
  for (Eigen::Index b = 0; b < probs.size(); ++b) {
    acc += probs(b);
    if (r < acc) return static_cast<std::uint64_t>(b);
  }
  return static_cast<std::uint64_t>(probs.size() - 1);
}

std::vector<int> outcome_bits_to_signs(std::uint64_t index, int n) {
  std::vector<int> outcomes(static_cast<std::size_t>(n));
  for (int site = 0; site < n; ++site) {
    const int bit = static_cast<int>((index >> (n - 1 - site)) & 1);
    outcomes[static_cast<std::size_t>(site)] = bit ? -1 : 1;
  }
  return outcomes;
}

}  // namespace

PauliString sample_random_setting(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_random_setting: n >= 1");
  std::uniform_int_distribution<int> letter(0, 2);
  std::string word(static_cast<std::size_t>(n), 'I');
  const char letters[3] = {'X', 'Y', 'Z'};
  for (int site = 0; site < n; ++site) {
    word[static_cast<std::size_t>(site)] = letters[letter(rng)];
  }
  return PauliString::from_letters(word);
}

ShotRecord measure_setting(const DensityState& rho, const PauliString& setting,
                           Rng& rng) {
  if (setting.num_qubits() != rho.num_qubits()) {
    throw std::invalid_argument("measure_setting: dimension mismatch");
  }
  if (setting.weight() != setting.num_qubits()) {
    throw std::invalid_argument("measure_setting: setting must have full weight");
  }
  const RealVector probs = outcome_distribution(rho, setting);
  const std::uint64_t index = sample_index(probs, rng);
  return ShotRecord{setting, outcome_bits_to_signs(index, rho.num_qubits())};
}

EstimateBatch pauli_shadow_estimate(const DensityState& rho,
                                    const std::vector<PauliString>& targets,
                                    long num_shots, Rng& rng) {
  const int n = rho.num_qubits();
  if (num_shots < 1) throw std::invalid_argument("pauli_shadow_estimate: shots >= 1");
  for (const PauliString& t : targets) {
    if (t.num_qubits() != n) {
      throw std::invalid_argument("pauli_shadow_estimate: target dimension mismatch");
    }
  }

  EstimateBatch batch;
  batch.targets = targets;
  batch.values = RealVector::Zero(static_cast<Eigen::Index>(targets.size()));
  batch.counts.assign(targets.size(), 0);
  batch.shot_products.resize(targets.size());

  // There are only 3^n distinct full-weight settings; cache each setting's
  // outcome distribution and its supported-target list.
  struct SettingInfo {
    RealVector probs;
    std::vector<std::pair<int, std::uint64_t>> supported;  // target, index mask
  };
  std::unordered_map<std::uint64_t, SettingInfo> cache;

  for (long shot = 0; shot < num_shots; ++shot) {
    const PauliString setting = sample_random_setting(n, rng);
    const std::uint64_t key = setting.x_bits() | (setting.z_bits() << n);
    auto it = cache.find(key);
    if (it == cache.end()) {
      SettingInfo info;
      info.probs = outcome_distribution(rho, setting);
      for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        const PauliString& t = targets[ti];
        const std::uint64_t support = t.support_mask();
        // Supported iff the setting letter matches on every support site.
        if ((t.x_bits() & support) != (setting.x_bits() & support)) continue;
        if ((t.z_bits() & support) != (setting.z_bits() & support)) continue;
        std::uint64_t index_mask = 0;
        for (int site = 0; site < n; ++site) {
          if ((support >> site) & 1) index_mask |= 1ULL << (n - 1 - site);
        }
        info.supported.emplace_back(static_cast<int>(ti), index_mask);
      }
      it = cache.emplace(key, std::move(info)).first;
    }
    const std::uint64_t outcome = sample_index(it->second.probs, rng);
    for (const auto& [ti, index_mask] : it->second.supported) {
      const int product = (std::popcount(outcome & index_mask) & 1) ? -1 : 1;
      batch.shot_products[static_cast<std::size_t>(ti)].push_back(
          static_cast<std::int8_t>(product));
      batch.counts[static_cast<std::size_t>(ti)] += 1;
      batch.values(ti) += product;
    }
  }
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    if (batch.counts[ti] > 0) {
      batch.values(static_cast<Eigen::Index>(ti)) /= batch.counts[ti];
    } else {
      batch.values(static_cast<Eigen::Index>(ti)) = 0.0;
    }
  }
  return batch;
}

long thm4_shot_count(long m, int k, Real eps, Real delta) {
  if (m < 1 || k < 1) throw std::invalid_argument("thm4_shot_count: m, k >= 1");
  if (!(eps > 0 && eps < 1) || !(delta > 0 && delta < 1)) {
    throw std::invalid_argument("thm4_shot_count: eps, delta must be in (0,1)");
  }
  const Real count = 2.0 / (eps * eps * (1.0 - eps)) * std::pow(3.0, k) *
                     std::log(3.0 * static_cast<Real>(m) / delta);
  return static_cast<long>(std::ceil(count));
}

EstimateBatch apply_readout_flip(const EstimateBatch& batch, const NoiseSpec& noise,
                                 Rng& rng) {
  EstimateBatch out = batch;
  std::uniform_real_distribution<Real> unit(0.0, 1.0);
  for (std::size_t ti = 0; ti < out.targets.size(); ++ti) {
    const Real e = noise.flip_rate_for(static_cast<int>(ti));
    if (e < 0.0 || e > 0.5) {
      throw std::invalid_argument("apply_readout_flip: flip rate must be in [0, 1/2]");
    }
    if (e == 0.0 || out.counts[ti] == 0) continue;
    long sum = 0;
    for (std::int8_t& product : out.shot_products[ti]) {
      if (unit(rng) < e) product = static_cast<std::int8_t>(-product);
      sum += product;
    }
    out.values(static_cast<Eigen::Index>(ti)) =
        static_cast<Real>(sum) / out.counts[ti];
  }
  return out;
}

ConstraintMatrix noisy_k_matrix(const ConstraintMatrix& k, const NoiseSpec& noise,
                                Rng& rng) {
  if (noise.sigma_e < 0) throw std::invalid_argument("noisy_k_matrix: sigma_e >= 0");
  ConstraintMatrix out = k;
  if (noise.sigma_e == 0.0) return out;
  std::normal_distribution<Real> gauss(0.0, noise.sigma_e);
  const int m = k.basis.size();
  for (int j = 0; j < m; ++j) {
    for (int l = j + 1; l < m; ++l) {
      const Real e = gauss(rng);
      out.entries(j, l) += e;
      out.entries(l, j) -= e;
    }
  }
  return out;
}

std::string shot_log_csv(const std::vector<ShotRecord>& shots) {
  std::ostringstream out;
  out << "shot_index,setting_string,outcome_bits\n";
  for (std::size_t i = 0; i < shots.size(); ++i) {
    out << i << ',' << shots[i].setting.to_string() << ',';
    for (const int o : shots[i].outcomes) out << (o > 0 ? '0' : '1');
    out << '\n';
  }
  return out.str();
}

std::string estimate_batch_csv(const EstimateBatch& batch) {
  std::ostringstream out;
  out << "target_string,estimate,shots_used,missing_flag\n";
  char buf[32];
  for (std::size_t i = 0; i < batch.targets.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", batch.values(static_cast<Eigen::Index>(i)));
    out << batch.targets[i].to_string() << ',' << buf << ',' << batch.counts[i] << ','
        << (batch.missing(static_cast<int>(i)) ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace hamlearn
