#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace hamlearn {

using Real = double;
using Complex = std::complex<double>;

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

using Rng = std::mt19937_64;

/// Default cap on dense simulation size (density matrices are 4^n complex).
inline constexpr int kDefaultDenseQubitCap = 12;

/// Requested problem exceeds the dense-simulation size cap.
struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An internal numerical routine failed to converge or lost consistency.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A scenario configuration file failed validation.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic stream derivation: one master seed, many independent
/// substreams (instance index, trial index, ...). splitmix64 mixing.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_stream_rng(std::uint64_t master, std::uint64_t stream) {
  return Rng(derive_seed(master, stream));
}

}  // namespace hamlearn
