#pragma once

#include "hamlearn/pauli.hpp"
#include "hamlearn/types.hpp"

#include <string>
#include <vector>

namespace hamlearn {

/// A Hamiltonian given as a coupling vector over an ordered Pauli basis,
/// H = sum_i couplings[i] * basis[i].
struct HamiltonianSpec {
  HamiltonianSpec(PauliBasis basis_in, RealVector couplings_in);

  PauliBasis basis;
  RealVector couplings;
};

// Dense d x d density matrix, d = 2^n. Hermitian, unit trace, PSD within
// tolerance. Site 0 of a Pauli string addresses the most significant bit
// of the basis index, matching the string serialization order.
class DensityState {
 public:
  DensityState() = default;

  /// Full validation: Hermitian and unit trace within 1e-10, eigenvalues
  /// >= -1e-10. Throws std::invalid_argument otherwise.
  static DensityState from_matrix(int n, ComplexMatrix rho);

  /// For matrices valid by construction (unitary conjugation, convex
  /// mixtures); still enforces the cheap Hermiticity/trace checks.
  static DensityState from_valid_matrix(int n, ComplexMatrix rho);

  static DensityState pure(int n, const ComplexVector& ket);
  static DensityState computational_basis(int n, std::uint64_t bits);
  static DensityState maximally_mixed(int n);
  static DensityState random_pure(int n, Rng& rng);
  static DensityState random_mixed(int n, Rng& rng);

  int num_qubits() const { return n_; }
  Eigen::Index dim() const { return rho_.rows(); }
  const ComplexMatrix& matrix() const { return rho_; }

 private:
  DensityState(int n, ComplexMatrix rho) : n_(n), rho_(std::move(rho)) {}

  int n_ = 0;
  ComplexMatrix rho_;
};

/// Gauss-Legendre rule on (0,1): nodes are the roots of P_s(2u-1) and
/// w_i = 4 u_i (1-u_i) / ((s+1)^2 P_{s+1}(2u_i-1)^2). Weights sum to 1.
struct QuadratureRule {
  int node_count = 0;
  RealVector nodes;
  RealVector weights;
};

/// Eigendecomposition of a Hamiltonian, computed once and reused for all
/// evolution times. Eigenvalues ascending; within degenerate blocks the
/// eigenvectors keep the solver's deterministic order with the phase fixed
/// so each vector's largest-magnitude component is real positive.
struct SpectralDecomposition {
  int n = 0;
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;  // columns
};

/// Dense matrix of one Pauli string (a signed permutation).
ComplexMatrix dense_pauli(const PauliString& p, int dense_cap = kDefaultDenseQubitCap);

/// Dense Hermitian Hamiltonian matrix; throws ResourceLimitError when the
/// qubit count exceeds the cap.
ComplexMatrix dense_hamiltonian(const HamiltonianSpec& spec,
                                int dense_cap = kDefaultDenseQubitCap);

SpectralDecomposition diagonalize(const HamiltonianSpec& spec,
                                  int dense_cap = kDefaultDenseQubitCap);

struct Eigenstate {
  Real energy = 0.0;
  DensityState state;  // rank-1 projector
};

/// Full spectral decomposition as rank-1 projectors, energies ascending.
std::vector<Eigenstate> eigenstates(const HamiltonianSpec& spec,
                                    int dense_cap = kDefaultDenseQubitCap);

/// rho(t) = e^{-iHt} rho0 e^{iHt}, via the cached decomposition.
DensityState evolve(const DensityState& rho0, const SpectralDecomposition& sd, Real t);
DensityState evolve(const DensityState& rho0, const HamiltonianSpec& spec, Real t,
                    int dense_cap = kDefaultDenseQubitCap);

/// Schatten 1-norm (sum of singular values).
Real trace_norm(const ComplexMatrix& m);

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
Real operator_norm_hermitian(const ComplexMatrix& m);

/// ||[H, rho]||_1.
Real commutator_trace_norm(const HamiltonianSpec& spec, const DensityState& rho,
                           int dense_cap = kDefaultDenseQubitCap);
Real commutator_trace_norm(const ComplexMatrix& hamiltonian, const DensityState& rho);

QuadratureRule gauss_legendre_rule(int node_count);

/// Quadrature mixture sum_i w_i rho(u_i t) approximating the running time
/// average of rho0 under the given Hamiltonian. Requires t > 0, s >= 1.
DensityState time_averaged_state(const DensityState& rho0, const HamiltonianSpec& spec,
                                 Real t, int node_count,
                                 int dense_cap = kDefaultDenseQubitCap);
DensityState time_averaged_state(const DensityState& rho0, const SpectralDecomposition& sd,
                                 Real t, int node_count);

/// (sqrt(pi) / (4 sqrt(s))) * (e ||H|| t / (4 s))^(2 s): 1-norm error bound
/// for the s-node quadrature mixture against the exact time average.
Real quadrature_error_bound(int node_count, Real h_norm, Real t);

/// Tr(P rho), real up to numerical noise. O(d) given the stored matrix.
Real pauli_expectation(const PauliString& p, const DensityState& rho);

/// Structured text (JSON) round trip: basis string list + coupling array.
std::string hamiltonian_to_json(const HamiltonianSpec& spec);
HamiltonianSpec hamiltonian_from_json(const std::string& text);

/// Row-major "re,im" CSV dump of the density matrix, for debugging only.
std::string density_debug_csv(const DensityState& rho);

}  // namespace hamlearn
