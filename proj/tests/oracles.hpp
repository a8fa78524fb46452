// Test-only reference implementations, kept independent of the library
// code paths they are used to check: dense Pauli matrices from explicit
// 2x2 Kronecker products, numerical integration oracles for time averages
// and evolution, and small statistics helpers.
#pragma once

#include "hamlearn/pauli.hpp"
#include "hamlearn/qsim.hpp"
#include "hamlearn/types.hpp"

#include <cmath>
#include <random>

namespace oracles {

using hamlearn::Complex;
using hamlearn::ComplexMatrix;
using hamlearn::DensityState;
using hamlearn::PauliString;
using hamlearn::Real;
using hamlearn::RealVector;
using hamlearn::Rng;

inline ComplexMatrix pauli_2x2(char letter) {
  ComplexMatrix m(2, 2);
  switch (letter) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli_2x2: bad letter");
  }
  return m;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Site 0 is the leftmost Kronecker factor (most significant index bit).
inline ComplexMatrix dense(const PauliString& p) {
  ComplexMatrix m = pauli_2x2(p.letter(0));
  for (int site = 1; site < p.num_qubits(); ++site) {
    m = kron(m, pauli_2x2(p.letter(site)));
  }
  return m;
}

inline Real max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Sum of singular values via eigenvalues of the Hermitian square; test-side
// alternative to the library's SVD-based trace norm.
inline Real trace_norm_ref(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.adjoint() * m,
                                                      Eigen::EigenvaluesOnly);
  Real sum = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    sum += std::sqrt(std::max(solver.eigenvalues()(i), 0.0));
  }
  return sum;
}

// Exact time average of rho(t) = U rho0 U^dag over [0, t] by composite
// Simpson on the propagated state, with grid doubling until the change is
// below tol in max-abs. Uses its own eigendecomposition of the given dense
// Hamiltonian, independent of the library evolve path.
class TimeAverageOracle {
 public:
  explicit TimeAverageOracle(const ComplexMatrix& hamiltonian)
      : solver_(hamiltonian) {}

  ComplexMatrix propagate(const ComplexMatrix& rho0, Real t) const {
    const Eigen::Index d = rho0.rows();
    hamlearn::ComplexVector phases(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      phases(i) = std::exp(Complex(0, -solver_.eigenvalues()(i) * t));
    }
    const ComplexMatrix u =
        solver_.eigenvectors() * phases.asDiagonal() * solver_.eigenvectors().adjoint();
    return u * rho0 * u.adjoint();
  }

  ComplexMatrix average(const ComplexMatrix& rho0, Real t, Real tol = 1e-11,
                        int max_doublings = 14) const {
    int segments = 64;
    ComplexMatrix prev = simpson(rho0, t, segments);
    for (int i = 0; i < max_doublings; ++i) {
      segments *= 2;
      ComplexMatrix next = simpson(rho0, t, segments);
      if (max_abs_diff(next, prev) < tol) return next;
      prev = std::move(next);
    }
    return prev;
  }

 private:
  ComplexMatrix simpson(const ComplexMatrix& rho0, Real t, int segments) const {
    const Real h = 1.0 / segments;  // average over u in [0,1] of rho(u t)
    ComplexMatrix acc = propagate(rho0, 0.0) + propagate(rho0, t);
    for (int i = 1; i < segments; ++i) {
      acc += (i % 2 == 1 ? 4.0 : 2.0) * propagate(rho0, i * h * t);
    }
    return acc * (h / 3.0);
  }

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver_;
};

// Fixed-step RK4 for d rho / dt = -i [H, rho].
inline ComplexMatrix rk4_evolve(const ComplexMatrix& hamiltonian, ComplexMatrix rho,
                                Real t, int steps) {
  const Complex minus_i(0, -1);
  const auto rhs = [&](const ComplexMatrix& r) -> ComplexMatrix {
    return minus_i * (hamiltonian * r - r * hamiltonian);
  };
  const Real h = t / steps;
  for (int s = 0; s < steps; ++s) {
    const ComplexMatrix k1 = rhs(rho);
    const ComplexMatrix k2 = rhs(rho + 0.5 * h * k1);
    const ComplexMatrix k3 = rhs(rho + 0.5 * h * k2);
    const ComplexMatrix k4 = rhs(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

inline RealVector gaussian_vector(Eigen::Index size, Real sigma, Rng& rng) {
  std::normal_distribution<Real> gauss(0.0, sigma);
  RealVector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = gauss(rng);
  return v;
}

// Random chain Hamiltonian for small-instance property tests.
inline hamlearn::HamiltonianSpec random_chain(int n, int k, Rng& rng) {
  hamlearn::PauliBasis basis = hamlearn::enumerate_k_local_chain(n, k);
  RealVector c = gaussian_vector(basis.size(), 1.0, rng);
  return hamlearn::HamiltonianSpec(std::move(basis), std::move(c));
}

}  // namespace oracles
