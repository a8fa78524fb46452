#include "hamlearn/qsim.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace hamlearn {

namespace {

constexpr Real kHermTol = 1e-10;
constexpr Real kTraceTol = 1e-10;
constexpr Real kEigFloor = -1e-10;

Eigen::Index dim_for(int n) { return Eigen::Index(1) << n; }

void check_dense_cap(int n, int cap) {
  if (n > cap) {
    throw ResourceLimitError("dense simulation capped at " + std::to_string(cap) +
                             " qubits, requested " + std::to_string(n));
  }
  if (n < 1) throw std::invalid_argument("qubit count must be positive");
}

Real hermiticity_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Reverses the low n bits, mapping site-indexed masks (site 0 = bit 0) to
// basis-index masks (site 0 = most significant bit).
std::uint64_t reverse_bits(std::uint64_t mask, int n) {
  std::uint64_t out = 0;
  for (int i = 0; i < n; ++i) {
    if ((mask >> i) & 1) out |= 1ULL << (n - 1 - i);
  }
  return out;
}

const Complex kPhasePowers[4] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0),
                                 Complex(0, -1)};

}  // namespace

HamiltonianSpec::HamiltonianSpec(PauliBasis basis_in, RealVector couplings_in)
    : basis(std::move(basis_in)), couplings(std::move(couplings_in)) {
  if (couplings.size() != basis.size()) {
    throw std::invalid_argument("HamiltonianSpec: coupling count != basis size");
  }
}

DensityState DensityState::from_matrix(int n, ComplexMatrix rho) {
  DensityState state = from_valid_matrix(n, std::move(rho));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(state.rho_,
                                                      Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < kEigFloor) {
    throw std::invalid_argument("DensityState: matrix is not positive semidefinite");
  }
  return state;
}

DensityState DensityState::from_valid_matrix(int n, ComplexMatrix rho) {
  if (rho.rows() != dim_for(n) || rho.cols() != dim_for(n)) {
    throw std::invalid_argument("DensityState: matrix dimension != 2^n");
  }
  if (hermiticity_defect(rho) > kHermTol) {
    throw std::invalid_argument("DensityState: matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - Complex(1, 0)) > kTraceTol) {
    throw std::invalid_argument("DensityState: trace != 1");
  }
  return DensityState(n, std::move(rho));
}

DensityState DensityState::pure(int n, const ComplexVector& ket) {
  if (ket.size() != dim_for(n)) {
    throw std::invalid_argument("DensityState::pure: ket dimension != 2^n");
  }
  const Real norm = ket.norm();
  if (norm <= 0) throw std::invalid_argument("DensityState::pure: zero ket");
  const ComplexVector v = ket / norm;
  return DensityState(n, v * v.adjoint());
}

DensityState DensityState::computational_basis(int n, std::uint64_t bits) {
  ComplexVector ket = ComplexVector::Zero(dim_for(n));
  ket(static_cast<Eigen::Index>(bits)) = Complex(1, 0);
  return pure(n, ket);
}

DensityState DensityState::maximally_mixed(int n) {
  const Eigen::Index d = dim_for(n);
  return DensityState(n, ComplexMatrix::Identity(d, d) / Real(d));
}

DensityState DensityState::random_pure(int n, Rng& rng) {
  std::normal_distribution<Real> gauss(0.0, 1.0);
  ComplexVector ket(dim_for(n));
  for (Eigen::Index i = 0; i < ket.size(); ++i) {
    const Real re = gauss(rng);
    const Real im = gauss(rng);
    ket(i) = Complex(re, im);
  }
  return pure(n, ket);
}

DensityState DensityState::random_mixed(int n, Rng& rng) {
  std::normal_distribution<Real> gauss(0.0, 1.0);
  const Eigen::Index d = dim_for(n);
  ComplexMatrix g(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const Real re = gauss(rng);
      const Real im = gauss(rng);
      g(r, c) = Complex(re, im);
    }
  }
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  return DensityState(n, std::move(rho));
}

ComplexMatrix dense_pauli(const PauliString& p, int dense_cap) {
  const int n = p.num_qubits();
  check_dense_cap(n, dense_cap);
  const Eigen::Index d = dim_for(n);
  const std::uint64_t x = reverse_bits(p.x_bits(), n);
  const std::uint64_t z = reverse_bits(p.z_bits(), n);
  // P = i^|x&z| X^x Z^z: column b carries i^|x&z| (-1)^{|z&b|} at row b^x.
  const Complex lead = kPhasePowers[std::popcount(p.x_bits() & p.z_bits()) & 3];
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(d); ++b) {
    const Real sign = (std::popcount(z & b) & 1) ? -1.0 : 1.0;
    m(static_cast<Eigen::Index>(b ^ x), static_cast<Eigen::Index>(b)) = lead * sign;
  }
  return m;
}

ComplexMatrix dense_hamiltonian(const HamiltonianSpec& spec, int dense_cap) {
  const int n = spec.basis.num_qubits();
  check_dense_cap(n, dense_cap);
  const Eigen::Index d = dim_for(n);
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < spec.basis.size(); ++i) {
    const Real c = spec.couplings(i);
    if (c == 0.0) continue;
    const PauliString& p = spec.basis[i];
    const std::uint64_t x = reverse_bits(p.x_bits(), n);
    const std::uint64_t z = reverse_bits(p.z_bits(), n);
    const Complex lead =
        c * kPhasePowers[std::popcount(p.x_bits() & p.z_bits()) & 3];
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(d); ++b) {
      const Real sign = (std::popcount(z & b) & 1) ? -1.0 : 1.0;
      h(static_cast<Eigen::Index>(b ^ x), static_cast<Eigen::Index>(b)) += lead * sign;
    }
  }
  return h;
}

SpectralDecomposition diagonalize(const HamiltonianSpec& spec, int dense_cap) {
  const ComplexMatrix h = dense_hamiltonian(spec, dense_cap);
  if (hermiticity_defect(h) > kHermTol) {
    throw NumericalError("diagonalize: accumulated Hamiltonian is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("diagonalize: eigensolver failed");
  }
  SpectralDecomposition sd;
  sd.n = spec.basis.num_qubits();
  sd.eigenvalues = solver.eigenvalues();
  sd.eigenvectors = solver.eigenvectors();
  // Phase convention: largest-magnitude component of each vector made real
  // positive, so repeated runs and degenerate blocks export stable kets.
  for (Eigen::Index c = 0; c < sd.eigenvectors.cols(); ++c) {
    Eigen::Index imax = 0;
    sd.eigenvectors.col(c).cwiseAbs().maxCoeff(&imax);
    const Complex v = sd.eigenvectors(imax, c);
    const Real mag = std::abs(v);
    if (mag > 0) sd.eigenvectors.col(c) *= std::conj(v) / mag;
  }
  return sd;
}

std::vector<Eigenstate> eigenstates(const HamiltonianSpec& spec, int dense_cap) {
  const SpectralDecomposition sd = diagonalize(spec, dense_cap);
  std::vector<Eigenstate> out;
  out.reserve(static_cast<std::size_t>(sd.eigenvalues.size()));
  for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i) {
    out.push_back(Eigenstate{sd.eigenvalues(i),
                             DensityState::pure(sd.n, sd.eigenvectors.col(i))});
  }
  return out;
}

DensityState evolve(const DensityState& rho0, const SpectralDecomposition& sd, Real t) {
  if (rho0.num_qubits() != sd.n) {
    throw std::invalid_argument("evolve: state and Hamiltonian sizes differ");
  }
  if (t < 0) throw std::invalid_argument("evolve: time must be >= 0");
  if (t == 0) return rho0;
  const Eigen::Index d = rho0.dim();
  ComplexVector phases(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    phases(i) = std::exp(Complex(0, -sd.eigenvalues(i) * t));
  }
  // U rho U^dag with U = V diag(phases) V^dag.
  const ComplexMatrix u = sd.eigenvectors * phases.asDiagonal() *
                          sd.eigenvectors.adjoint();
  ComplexMatrix rho = u * rho0.matrix() * u.adjoint();
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  return DensityState::from_valid_matrix(sd.n, std::move(rho));
}

DensityState evolve(const DensityState& rho0, const HamiltonianSpec& spec, Real t,
                    int dense_cap) {
  return evolve(rho0, diagonalize(spec, dense_cap), t);
}

Real trace_norm(const ComplexMatrix& m) {
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

Real operator_norm_hermitian(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Real commutator_trace_norm(const HamiltonianSpec& spec, const DensityState& rho,
                           int dense_cap) {
  return commutator_trace_norm(dense_hamiltonian(spec, dense_cap), rho);
}

Real commutator_trace_norm(const ComplexMatrix& hamiltonian, const DensityState& rho) {
  if (hamiltonian.rows() != rho.dim()) {
    throw std::invalid_argument("commutator_trace_norm: dimension mismatch");
  }
  const ComplexMatrix c = hamiltonian * rho.matrix() - rho.matrix() * hamiltonian;
  return trace_norm(c);
}

namespace {

// P_s(x) and P_{s+1}(x) by the three-term recurrence.
std::pair<Real, Real> legendre_pair(int s, Real x) {
  Real pm = 1.0;  // P_0
  Real pc = x;    // P_1
  if (s == 0) return {pm, pc};
  for (int j = 1; j <= s; ++j) {
    const Real pn = ((2 * j + 1) * x * pc - j * pm) / (j + 1);
    pm = pc;
    pc = pn;
  }
  return {pm, pc};  // (P_s, P_{s+1})
}

}  // namespace

QuadratureRule gauss_legendre_rule(int node_count) {
  const int s = node_count;
  if (s < 1) throw std::invalid_argument("gauss_legendre_rule: need at least 1 node");
  QuadratureRule rule;
  rule.node_count = s;
  rule.nodes.resize(s);
  rule.weights.resize(s);
  for (int i = 1; i <= s; ++i) {
    // Standard initial guess for the i-th root of P_s on [-1,1], descending.
    Real x = std::cos(M_PI * (i - 0.25) / (s + 0.5));
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      const auto [ps, psp1] = legendre_pair(s, x);
      // (1-x^2) P_s'(x) = (s+1) (x P_s - P_{s+1})
      const Real deriv = (s + 1) * (x * ps - psp1) / (1.0 - x * x);
      const Real step = ps / deriv;
      x -= step;
      if (std::abs(step) < 1e-15) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NumericalError("gauss_legendre_rule: Newton iteration did not converge");
    }
    const Real u = (1.0 + x) / 2.0;  // root of P_s(2u-1) on (0,1)
    const auto [ps, psp1] = legendre_pair(s, x);
    const Real w = 4.0 * u * (1.0 - u) /
                   (Real(s + 1) * Real(s + 1) * psp1 * psp1);
    rule.nodes(s - i) = u;  // descending x = ascending u
    rule.weights(s - i) = w;
  }
  for (int i = 0; i < s; ++i) {
    if (!(rule.nodes(i) > 0.0 && rule.nodes(i) < 1.0)) {
      throw NumericalError("gauss_legendre_rule: node outside (0,1)");
    }
    if (i > 0 && rule.nodes(i) <= rule.nodes(i - 1)) {
      throw NumericalError("gauss_legendre_rule: nodes not strictly increasing");
    }
  }
  if (std::abs(rule.weights.sum() - 1.0) > 1e-12) {
    throw NumericalError("gauss_legendre_rule: weights do not sum to 1");
  }
  return rule;
}

DensityState time_averaged_state(const DensityState& rho0,
                                 const SpectralDecomposition& sd, Real t,
                                 int node_count) {
  if (t <= 0) throw std::invalid_argument("time_averaged_state: time must be > 0");
  const QuadratureRule rule = gauss_legendre_rule(node_count);
  ComplexMatrix acc = ComplexMatrix::Zero(rho0.dim(), rho0.dim());
  for (int i = 0; i < rule.node_count; ++i) {
    acc += rule.weights(i) * evolve(rho0, sd, rule.nodes(i) * t).matrix();
  }
  return DensityState::from_valid_matrix(rho0.num_qubits(), std::move(acc));
}

DensityState time_averaged_state(const DensityState& rho0, const HamiltonianSpec& spec,
                                 Real t, int node_count, int dense_cap) {
  return time_averaged_state(rho0, diagonalize(spec, dense_cap), t, node_count);
}

Real quadrature_error_bound(int node_count, Real h_norm, Real t) {
  if (node_count < 1) throw std::invalid_argument("quadrature_error_bound: s >= 1");
  if (h_norm < 0 || t < 0) {
    throw std::invalid_argument("quadrature_error_bound: h_norm and t must be >= 0");
  }
  const Real s = node_count;
  return std::sqrt(M_PI) / (4.0 * std::sqrt(s)) *
         std::pow(std::exp(1.0) * h_norm * t / (4.0 * s), 2.0 * s);
}

Real pauli_expectation(const PauliString& p, const DensityState& rho) {
  const int n = rho.num_qubits();
  if (p.num_qubits() != n) {
    throw std::invalid_argument("pauli_expectation: dimension mismatch");
  }
  const std::uint64_t x = reverse_bits(p.x_bits(), n);
  const std::uint64_t z = reverse_bits(p.z_bits(), n);
  const Complex lead = kPhasePowers[std::popcount(p.x_bits() & p.z_bits()) & 3];
  Complex acc(0, 0);
  const Eigen::Index d = rho.dim();
  // Tr(P rho) = sum_b P[b^x, b] rho[b, b^x].
  for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(d); ++b) {
    const Real sign = (std::popcount(z & b) & 1) ? -1.0 : 1.0;
    acc += lead * sign *
           rho.matrix()(static_cast<Eigen::Index>(b),
                        static_cast<Eigen::Index>(b ^ x));
  }
  return acc.real();
}

std::string hamiltonian_to_json(const HamiltonianSpec& spec) {
  nlohmann::json j;
  j["n"] = spec.basis.num_qubits();
  j["basis"] = spec.basis.to_strings();
  std::vector<Real> c(spec.couplings.data(), spec.couplings.data() + spec.couplings.size());
  j["couplings"] = c;
  return j.dump(2);
}

HamiltonianSpec hamiltonian_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const int n = j.at("n").get<int>();
  std::vector<PauliString> elements;
  for (const auto& s : j.at("basis")) {
    elements.push_back(PauliString::from_letters(s.get<std::string>()));
  }
  const auto c = j.at("couplings").get<std::vector<Real>>();
  RealVector couplings = Eigen::Map<const RealVector>(c.data(), static_cast<Eigen::Index>(c.size()));
  return HamiltonianSpec(PauliBasis(n, std::move(elements)), std::move(couplings));
}

std::string density_debug_csv(const DensityState& rho) {
  std::ostringstream out;
  out << "row,col,re,im\n";
  char buf[96];
  for (Eigen::Index r = 0; r < rho.dim(); ++r) {
    for (Eigen::Index c = 0; c < rho.dim(); ++c) {
      const Complex v = rho.matrix()(r, c);
      std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%.17g\n",
                    static_cast<long long>(r), static_cast<long long>(c), v.real(),
                    v.imag());
      out << buf;
    }
  }
  return out.str();
}

}  // namespace hamlearn
