#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hamlearn/harness.hpp"
#include "hamlearn/qsim.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace hamlearn;

namespace {

PauliString P(const char* letters) { return PauliString::from_letters(letters); }

HamiltonianSpec single_z() {
  return HamiltonianSpec(PauliBasis(1, {P("Z")}), RealVector::Ones(1));
}

DensityState plus_state() {
  ComplexVector ket(2);
  ket << 1, 1;
  return DensityState::pure(1, ket);
}

ComplexMatrix dense_from_oracle(const HamiltonianSpec& spec) {
  const Eigen::Index d = Eigen::Index(1) << spec.basis.num_qubits();
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < spec.basis.size(); ++i) {
    h += spec.couplings(i) * oracles::dense(spec.basis[i]);
  }
  return h;
}

}  // namespace

TEST_CASE("dense pauli matches the Kronecker oracle") {
  for (int n = 1; n <= 3; ++n) {
    const auto basis = enumerate_k_body(n, n);
    for (const auto& p : basis.elements()) {
      CHECK(oracles::max_abs_diff(dense_pauli(p), oracles::dense(p)) < 1e-14);
    }
  }
}

TEST_CASE("dense hamiltonian basics") {
  const ComplexMatrix h = dense_hamiltonian(single_z());
  CHECK(h(0, 0) == Complex(1, 0));
  CHECK(h(1, 1) == Complex(-1, 0));
  CHECK(std::abs(h(0, 1)) == 0.0);

  const HamiltonianSpec zero(PauliBasis(1, {P("X"), P("Z")}), RealVector::Zero(2));
  CHECK(dense_hamiltonian(zero).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coupling recovery: (1/d) Tr(P_i H) = c_i") {
  Rng rng(5);
  const auto basis = enumerate_k_body(3, 2);
  const RealVector c = oracles::gaussian_vector(basis.size(), 1.0, rng);
  const HamiltonianSpec spec(basis, c);
  const ComplexMatrix h = dense_hamiltonian(spec);
  const Real d = static_cast<Real>(h.rows());
  for (int i = 0; i < basis.size(); ++i) {
    const Complex tr = (oracles::dense(basis[i]) * h).trace();
    CHECK(std::abs(tr.real() / d - c(i)) < 1e-12);
    CHECK(std::abs(tr.imag()) < 1e-12);
  }
}

TEST_CASE("dense cap is enforced") {
  const auto basis = enumerate_k_body(4, 1);
  const HamiltonianSpec spec(basis, RealVector::Zero(basis.size()));
  CHECK_THROWS_AS(dense_hamiltonian(spec, 3), ResourceLimitError);
}

TEST_CASE("undisordered all-pairs XX model has fully degenerate multiplets") {
  const auto basis = enumerate_k_body(4, 2);
  const HamiltonianSpec spec(basis, ising_mean_couplings(basis));
  const auto eigs = eigenstates(spec);
  // Independent oracle: diagonalize the Kronecker-built matrix.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> oracle(dense_from_oracle(spec));
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    CHECK(eigs[i].energy ==
          doctest::Approx(oracle.eigenvalues()(static_cast<Eigen::Index>(i)))
              .epsilon(1e-9));
  }
  // Spectrum {-2 (x6), 0 (x8), +6 (x2)}.
  int lo = 0, mid = 0, hi = 0;
  for (const auto& e : eigs) {
    if (std::abs(e.energy + 2.0) < 1e-9) ++lo;
    if (std::abs(e.energy) < 1e-9) ++mid;
    if (std::abs(e.energy - 6.0) < 1e-9) ++hi;
  }
  CHECK(lo == 6);
  CHECK(mid == 8);
  CHECK(hi == 2);
}

TEST_CASE("eigenstates: projector structure and steady-state property") {
  const auto eigs = eigenstates(single_z());
  REQUIRE(eigs.size() == 2);
  CHECK(eigs[0].energy == doctest::Approx(-1.0));
  CHECK(eigs[1].energy == doctest::Approx(1.0));
  CHECK(std::abs(eigs[0].state.matrix()(1, 1).real() - 1.0) < 1e-12);  // |1><1|
  CHECK(std::abs(eigs[1].state.matrix()(0, 0).real() - 1.0) < 1e-12);  // |0><0|

  Rng rng(17);
  const auto basis = enumerate_k_body(4, 2);
  const HamiltonianSpec spec = sample_ising_disordered(basis, 0.1, rng);
  const auto disordered = eigenstates(spec);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> oracle(dense_from_oracle(spec));
  for (std::size_t i = 0; i < disordered.size(); ++i) {
    CHECK(std::abs(disordered[i].energy -
                   oracle.eigenvalues()(static_cast<Eigen::Index>(i))) < 1e-9);
    CHECK(commutator_trace_norm(spec, disordered[i].state) < 1e-8);
    // Rank-1 projector: purity 1.
    const ComplexMatrix& r = disordered[i].state.matrix();
    CHECK(std::abs((r * r).trace().real() - 1.0) < 1e-10);
  }
}

TEST_CASE("evolve: identity at t=0 and fixed points on eigenprojectors") {
  Rng rng(19);
  const HamiltonianSpec spec = oracles::random_chain(3, 2, rng);
  const DensityState rho = DensityState::random_mixed(3, rng);
  CHECK(oracles::max_abs_diff(evolve(rho, spec, 0.0).matrix(), rho.matrix()) == 0.0);

  const auto eigs = eigenstates(spec);
  for (const Real t : {0.3, 2.0, 17.5}) {
    CHECK(oracles::max_abs_diff(evolve(eigs[2].state, spec, t).matrix(),
                                eigs[2].state.matrix()) < 1e-10);
  }
}

TEST_CASE("evolve matches Rabi phases and an RK4 integrator") {
  const HamiltonianSpec spec = single_z();
  const DensityState plus = plus_state();
  const DensityState quarter = evolve(plus, spec, M_PI / 4.0);
  CHECK(std::abs(pauli_expectation(P("X"), quarter)) < 1e-12);        // cos(pi/2)
  CHECK(pauli_expectation(P("Y"), quarter) == doctest::Approx(1.0));  // sin(pi/2)

  Rng rng(23);
  const HamiltonianSpec chain = oracles::random_chain(3, 2, rng);
  const DensityState rho0 = DensityState::random_mixed(3, rng);
  const Real t = 0.7;
  const ComplexMatrix via_rk4 =
      oracles::rk4_evolve(dense_hamiltonian(chain), rho0.matrix(), t, 4000);
  CHECK(oracles::max_abs_diff(evolve(rho0, chain, t).matrix(), via_rk4) < 1e-8);
}

TEST_CASE("evolve preserves the state spectrum") {
  Rng rng(29);
  const HamiltonianSpec spec = oracles::random_chain(4, 2, rng);
  const DensityState rho0 = DensityState::random_mixed(4, rng);
  const DensityState rho1 = evolve(rho0, spec, 3.7);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> s0(rho0.matrix(), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> s1(rho1.matrix(), Eigen::EigenvaluesOnly);
  CHECK((s0.eigenvalues() - s1.eigenvalues()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("commutator trace norm") {
  const auto eigs = eigenstates(single_z());
  CHECK(commutator_trace_norm(single_z(), eigs[0].state) < 1e-9);
  CHECK(commutator_trace_norm(single_z(), DensityState::maximally_mixed(1)) == 0.0);
  // [Z, |+><+|] has singular values {1, 1}.
  CHECK(commutator_trace_norm(single_z(), plus_state()) == doctest::Approx(2.0));

  Rng rng(31);
  const HamiltonianSpec spec = oracles::random_chain(3, 2, rng);
  const DensityState rho = DensityState::random_mixed(3, rng);
  const ComplexMatrix h = dense_hamiltonian(spec);
  CHECK(commutator_trace_norm(spec, rho) ==
        doctest::Approx(oracles::trace_norm_ref(h * rho.matrix() - rho.matrix() * h))
            .epsilon(1e-9));
}

TEST_CASE("Gauss-Legendre nodes and weights") {
  const QuadratureRule one = gauss_legendre_rule(1);
  CHECK(one.nodes(0) == doctest::Approx(0.5));
  CHECK(one.weights(0) == doctest::Approx(1.0));

  const QuadratureRule two = gauss_legendre_rule(2);
  CHECK(two.nodes(0) == doctest::Approx((1.0 - 1.0 / std::sqrt(3.0)) / 2.0));
  CHECK(two.nodes(1) == doctest::Approx((1.0 + 1.0 / std::sqrt(3.0)) / 2.0));
  CHECK(two.weights(0) == doctest::Approx(0.5));
  CHECK(two.weights(1) == doctest::Approx(0.5));

  for (int s = 1; s <= 24; ++s) {
    const QuadratureRule rule = gauss_legendre_rule(s);
    CHECK(std::abs(rule.weights.sum() - 1.0) < 1e-12);
    for (int i = 0; i < s; ++i) {
      CHECK(rule.nodes(i) > 0.0);
      CHECK(rule.nodes(i) < 1.0);
      CHECK(rule.weights(i) > 0.0);
      if (i > 0) CHECK(rule.nodes(i) > rule.nodes(i - 1));
    }
  }
  CHECK_THROWS_AS(gauss_legendre_rule(0), std::invalid_argument);
}

TEST_CASE("Gauss-Legendre rule integrates monomials of degree <= 2s-1 exactly") {
  for (const int s : {1, 2, 3, 4, 6, 8}) {
    const QuadratureRule rule = gauss_legendre_rule(s);
    for (int degree = 0; degree <= 2 * s - 1; ++degree) {
      Real integral = 0.0;
      for (int i = 0; i < s; ++i) {
        integral += rule.weights(i) * std::pow(rule.nodes(i), degree);
      }
      CHECK(std::abs(integral - 1.0 / (degree + 1)) < 1e-10);
    }
  }
}

TEST_CASE("time-averaged state: fixed points and continuity") {
  Rng rng(37);
  const HamiltonianSpec spec = oracles::random_chain(3, 2, rng);
  const auto eigs = eigenstates(spec);
  for (const Real t : {0.5, 8.0}) {
    const DensityState avg = time_averaged_state(eigs[1].state, spec, t, 6);
    CHECK(oracles::max_abs_diff(avg.matrix(), eigs[1].state.matrix()) < 1e-10);
  }
  const DensityState rho0 = DensityState::random_mixed(3, rng);
  const DensityState tiny = time_averaged_state(rho0, spec, 1e-8, 4);
  CHECK(oracles::max_abs_diff(tiny.matrix(), rho0.matrix()) < 1e-6);
  CHECK_THROWS_AS(time_averaged_state(rho0, spec, 0.0, 4), std::invalid_argument);
}

TEST_CASE("time-averaged state for a single qubit against the closed form") {
  // For the single-Z Hamiltonian the time average of |+><+| has off-diagonal
  // (1/t) int e^{-2iu} du = (1 - e^{-2it}) / (2it); at t = 2 pi it vanishes.
  const DensityState avg = time_averaged_state(plus_state(), single_z(), 2.0 * M_PI, 20);
  ComplexMatrix expected(2, 2);
  expected << 0.5, 0, 0, 0.5;
  const Real diff = oracles::trace_norm_ref(avg.matrix() - expected);
  // The analytic quadrature bound is ~1e-27 here, far below double
  // resolution; assert it with a numerical floor.
  const Real bound = quadrature_error_bound(20, 1.0, 2.0 * M_PI);
  CHECK(diff <= bound + 1e-13);
}

TEST_CASE("quadrature error bound values") {
  CHECK(quadrature_error_bound(1, 1.0, 0.0) == 0.0);
  CHECK(quadrature_error_bound(3, 0.0, 5.0) == 0.0);
  CHECK(quadrature_error_bound(1, 1.0, 1.0) ==
        doctest::Approx(0.20463688964228935).epsilon(1e-12));
  // Monotone decreasing in s once 4s > e ||H|| t.
  Real prev = quadrature_error_bound(2, 1.0, 2.0);
  for (int s = 3; s <= 10; ++s) {
    const Real next = quadrature_error_bound(s, 1.0, 2.0);
    CHECK(next < prev);
    prev = next;
  }
}

TEST_CASE("quadrature mixture obeys the stated error bound on random instances") {
  Rng rng(41);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + static_cast<int>(trial % 3);
    const HamiltonianSpec spec = oracles::random_chain(n, 2, rng);
    const ComplexMatrix h = dense_hamiltonian(spec);
    const Real h_norm = operator_norm_hermitian(h);
    const Real t = 2.0 / h_norm;  // ||H|| t = 2
    const DensityState rho0 = DensityState::random_mixed(n, rng);
    const oracles::TimeAverageOracle oracle(h);
    const ComplexMatrix exact = oracle.average(rho0.matrix(), t);
    for (const int s : {3, 4, 6}) {
      const DensityState approx = time_averaged_state(rho0, spec, t, s);
      const Real diff = oracles::trace_norm_ref(approx.matrix() - exact);
      CHECK(diff <= quadrature_error_bound(s, h_norm, t) + 1e-10);
    }
  }
}

TEST_CASE("warm-start time averages satisfy the 2 eps / t commutator decay") {
  Rng rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + (trial % 3);
    const HamiltonianSpec spec = oracles::random_chain(n, 2, rng);
    const auto eigs = eigenstates(spec);
    const DensityState& steady = eigs[trial % eigs.size()].state;
    const DensityState junk = DensityState::random_mixed(n, rng);
    std::uniform_real_distribution<Real> unit(0.0, 1.0);
    const Real p = 0.02 + 0.2 * unit(rng);
    const ComplexMatrix mix = (1.0 - p) * steady.matrix() + p * junk.matrix();
    const DensityState rho0 = DensityState::from_valid_matrix(n, mix);
    const Real eps = oracles::trace_norm_ref(rho0.matrix() - steady.matrix());

    const ComplexMatrix h = dense_hamiltonian(spec);
    const oracles::TimeAverageOracle oracle(h);
    for (const Real t : {1.0, 5.0, 25.0}) {
      const ComplexMatrix avg = oracle.average(rho0.matrix(), t, 1e-10);
      const Real norm = oracles::trace_norm_ref(h * avg - avg * h);
      CHECK(norm <= 2.0 * eps / t + 1e-8);
      // Cross-check of the oracle itself: [H, avg] = i (rho(t) - rho(0)) / t.
      const ComplexMatrix drift =
          Complex(0, 1) * (oracle.propagate(rho0.matrix(), t) - rho0.matrix()) / t;
      CHECK(oracles::max_abs_diff(h * avg - avg * h, drift) < 1e-7);
    }
  }
}

TEST_CASE("trace expectations of bounded observables have bounded derivatives") {
  Rng rng(47);
  const HamiltonianSpec spec = oracles::random_chain(3, 2, rng);
  const ComplexMatrix h = dense_hamiltonian(spec);
  const Real h_norm = operator_norm_hermitian(h);
  const Real t = 2.5;
  const oracles::TimeAverageOracle oracle(h);
  // Pi = normalized random Hermitian observable, ||Pi|| = 1.
  ComplexMatrix pi = ComplexMatrix::Random(8, 8);
  pi = ((pi + pi.adjoint()) / 2.0).eval();
  pi /= operator_norm_hermitian(pi);
  const DensityState rho0 = DensityState::random_mixed(3, rng);
  const auto f = [&](Real u) {
    return (pi * oracle.propagate(rho0.matrix(), u * t)).trace().real();
  };
  const Real step = 1e-3;
  std::uniform_real_distribution<Real> mid(0.1, 0.9);
  for (int i = 0; i < 20; ++i) {
    const Real u = mid(rng);
    const Real d1 = std::abs((f(u + step) - f(u - step)) / (2.0 * step));
    const Real d2 = std::abs((f(u + step) - 2.0 * f(u) + f(u - step)) / (step * step));
    const Real b1 = 2.0 * h_norm * t;
    CHECK(d1 <= b1 * (1.0 + 1e-3) + 1e-6);
    CHECK(d2 <= b1 * b1 * (1.0 + 1e-3) + 1e-4);
  }
}

TEST_CASE("density state validation") {
  ComplexMatrix bad(2, 2);
  bad << 1, 1, 0, 0;  // not Hermitian
  CHECK_THROWS_AS(DensityState::from_matrix(1, bad), std::invalid_argument);
  ComplexMatrix traceless(2, 2);
  traceless << 2, 0, 0, -1;
  CHECK_THROWS_AS(DensityState::from_matrix(1, traceless), std::invalid_argument);
  ComplexMatrix negative(2, 2);
  negative << 1.5, 0, 0, -0.5;  // eigenvalue below the floor
  CHECK_THROWS_AS(DensityState::from_matrix(1, negative), std::invalid_argument);
  const DensityState ok = DensityState::from_matrix(1, ComplexMatrix::Identity(2, 2) / 2.0);
  CHECK(ok.dim() == 2);
}

TEST_CASE("hamiltonian JSON round trip") {
  Rng rng(53);
  const HamiltonianSpec spec = oracles::random_chain(3, 2, rng);
  const HamiltonianSpec back = hamiltonian_from_json(hamiltonian_to_json(spec));
  CHECK(back.basis.size() == spec.basis.size());
  for (int i = 0; i < spec.basis.size(); ++i) CHECK(back.basis[i] == spec.basis[i]);
  CHECK((back.couplings - spec.couplings).cwiseAbs().maxCoeff() == 0.0);

  const std::string csv = density_debug_csv(DensityState::maximally_mixed(1));
  CHECK(csv.find("row,col,re,im") == 0);
}
