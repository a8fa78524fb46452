#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hamlearn/pauli.hpp"
#include "oracles.hpp"

#include <set>

using namespace hamlearn;

namespace {

PauliString P(const char* letters) { return PauliString::from_letters(letters); }

// All non-identity strings on n qubits, for exhaustive small-n sweeps.
std::vector<PauliString> all_strings(int n) {
  return enumerate_k_body(n, n).elements();
}

}  // namespace

TEST_CASE("string round trip and letter accessors") {
  const PauliString p = P("XZIY");
  CHECK(p.num_qubits() == 4);
  CHECK(p.to_string() == "XZIY");
  CHECK(p.letter(0) == 'X');
  CHECK(p.letter(2) == 'I');
  CHECK(p.weight() == 3);
  CHECK(PauliString::identity(3).to_string() == "III");
  CHECK(PauliString::identity(3).weight() == 0);
  CHECK(PauliString::single_site(3, 1, 'Y') == P("IYI"));
  CHECK_THROWS_AS(PauliString::from_letters("XQ"), std::invalid_argument);
}

TEST_CASE("single-qubit multiplication table") {
  const auto [g, r] = multiply(P("X"), P("Y"));
  CHECK(g == 1);  // XY = iZ
  CHECK(r == P("Z"));

  const auto [g2, r2] = multiply(P("I"), P("Y"));
  CHECK(g2 == 0);
  CHECK(r2 == P("Y"));

  const auto [g3, r3] = multiply(P("Z"), P("X"));
  CHECK(g3 == 1);  // ZX = iY
  CHECK(r3 == P("Y"));
}

TEST_CASE("two-qubit product against dense oracle") {
  const auto [g, r] = multiply(P("ZX"), P("XX"));
  CHECK(g == 1);
  CHECK(r == P("YI"));
  // i^g * dense(r) == dense(p) * dense(q)
  const Complex phase = std::pow(Complex(0, 1), g);
  CHECK(oracles::max_abs_diff(phase * oracles::dense(r),
                              oracles::dense(P("ZX")) * oracles::dense(P("XX"))) < 1e-12);
}

TEST_CASE("multiply matches dense products exhaustively for n <= 2") {
  for (int n = 1; n <= 2; ++n) {
    auto strings = all_strings(n);
    strings.push_back(PauliString::identity(n));
    for (const auto& p : strings) {
      for (const auto& q : strings) {
        const auto [g, r] = multiply(p, q);
        const Complex phase = std::pow(Complex(0, 1), g);
        CHECK(oracles::max_abs_diff(phase * oracles::dense(r),
                                    oracles::dense(p) * oracles::dense(q)) < 1e-12);
      }
    }
  }
}

TEST_CASE("multiply matches dense products on random n=3 pairs") {
  Rng rng(7);
  const auto strings = all_strings(3);
  std::uniform_int_distribution<std::size_t> pick(0, strings.size() - 1);
  for (int trial = 0; trial < 500; ++trial) {
    const auto& p = strings[pick(rng)];
    const auto& q = strings[pick(rng)];
    const auto [g, r] = multiply(p, q);
    const Complex phase = std::pow(Complex(0, 1), g);
    CHECK(oracles::max_abs_diff(phase * oracles::dense(r),
                                oracles::dense(p) * oracles::dense(q)) < 1e-12);
  }
}

TEST_CASE("hermitian commutator basics") {
  const ScaledPauli xy = hermitian_commutator(P("X"), P("Y"));
  CHECK(xy.coefficient == -2.0);  // i(XY - YX) = -2Z
  CHECK(xy.string == P("Z"));

  CHECK(hermitian_commutator(P("X"), P("X")).coefficient == 0.0);

  const ScaledPauli zi = hermitian_commutator(P("ZI"), P("XX"));
  CHECK(zi.coefficient == -2.0);
  CHECK(zi.string == P("YX"));
}

TEST_CASE("hermitian commutator matches dense i[P,Q] for all n <= 2 pairs") {
  for (int n = 1; n <= 2; ++n) {
    const auto strings = all_strings(n);
    for (const auto& p : strings) {
      for (const auto& q : strings) {
        const ScaledPauli c = hermitian_commutator(p, q);
        const ComplexMatrix dp = oracles::dense(p);
        const ComplexMatrix dq = oracles::dense(q);
        const ComplexMatrix expected = Complex(0, 1) * (dp * dq - dq * dp);
        CHECK(oracles::max_abs_diff(c.coefficient * oracles::dense(c.string), expected) <
              1e-12);
        // Output is Hermitian with a real coefficient in {-2, 0, 2}.
        CHECK((c.coefficient == 0.0 || c.coefficient == 2.0 || c.coefficient == -2.0));
        CHECK(commutes(p, q) == (c.coefficient == 0.0));
      }
    }
  }
}

TEST_CASE("commutes agrees with the dense oracle and hermitian_commutator on n=3") {
  Rng rng(11);
  const auto strings = all_strings(3);
  std::uniform_int_distribution<std::size_t> pick(0, strings.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto& p = strings[pick(rng)];
    const auto& q = strings[pick(rng)];
    const ComplexMatrix dp = oracles::dense(p);
    const ComplexMatrix dq = oracles::dense(q);
    const bool dense_commutes = oracles::max_abs_diff(dp * dq, dq * dp) < 1e-12;
    CHECK(commutes(p, q) == dense_commutes);
    CHECK(commutes(p, q) == (hermitian_commutator(p, q).coefficient == 0.0));
  }
}

TEST_CASE("commutes single-qubit facts") {
  CHECK(commutes(P("X"), P("X")));
  CHECK_FALSE(commutes(P("X"), P("Z")));
  CHECK(commutes(P("XZ"), P("ZX")));  // two anticommuting sites
}

TEST_CASE("commutator weight bound") {
  Rng rng(13);
  const auto strings = all_strings(3);
  std::uniform_int_distribution<std::size_t> pick(0, strings.size() - 1);
  for (int trial = 0; trial < 500; ++trial) {
    const auto& p = strings[pick(rng)];
    const auto& q = strings[pick(rng)];
    const ScaledPauli c = hermitian_commutator(p, q);
    if (c.coefficient != 0.0) {
      CHECK(c.string.weight() <= p.weight() + q.weight() - 1);
    }
  }
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_THROWS_AS(multiply(P("X"), P("XX")), std::invalid_argument);
  CHECK_THROWS_AS(hermitian_commutator(P("X"), P("XX")), std::invalid_argument);
  CHECK_THROWS_AS(commutes(P("X"), P("XX")), std::invalid_argument);
}

TEST_CASE("k-body enumeration counts and order") {
  const PauliBasis one = enumerate_k_body(1, 1);
  CHECK(one.size() == 3);
  CHECK(one[0] == P("X"));
  CHECK(one[1] == P("Y"));
  CHECK(one[2] == P("Z"));

  CHECK(enumerate_k_body(4, 2).size() == 66);
  CHECK(enumerate_k_body(3, 2).size() == 36);

  // m = 4^n - 1 when k = n.
  for (int n = 1; n <= 3; ++n) {
    CHECK(enumerate_k_body(n, n).size() == (1 << (2 * n)) - 1);
  }

  // Count formula: sum_w C(n,w) 3^w, cross-checked by explicit set size.
  const PauliBasis b32 = enumerate_k_body(3, 2);
  std::set<std::string> seen;
  for (const auto& p : b32.elements()) {
    CHECK(p.weight() <= 2);
    CHECK(p.weight() >= 1);
    seen.insert(p.to_string());
  }
  CHECK(static_cast<int>(seen.size()) == b32.size());

  CHECK_THROWS_AS(enumerate_k_body(3, 0), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_k_body(3, 4), std::invalid_argument);
}

TEST_CASE("enumeration order is lexicographic by support then letters") {
  const PauliBasis b = enumerate_k_body(2, 2);
  CHECK(b[0] == P("XI"));  // support {0}
  CHECK(b[1] == P("YI"));
  CHECK(b[2] == P("ZI"));
  CHECK(b[3] == P("XX"));  // support {0,1}
  CHECK(b[4] == P("XY"));
  CHECK(b[5] == P("XZ"));
  CHECK(b[6] == P("YX"));
  CHECK(b[11] == P("ZZ"));
  CHECK(b[12] == P("IX"));  // support {1}
  CHECK(b.size() == 15);
}

TEST_CASE("chain enumeration window containment") {
  const PauliBasis whole = enumerate_k_local_chain(2, 2);
  CHECK(whole.size() == 15);

  const PauliBasis b = enumerate_k_local_chain(3, 2);
  CHECK(b.index_of(P("XXI")).has_value());
  CHECK(b.index_of(P("IXX")).has_value());
  CHECK_FALSE(b.index_of(P("XIX")).has_value());
}

TEST_CASE("chain enumeration matches brute-force window union") {
  for (const auto [n, k] : {std::pair{4, 2}, std::pair{5, 3}, std::pair{10, 2}}) {
    // Oracle: enumerate every window's full local algebra, dedupe.
    std::set<std::string> expected;
    for (int start = 0; start + k <= n; ++start) {
      const PauliBasis local = enumerate_k_body(k, k);
      for (const auto& p : local.elements()) {
        std::string word(static_cast<std::size_t>(n), 'I');
        for (int site = 0; site < k; ++site) word[start + site] = p.letter(site);
        expected.insert(word);
      }
    }
    const PauliBasis b = enumerate_k_local_chain(n, k);
    std::set<std::string> got;
    for (const auto& p : b.elements()) got.insert(p.to_string());
    CHECK(got == expected);
    if (n == 10 && k == 2) CHECK(b.size() == 111);
  }
}

TEST_CASE("basis rejects duplicates and identity") {
  CHECK_THROWS_AS(PauliBasis(1, {P("X"), P("X")}), std::invalid_argument);
  CHECK_THROWS_AS(PauliBasis(1, {PauliString::identity(1)}), std::invalid_argument);
  const PauliBasis b(2, {P("XI"), P("IZ")});
  CHECK(b.index_of(P("IZ")) == 1);
  CHECK_FALSE(b.index_of(P("ZZ")).has_value());
  CHECK(b.to_strings() == std::vector<std::string>{"XI", "IZ"});
}
