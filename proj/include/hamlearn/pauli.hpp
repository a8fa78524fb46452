#pragma once

#include "hamlearn/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hamlearn {

// An n-qubit Pauli string in symplectic form: one X bit and one Z bit per
// site, letter = (x,z) with I=(0,0), X=(1,0), Z=(0,1), Y=(1,1). Site 0 is
// the leftmost letter of the string form and the most significant bit of a
// computational-basis index. Phases are tracked separately by the product
// operations. Immutable after construction; n is limited to 64 sites.
class PauliString {
 public:
  PauliString() = default;

  static PauliString identity(int n);
  static PauliString from_bits(int n, std::uint64_t x_bits, std::uint64_t z_bits);
  /// Parses a letter string over {I,X,Y,Z}, site 0 first ("XZIY").
  static PauliString from_letters(std::string_view letters);
  static PauliString single_site(int n, int site, char letter);

  int num_qubits() const { return n_; }
  std::uint64_t x_bits() const { return x_; }
  std::uint64_t z_bits() const { return z_; }
  std::uint64_t support_mask() const { return x_ | z_; }

  bool x_bit(int site) const { return (x_ >> site) & 1; }
  bool z_bit(int site) const { return (z_ >> site) & 1; }
  char letter(int site) const;

  /// Number of sites acted on non-trivially.
  int weight() const;
  bool is_identity() const { return (x_ | z_) == 0; }

  std::string to_string() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  PauliString(int n, std::uint64_t x, std::uint64_t z) : n_(n), x_(x), z_(z) {}

  int n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

/// A real multiple of a Pauli string; the zero result keeps an explicit
/// zero coefficient together with the (irrelevant) product string.
struct ScaledPauli {
  Real coefficient = 0.0;
  PauliString string;
};

struct PauliProduct {
  /// p*q = i^phase_exponent * string, exponent in {0,1,2,3}.
  int phase_exponent = 0;
  PauliString string;
};

/// Phase-tracked product of two Pauli strings of equal length.
PauliProduct multiply(const PauliString& p, const PauliString& q);

/// i[p,q] as a scaled Pauli; the coefficient is -2, 0, or +2, and is 0
/// exactly when p and q commute.
ScaledPauli hermitian_commutator(const PauliString& p, const PauliString& q);

/// True iff the symplectic inner product <p.x,q.z> + <p.z,q.x> is even.
bool commutes(const PauliString& p, const PauliString& q);

// An ordered basis of distinct non-identity Pauli strings. All matrices
// (K, A, covariances) index against this order, so it must be stable:
// the enumeration functions below produce a documented deterministic
// order and the constructor preserves whatever order it is given.
class PauliBasis {
 public:
  PauliBasis(int n, std::vector<PauliString> elements);

  int num_qubits() const { return n_; }
  int size() const { return static_cast<int>(elements_.size()); }
  const PauliString& operator[](int i) const { return elements_[i]; }
  const std::vector<PauliString>& elements() const { return elements_; }

  std::optional<int> index_of(const PauliString& p) const;
  std::vector<std::string> to_strings() const;

 private:
  int n_ = 0;
  std::vector<PauliString> elements_;
  std::unordered_map<std::uint64_t, int> index_;  // key = x | z<<n
};

/// All non-identity strings of weight <= k on n qubits, ordered
/// lexicographically by support set (prefix order on sorted site lists),
/// then by letters with X < Y < Z, site 0 varying slowest.
/// Size m = sum_{w=1..k} C(n,w) 3^w.
PauliBasis enumerate_k_body(int n, int k);

/// All non-identity strings whose support fits inside a contiguous window
/// of k sites on a 1-D chain, same order as enumerate_k_body.
PauliBasis enumerate_k_local_chain(int n, int k);

}  // namespace hamlearn
