#include "hamlearn/pauli.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace hamlearn {

namespace {

void check_site_count(int n) {
  if (n < 1 || n > 64) {
    throw std::invalid_argument("PauliString: qubit count must be in [1, 64]");
  }
}

void check_same_size(const PauliString& p, const PauliString& q) {
  if (p.num_qubits() != q.num_qubits()) {
    throw std::invalid_argument("Pauli operation: qubit counts differ");
  }
}

int parity(std::uint64_t bits) { return std::popcount(bits) & 1; }

}  // namespace

PauliString PauliString::identity(int n) {
  check_site_count(n);
  return from_bits(n, 0, 0);
}

PauliString PauliString::from_bits(int n, std::uint64_t x_bits, std::uint64_t z_bits) {
  check_site_count(n);
  const std::uint64_t mask = (n == 64) ? ~0ULL : ((1ULL << n) - 1);
  if ((x_bits & ~mask) || (z_bits & ~mask)) {
    throw std::invalid_argument("PauliString: bits set beyond qubit count");
  }
  return PauliString(n, x_bits, z_bits);
}

PauliString PauliString::from_letters(std::string_view letters) {
  const int n = static_cast<int>(letters.size());
  check_site_count(n);
  std::uint64_t x = 0, z = 0;
  for (int site = 0; site < n; ++site) {
    switch (letters[site]) {
      case 'I': break;
      case 'X': x |= 1ULL << site; break;
      case 'Y': x |= 1ULL << site; z |= 1ULL << site; break;
      case 'Z': z |= 1ULL << site; break;
      default:
        throw std::invalid_argument("PauliString: letters must be I, X, Y, or Z");
    }
  }
  return PauliString(n, x, z);
}

PauliString PauliString::single_site(int n, int site, char letter) {
  check_site_count(n);
  if (site < 0 || site >= n) {
    throw std::invalid_argument("PauliString: site out of range");
  }
  std::string letters(static_cast<std::size_t>(n), 'I');
  letters[site] = letter;
  return from_letters(letters);
}

char PauliString::letter(int site) const {
  const bool x = x_bit(site), z = z_bit(site);
  if (x && z) return 'Y';
  if (x) return 'X';
  if (z) return 'Z';
  return 'I';
}

int PauliString::weight() const { return std::popcount(x_ | z_); }

std::string PauliString::to_string() const {
  std::string out(static_cast<std::size_t>(n_), 'I');
  for (int site = 0; site < n_; ++site) out[site] = letter(site);
  return out;
}

PauliProduct multiply(const PauliString& p, const PauliString& q) {
  check_same_size(p, q);
  const std::uint64_t x1 = p.x_bits(), z1 = p.z_bits();
  const std::uint64_t x2 = q.x_bits(), z2 = q.z_bits();
  const std::uint64_t x3 = x1 ^ x2, z3 = z1 ^ z2;
  // Per site, with the convention Y = i X Z:
  //   P(x1,z1) P(x2,z2) = i^(x1 z1 + x2 z2 - x3 z3 + 2 z1 x2) P(x3,z3).
  // Summed over sites mod 4. popcounts give the per-site sums.
  int g = std::popcount(x1 & z1) + std::popcount(x2 & z2) -
          std::popcount(x3 & z3) + 2 * std::popcount(z1 & x2);
  g &= 3;
  return PauliProduct{g, PauliString::from_bits(p.num_qubits(), x3, z3)};
}

ScaledPauli hermitian_commutator(const PauliString& p, const PauliString& q) {
  check_same_size(p, q);
  const PauliProduct pq = multiply(p, q);
  if (commutes(p, q)) {
    return ScaledPauli{0.0, pq.string};
  }
  // Anticommuting Hermitian strings: pq is anti-Hermitian, so the phase
  // exponent is odd and i[p,q] = 2 i^(g+1) r with i^(g+1) = ±1.
  const Real coeff = (pq.phase_exponent == 1) ? -2.0 : 2.0;
  return ScaledPauli{coeff, pq.string};
}

bool commutes(const PauliString& p, const PauliString& q) {
  check_same_size(p, q);
  return (parity(p.x_bits() & q.z_bits()) ^ parity(p.z_bits() & q.x_bits())) == 0;
}

PauliBasis::PauliBasis(int n, std::vector<PauliString> elements)
    : n_(n), elements_(std::move(elements)) {
  check_site_count(n);
  index_.reserve(elements_.size());
  for (int i = 0; i < static_cast<int>(elements_.size()); ++i) {
    const PauliString& p = elements_[i];
    if (p.num_qubits() != n_) {
      throw std::invalid_argument("PauliBasis: element qubit count differs from basis");
    }
    if (p.is_identity()) {
      throw std::invalid_argument("PauliBasis: identity is excluded");
    }
    const std::uint64_t key = p.x_bits() | (p.z_bits() << n_);
    if (!index_.emplace(key, i).second) {
      throw std::invalid_argument("PauliBasis: duplicate element " + p.to_string());
    }
  }
}

std::optional<int> PauliBasis::index_of(const PauliString& p) const {
  if (p.num_qubits() != n_) return std::nullopt;
  const auto it = index_.find(p.x_bits() | (p.z_bits() << n_));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> PauliBasis::to_strings() const {
  std::vector<std::string> out;
  out.reserve(elements_.size());
  for (const PauliString& p : elements_) out.push_back(p.to_string());
  return out;
}

namespace {

// Emits supports in lexicographic prefix order ({0}, {0,1}, {0,1,2}, ...,
// {0,2}, ..., {1}, ...), then all letter words per support with X < Y < Z
// and site 0 varying slowest.
void emit_letter_words(int n, const std::vector<int>& support,
                       std::vector<PauliString>& out) {
  const int w = static_cast<int>(support.size());
  const char letters[3] = {'X', 'Y', 'Z'};
  std::string word(static_cast<std::size_t>(n), 'I');
  long count = 1;
  for (int i = 0; i < w; ++i) count *= 3;
  for (long code = 0; code < count; ++code) {
    long c = code;
    for (int i = w - 1; i >= 0; --i) {
      word[support[i]] = letters[c % 3];
      c /= 3;
    }
    out.push_back(PauliString::from_letters(word));
  }
}

void enumerate_supports(int n, int max_weight, int max_span, int next_site,
                        std::vector<int>& support, std::vector<PauliString>& out) {
  if (!support.empty()) emit_letter_words(n, support, out);
  if (static_cast<int>(support.size()) >= max_weight) return;
  for (int site = next_site; site < n; ++site) {
    if (!support.empty() && max_span > 0 && site - support.front() >= max_span) break;
    support.push_back(site);
    enumerate_supports(n, max_weight, max_span, site + 1, support, out);
    support.pop_back();
  }
}

PauliBasis enumerate_impl(int n, int k, bool chain) {
  if (k < 1 || k > n) {
    throw std::invalid_argument("enumerate: require 1 <= k <= n");
  }
  std::vector<PauliString> out;
  std::vector<int> support;
  // For the chain family the support must fit inside a k-site window,
  // i.e. max(site) - min(site) <= k - 1; weight <= k follows.
  enumerate_supports(n, k, chain ? k : 0, 0, support, out);
  return PauliBasis(n, std::move(out));
}

}  // namespace

PauliBasis enumerate_k_body(int n, int k) { return enumerate_impl(n, k, false); }

PauliBasis enumerate_k_local_chain(int n, int k) { return enumerate_impl(n, k, true); }

}  // namespace hamlearn
