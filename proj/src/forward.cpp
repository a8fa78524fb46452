#include "hamlearn/forward.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace hamlearn {

namespace {

void check_state_basis(const DensityState& rho, const PauliBasis& basis) {
  if (rho.num_qubits() != basis.num_qubits()) {
    throw std::invalid_argument("constraint construction: state and basis sizes differ");
  }
}

Eigen::BDCSVD<RealMatrix> full_svd(const RealMatrix& a) {
  if (!a.allFinite()) {
    throw std::invalid_argument("spectral analysis: matrix has non-finite entries");
  }
  Eigen::BDCSVD<RealMatrix> svd(a, Eigen::ComputeFullV);
  return svd;
}

}  // namespace

ConstraintMatrix k_matrix(const DensityState& rho, const PauliBasis& basis) {
  check_state_basis(rho, basis);
  const int m = basis.size();
  RealMatrix k = RealMatrix::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    for (int l = j + 1; l < m; ++l) {
      const ScaledPauli c = hermitian_commutator(basis[j], basis[l]);
      if (c.coefficient == 0.0) continue;
      const Real value = c.coefficient * pauli_expectation(c.string, rho);
      k(j, l) = value;
      k(l, j) = -value;
    }
  }
  return ConstraintMatrix{basis, std::move(k)};
}

RealMatrix correlation_matrix(const DensityState& rho, const PauliBasis& basis) {
  check_state_basis(rho, basis);
  const int m = basis.size();
  RealVector means(m);
  for (int j = 0; j < m; ++j) means(j) = pauli_expectation(basis[j], rho);
  RealMatrix mat(m, m);
  for (int j = 0; j < m; ++j) {
    // {P_j, P_j} = 2 I, so the diagonal is 1 - <P_j>^2.
    mat(j, j) = 1.0 - means(j) * means(j);
    for (int l = j + 1; l < m; ++l) {
      Real anti = 0.0;
      if (commutes(basis[j], basis[l])) {
        // {P_j, P_l} = 2 P_j P_l = 2 (+-1) R for commuting Hermitian strings.
        const PauliProduct prod = multiply(basis[j], basis[l]);
        const Real sign = (prod.phase_exponent == 0) ? 1.0 : -1.0;
        anti = sign * pauli_expectation(prod.string, rho);
      }
      const Real value = anti - means(j) * means(l);
      mat(j, l) = value;
      mat(l, j) = value;
    }
  }
  return mat;
}

Real default_kernel_threshold(Eigen::Index rows, Eigen::Index cols, Real sigma_max) {
  return static_cast<Real>(std::max(rows, cols)) * sigma_max * 1e-12;
}

SpectralReport spectral_report(const RealMatrix& a, std::optional<Real> kernel_threshold) {
  const auto svd = full_svd(a);
  SpectralReport report;
  report.singular_values = svd.singularValues();
  const Eigen::Index count = report.singular_values.size();
  // A^T A has cols eigenvalues; a wide matrix contributes cols - count
  // implicit zeros below the computed singular values.
  const Eigen::Index implicit_zeros = a.cols() - count;
  if (implicit_zeros >= 2) {
    report.gap = 0.0;
  } else if (implicit_zeros == 1 && count >= 1) {
    const Real s1 = report.singular_values(count - 1);
    report.gap = s1 * s1;
  } else if (count >= 2) {
    const Real s1 = report.singular_values(count - 1);
    const Real s2 = report.singular_values(count - 2);
    report.gap = s2 * s2 - s1 * s1;
  }
  const Real sigma_max = (count > 0) ? report.singular_values(0) : 0.0;
  report.threshold_used =
      kernel_threshold.value_or(default_kernel_threshold(a.rows(), a.cols(), sigma_max));
  if (sigma_max == 0.0 && !kernel_threshold.has_value()) {
    report.kernel_dim_estimate = static_cast<int>(a.cols());
  } else {
    int dim = static_cast<int>(a.cols() - count);  // columns beyond rank bound
    for (Eigen::Index i = 0; i < count; ++i) {
      if (report.singular_values(i) < report.threshold_used) ++dim;
    }
    report.kernel_dim_estimate = dim;
  }
  return report;
}

SpectralReport spectral_report(const ConstraintMatrix& k, std::optional<Real> kernel_threshold) {
  return spectral_report(k.entries, kernel_threshold);
}

SpectralReport spectral_report(const ForwardOperator& a, std::optional<Real> kernel_threshold) {
  return spectral_report(a.assembled, kernel_threshold);
}

namespace {

void check_shared_basis(const PauliBasis& a, const PauliBasis& b) {
  if (a.num_qubits() != b.num_qubits() || a.size() != b.size()) {
    throw std::invalid_argument("stacking: constraint matrices use different bases");
  }
  for (int i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) {
      throw std::invalid_argument("stacking: constraint matrices use different bases");
    }
  }
}

}  // namespace

ForwardOperator single_operator(const ConstraintMatrix& k) {
  ForwardOperator a;
  a.layout = LayoutKind::kSingle;
  a.basis_size = k.basis.size();
  a.num_controls = 0;
  a.row_controls = {0};
  a.assembled = k.entries;
  return a;
}

ForwardOperator stack_states(const std::vector<ConstraintMatrix>& ks) {
  if (ks.empty()) throw std::invalid_argument("stack_states: need at least one block");
  const int m = ks.front().basis.size();
  for (const auto& k : ks) check_shared_basis(ks.front().basis, k.basis);
  ForwardOperator a;
  a.layout = LayoutKind::kMultiState;
  a.basis_size = m;
  a.num_controls = 0;
  a.assembled.resize(static_cast<Eigen::Index>(ks.size()) * m, m);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    a.assembled.middleRows(static_cast<Eigen::Index>(i) * m, m) = ks[i].entries;
    a.row_controls.push_back(0);
  }
  return a;
}

ForwardOperator stack_controls(const ConstraintMatrix& k0,
                               const std::vector<ConstraintMatrix>& ks) {
  const int m = k0.basis.size();
  const int n_controls = static_cast<int>(ks.size());
  for (const auto& k : ks) check_shared_basis(k0.basis, k.basis);
  if (n_controls == 0) return single_operator(k0);
  ForwardOperator a;
  a.layout = LayoutKind::kMultiControl;
  a.basis_size = m;
  a.num_controls = n_controls;
  const Eigen::Index side = static_cast<Eigen::Index>(n_controls + 1) * m;
  a.assembled = RealMatrix::Zero(side, side);
  a.assembled.topLeftCorner(m, m) = k0.entries;
  a.row_controls.push_back(0);
  for (int i = 1; i <= n_controls; ++i) {
    a.assembled.block(Eigen::Index(i) * m, 0, m, m) = ks[static_cast<std::size_t>(i - 1)].entries;
    a.assembled.block(Eigen::Index(i) * m, Eigen::Index(i) * m, m, m) =
        ks[static_cast<std::size_t>(i - 1)].entries;
    a.row_controls.push_back(i);
  }
  return a;
}

ForwardOperator control_row_bare(const ConstraintMatrix& k0, int num_controls) {
  if (num_controls < 0) throw std::invalid_argument("control_row_bare: N >= 0");
  const int m = k0.basis.size();
  ForwardOperator a;
  a.layout = LayoutKind::kMultiControl;
  a.basis_size = m;
  a.num_controls = num_controls;
  a.assembled = RealMatrix::Zero(m, static_cast<Eigen::Index>(num_controls + 1) * m);
  a.assembled.leftCols(m) = k0.entries;
  a.row_controls = {0};
  return a;
}

ForwardOperator control_row(const ConstraintMatrix& ki, int control_index,
                            int num_controls) {
  if (control_index < 1 || control_index > num_controls) {
    throw std::invalid_argument("control_row: control index out of range");
  }
  const int m = ki.basis.size();
  ForwardOperator a;
  a.layout = LayoutKind::kMultiControl;
  a.basis_size = m;
  a.num_controls = num_controls;
  a.assembled = RealMatrix::Zero(m, static_cast<Eigen::Index>(num_controls + 1) * m);
  a.assembled.leftCols(m) = ki.entries;
  a.assembled.middleCols(static_cast<Eigen::Index>(control_index) * m, m) = ki.entries;
  a.row_controls = {control_index};
  return a;
}

KernelEstimate kernel_estimate(const RealMatrix& a, std::optional<Real> norm_target,
                               const RealVector* sign_reference) {
  const auto svd = full_svd(a);
  const RealVector& sv = svd.singularValues();
  const Eigen::Index count = sv.size();
  KernelEstimate est;
  est.sigma_min = (count > 0) ? sv(count - 1) : 0.0;
  est.sigma_next = (count > 1) ? sv(count - 2) : est.sigma_min;
  est.vector = svd.matrixV().col(svd.matrixV().cols() - 1);
  // Near-tied smallest singular pair: the returned direction is arbitrary
  // within the subspace, so flag instead of picking silently.
  const Real tie_threshold =
      default_kernel_threshold(a.rows(), a.cols(), (count > 0) ? sv(0) : 0.0);
  est.degenerate = (est.sigma_next - est.sigma_min) <= tie_threshold;
  if (norm_target.has_value()) {
    const Real norm = est.vector.norm();
    if (norm > 0) est.vector *= (*norm_target / norm);
  }
  if (sign_reference != nullptr) {
    if (sign_reference->size() != est.vector.size()) {
      throw std::invalid_argument("kernel_estimate: sign reference dimension mismatch");
    }
    if (sign_reference->dot(est.vector) < 0) est.vector = -est.vector;
  }
  return est;
}

KernelEstimate kernel_estimate(const ForwardOperator& a, std::optional<Real> norm_target,
                               const RealVector* sign_reference) {
  return kernel_estimate(a.assembled, norm_target, sign_reference);
}

std::string forward_operator_dump(const ForwardOperator& a) {
  std::ostringstream out;
  const char* layout = "single";
  if (a.layout == LayoutKind::kMultiState) layout = "multi_state";
  if (a.layout == LayoutKind::kMultiControl) layout = "multi_control";
  out << "{\"layout\":\"" << layout << "\",\"m\":" << a.basis_size
      << ",\"num_controls\":" << a.num_controls << ",\"rows\":" << a.rows()
      << ",\"cols\":" << a.cols() << "}\n";
  char buf[32];
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", a.assembled(r, c));
      out << buf << (c + 1 == a.cols() ? '\n' : ',');
    }
  }
  return out.str();
}

}  // namespace hamlearn
