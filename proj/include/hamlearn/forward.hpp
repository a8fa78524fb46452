#pragma once

#include "hamlearn/pauli.hpp"
#include "hamlearn/qsim.hpp"
#include "hamlearn/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hamlearn {

/// The m x m antisymmetric matrix K(rho) with K_jk = Tr(i [P_j, P_k] rho).
/// Any coupling vector whose Hamiltonian has rho as a steady state lies in
/// its kernel.
struct ConstraintMatrix {
  PauliBasis basis;
  RealMatrix entries;
};

enum class LayoutKind { kSingle, kMultiState, kMultiControl };

// A stacked constraint operator. The unknown layout is x = c for kSingle /
// kMultiState and x = [c; v_1; ...; v_N] for kMultiControl. Each block row
// has m rows; row_controls records which control field (1..N) a block row
// constrains, or 0 for a bare-Hamiltonian row. Control block row i is
// [K_i, 0, ..., K_i at block column i, ..., 0], so it annihilates c + v_i.
struct ForwardOperator {
  LayoutKind layout = LayoutKind::kSingle;
  int basis_size = 0;        // m
  int num_controls = 0;      // N (kMultiControl only)
  std::vector<int> row_controls;
  RealMatrix assembled;

  Eigen::Index rows() const { return assembled.rows(); }
  Eigen::Index cols() const { return assembled.cols(); }
};

/// Singular structure of an operator: full singular spectrum (descending),
/// the spectral gap lambda_2 - lambda_1 of A^T A (eigenvalues ascending),
/// and the machine-rank kernel dimension count.
struct SpectralReport {
  RealVector singular_values;
  Real gap = 0.0;
  int kernel_dim_estimate = 0;
  Real threshold_used = 0.0;
};

/// Least right singular vector of A. `degenerate` flags a near-tie between
/// the two smallest singular values (the kernel direction is then not
/// well-defined and the vector should not be trusted silently).
struct KernelEstimate {
  RealVector vector;
  bool degenerate = false;
  Real sigma_min = 0.0;
  Real sigma_next = 0.0;
};

ConstraintMatrix k_matrix(const DensityState& rho, const PauliBasis& basis);

/// M_jk = Tr({P_j,P_k} rho)/2 - Tr(P_j rho) Tr(P_k rho), symmetric PSD.
RealMatrix correlation_matrix(const DensityState& rho, const PauliBasis& basis);

/// Machine-precision rank threshold: max(rows, cols) * sigma_max * 1e-12.
Real default_kernel_threshold(Eigen::Index rows, Eigen::Index cols, Real sigma_max);

SpectralReport spectral_report(const RealMatrix& a,
                               std::optional<Real> kernel_threshold = std::nullopt);
SpectralReport spectral_report(const ConstraintMatrix& k,
                               std::optional<Real> kernel_threshold = std::nullopt);
SpectralReport spectral_report(const ForwardOperator& a,
                               std::optional<Real> kernel_threshold = std::nullopt);

ForwardOperator single_operator(const ConstraintMatrix& k);

/// Vertical stack [K_1; ...; K_N]; all blocks must share one basis.
ForwardOperator stack_states(const std::vector<ConstraintMatrix>& ks);

/// Control-field block layout over [c; v_1; ...; v_N]: top row [K_0, 0...],
/// row i >= 1 has K_i in block columns 0 and i.
ForwardOperator stack_controls(const ConstraintMatrix& k0,
                               const std::vector<ConstraintMatrix>& ks);

/// One bare block row [K_0, 0, ..., 0] over the (N+1) m unknowns; used for
/// sequential updates of the control-field model.
ForwardOperator control_row_bare(const ConstraintMatrix& k0, int num_controls);

/// One control block row over the (N+1) m unknowns, control_index in 1..N.
ForwardOperator control_row(const ConstraintMatrix& ki, int control_index,
                            int num_controls);

KernelEstimate kernel_estimate(const RealMatrix& a,
                               std::optional<Real> norm_target = std::nullopt,
                               const RealVector* sign_reference = nullptr);
KernelEstimate kernel_estimate(const ForwardOperator& a,
                               std::optional<Real> norm_target = std::nullopt,
                               const RealVector* sign_reference = nullptr);

/// Dense text dump: JSON header line describing the block layout, then the
/// assembled matrix as CSV rows. For cross-checking with external tools.
std::string forward_operator_dump(const ForwardOperator& a);

}  // namespace hamlearn
