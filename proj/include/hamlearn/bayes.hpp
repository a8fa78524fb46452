#pragma once

#include "hamlearn/forward.hpp"
#include "hamlearn/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hamlearn {

/// Gaussian belief over a coupling vector: mean and symmetric positive
/// definite covariance. Immutable value; updates return new beliefs.
struct GaussianBelief {
  GaussianBelief(RealVector mean_in, RealMatrix covariance_in);

  RealVector mean;
  RealMatrix covariance;
};

/// Covariance of the approximation error eps = -E x induced by entry noise
/// E on the forward operator, evaluated at the prior statistics. Block
/// diagonal, one m x m block per block row of the operator layout.
struct ApproxErrorCov {
  RealMatrix matrix;
  Real sigma_e = 0.0;
};

/// Per block: diagonal sigma_e^2 (Tr[Gamma] + ||mean||^2), off-diagonal
/// sigma_e^2 (Gamma_kl + mean_k mean_l). A bare block row draws these from
/// the c-prior; control block row i adds the v_i-prior contributions.
ApproxErrorCov approx_error_covariance(const GaussianBelief& prior, Real sigma_e,
                                       const ForwardOperator& layout);

/// argmin ||L_eps A x||^2 + ||L_x (x - mean)||^2 via the normal equations
/// (Gamma_x^-1 + A^T Gamma_eps^-1 A) mu = Gamma_x^-1 mean, solved by
/// Cholesky on the posterior precision.
RealVector map_estimate(const GaussianBelief& prior, const ForwardOperator& a,
                        const ApproxErrorCov& err_cov);

/// (Gamma_x^-1 + A^T Gamma_eps^-1 A)^-1; always <= Gamma_x in PSD order.
RealMatrix posterior_covariance(const GaussianBelief& prior, const ForwardOperator& a,
                                const ApproxErrorCov& err_cov);

/// One sequential update with a caller-supplied error covariance (used both
/// by the recomputing loop below and to freeze Gamma_eps across updates,
/// which makes a sequence of updates equal the joint stacked update).
GaussianBelief updated_belief(const GaussianBelief& belief, const ForwardOperator& a,
                              const ApproxErrorCov& err_cov);

/// One online iteration: recompute the approximation-error covariance from
/// the current belief, then apply the MAP/covariance update.
GaussianBelief online_update(const GaussianBelief& belief, const ForwardOperator& a,
                             Real sigma_e);

/// |a.b|^2 / (||a||^2 ||b||^2), invariant under nonzero rescaling.
Real fidelity(const RealVector& a, const RealVector& b);

/// m delta^2 / (gap ||c||_2^2): infidelity bound for the kernel estimate
/// from a delta-approximate steady state.
Real thm3_infidelity_bound(int m, Real delta, Real gap, Real c_norm2);

/// m (delta + eps ||c||_1)^2 / (gap ||c||_2^2), gap taken from the noisy
/// operator with entrywise |E| <= eps.
Real cor1_infidelity_bound(int m, Real delta, Real eps, Real gap, Real c_norm1,
                           Real c_norm2);

/// Concrete parameter assignments for the sample-complexity recipe:
/// s = ceil(7 m / (sqrt(gap) sqrt(eps_target))), eps_sample = 7 / (2 s),
/// L = ceil( 2/(eps^2(1-eps)) 3^(2k-1) ln(3 m' s / delta) ), m' = m(m-1)/2,
/// h t* = 4 s (s^(-3/2) eta / (e^(2s) sqrt(pi)))^(1/(1+2s)) with eta = 2,
/// total = s L. t_star is returned as the dimensionless product h t*.
struct SampleBudget {
  long long total_measurements = 0;
  int quadrature_nodes = 0;
  long long shots_per_node = 0;
  Real ht_star = 0.0;
  Real eps_sample = 0.0;
};

SampleBudget thm5_sample_budget(int m, int k, Real eps_target, Real gap,
                                Real delta_fail);

/// Point estimate with uncertainty: posterior mean/covariance, per-coupling
/// 2 sigma marginals, and the expected error sqrt(Tr[covariance]).
struct EstimateReport {
  RealVector map;
  RealMatrix covariance;
  RealVector marginal_two_sigma;
  std::optional<Real> fidelity_vs_truth;
  Real expected_error = 0.0;
};

EstimateReport make_estimate_report(const GaussianBelief& posterior,
                                    const RealVector* truth = nullptr);

/// CSV rows (coupling_index, pauli_string, true_value_if_known, prior_mean,
/// posterior_mean, posterior_2sigma) over the first basis.size() couplings.
std::string estimate_report_csv(const EstimateReport& report, const PauliBasis& basis,
                                const RealVector& prior_mean,
                                const RealVector* truth = nullptr);

/// Dense CSV of the posterior covariance.
std::string covariance_csv(const RealMatrix& covariance);

}  // namespace hamlearn
