#include "hamlearn/bayes.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace hamlearn {

namespace {

constexpr Real kSymTol = 1e-10;

// Cholesky with one jitter retry; the jitter scale tracks the matrix trace
// so it cannot distort well-conditioned inputs.
Eigen::LLT<RealMatrix> cholesky_or_throw(const RealMatrix& m, const char* what) {
  Eigen::LLT<RealMatrix> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const Real jitter = 1e-12 * m.trace() / static_cast<Real>(m.rows());
  if (jitter > 0) {
    RealMatrix bumped = m;
    bumped.diagonal().array() += jitter;
    llt.compute(bumped);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NumericalError(std::string(what) + ": covariance is not positive definite");
}

// sigma_e^2 * (S - Diag(S) + Tr(S) I) where S is a second-moment matrix.
void add_block_from_moments(RealMatrix& block, const RealVector& mean,
                            const RealMatrix& cov, Real sigma_e2) {
  const RealMatrix s = cov + mean * mean.transpose();
  block += sigma_e2 * s;
  block.diagonal() += sigma_e2 * (RealVector::Constant(s.rows(), s.trace()) - s.diagonal());
}

}  // namespace

GaussianBelief::GaussianBelief(RealVector mean_in, RealMatrix covariance_in)
    : mean(std::move(mean_in)), covariance(std::move(covariance_in)) {
  if (covariance.rows() != covariance.cols() || covariance.rows() != mean.size()) {
    throw std::invalid_argument("GaussianBelief: mean/covariance dimension mismatch");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > kSymTol) {
    throw std::invalid_argument("GaussianBelief: covariance is not symmetric");
  }
  cholesky_or_throw(covariance, "GaussianBelief");
}

ApproxErrorCov approx_error_covariance(const GaussianBelief& prior, Real sigma_e,
                                       const ForwardOperator& layout) {
  if (sigma_e < 0) throw std::invalid_argument("approx_error_covariance: sigma_e >= 0");
  const int m = layout.basis_size;
  const Eigen::Index expected_dim =
      (layout.layout == LayoutKind::kMultiControl)
          ? static_cast<Eigen::Index>(layout.num_controls + 1) * m
          : static_cast<Eigen::Index>(m);
  if (prior.mean.size() != expected_dim) {
    throw std::invalid_argument("approx_error_covariance: prior does not match layout");
  }
  const Real s2 = sigma_e * sigma_e;
  const Eigen::Index rows = static_cast<Eigen::Index>(layout.row_controls.size()) * m;
  ApproxErrorCov out;
  out.sigma_e = sigma_e;
  out.matrix = RealMatrix::Zero(rows, rows);
  for (std::size_t r = 0; r < layout.row_controls.size(); ++r) {
    RealMatrix block = RealMatrix::Zero(m, m);
    add_block_from_moments(block, prior.mean.head(m),
                           prior.covariance.topLeftCorner(m, m), s2);
    const int control = layout.row_controls[r];
    if (control > 0) {
      const Eigen::Index off = static_cast<Eigen::Index>(control) * m;
      add_block_from_moments(block, prior.mean.segment(off, m),
                             prior.covariance.block(off, off, m, m), s2);
    }
    out.matrix.block(static_cast<Eigen::Index>(r) * m, static_cast<Eigen::Index>(r) * m,
                     m, m) = block;
  }
  out.matrix = ((out.matrix + out.matrix.transpose()) / 2.0).eval();
  if (sigma_e > 0) {
    Eigen::LLT<RealMatrix> llt(out.matrix);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("approx_error_covariance: result is not PSD");
    }
  }
  return out;
}

namespace {

struct NormalEquations {
  RealMatrix precision;  // Gamma_x^-1 + A^T Gamma_eps^-1 A
  RealVector rhs;        // Gamma_x^-1 mean
};

NormalEquations build_normal_equations(const GaussianBelief& prior,
                                       const ForwardOperator& a,
                                       const ApproxErrorCov& err_cov) {
  if (a.cols() != prior.mean.size()) {
    throw std::invalid_argument("map_estimate: operator/prior dimension mismatch");
  }
  if (err_cov.matrix.rows() != a.rows()) {
    throw std::invalid_argument("map_estimate: error covariance does not match operator");
  }
  const auto prior_llt = cholesky_or_throw(prior.covariance, "map_estimate prior");
  const auto err_llt = cholesky_or_throw(err_cov.matrix, "map_estimate error covariance");
  NormalEquations eq;
  const RealMatrix weighted = err_llt.solve(a.assembled);  // Gamma_eps^-1 A
  eq.precision = prior_llt.solve(RealMatrix::Identity(prior.mean.size(), prior.mean.size()));
  eq.precision += a.assembled.transpose() * weighted;
  eq.precision = ((eq.precision + eq.precision.transpose()) / 2.0).eval();
  eq.rhs = prior_llt.solve(prior.mean);
  return eq;
}

}  // namespace

RealVector map_estimate(const GaussianBelief& prior, const ForwardOperator& a,
                        const ApproxErrorCov& err_cov) {
  const NormalEquations eq = build_normal_equations(prior, a, err_cov);
  return cholesky_or_throw(eq.precision, "map_estimate").solve(eq.rhs);
}

RealMatrix posterior_covariance(const GaussianBelief& prior, const ForwardOperator& a,
                                const ApproxErrorCov& err_cov) {
  const NormalEquations eq = build_normal_equations(prior, a, err_cov);
  RealMatrix cov = cholesky_or_throw(eq.precision, "posterior_covariance")
                       .solve(RealMatrix::Identity(eq.precision.rows(), eq.precision.cols()));
  return ((cov + cov.transpose()) / 2.0).eval();
}

GaussianBelief updated_belief(const GaussianBelief& belief, const ForwardOperator& a,
                              const ApproxErrorCov& err_cov) {
  const NormalEquations eq = build_normal_equations(belief, a, err_cov);
  const auto llt = cholesky_or_throw(eq.precision, "updated_belief");
  RealVector mean = llt.solve(eq.rhs);
  RealMatrix cov = llt.solve(RealMatrix::Identity(eq.precision.rows(), eq.precision.cols()));
  cov = ((cov + cov.transpose()) / 2.0).eval();
  return GaussianBelief(std::move(mean), std::move(cov));
}

GaussianBelief online_update(const GaussianBelief& belief, const ForwardOperator& a,
                             Real sigma_e) {
  return updated_belief(belief, a, approx_error_covariance(belief, sigma_e, a));
}

Real fidelity(const RealVector& a, const RealVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("fidelity: dimension mismatch");
  const Real na = a.norm();
  const Real nb = b.norm();
  if (na == 0 || nb == 0) throw std::invalid_argument("fidelity: zero vector");
  const Real overlap = a.dot(b) / (na * nb);
  return overlap * overlap;
}

Real thm3_infidelity_bound(int m, Real delta, Real gap, Real c_norm2) {
  if (gap <= 0) throw std::invalid_argument("thm3_infidelity_bound: gap must be > 0");
  if (c_norm2 <= 0) throw std::invalid_argument("thm3_infidelity_bound: ||c|| must be > 0");
  if (delta < 0) throw std::invalid_argument("thm3_infidelity_bound: delta >= 0");
  return static_cast<Real>(m) * delta * delta / (gap * c_norm2 * c_norm2);
}

Real cor1_infidelity_bound(int m, Real delta, Real eps, Real gap, Real c_norm1,
                           Real c_norm2) {
  if (gap <= 0) throw std::invalid_argument("cor1_infidelity_bound: gap must be > 0");
  if (c_norm2 <= 0) throw std::invalid_argument("cor1_infidelity_bound: ||c|| must be > 0");
  if (delta < 0 || eps < 0 || c_norm1 < 0) {
    throw std::invalid_argument("cor1_infidelity_bound: negative input");
  }
  const Real numer = delta + eps * c_norm1;
  return static_cast<Real>(m) * numer * numer / (gap * c_norm2 * c_norm2);
}

SampleBudget thm5_sample_budget(int m, int k, Real eps_target, Real gap,
                                Real delta_fail) {
  if (m < 2 || k < 1) throw std::invalid_argument("thm5_sample_budget: m >= 2, k >= 1");
  if (!(eps_target > 0 && eps_target < 1)) {
    throw std::invalid_argument("thm5_sample_budget: eps_target in (0,1)");
  }
  if (gap <= 0) throw std::invalid_argument("thm5_sample_budget: gap must be > 0");
  if (!(delta_fail > 0 && delta_fail < 1)) {
    throw std::invalid_argument("thm5_sample_budget: delta_fail in (0,1)");
  }
  SampleBudget budget;
  budget.quadrature_nodes = static_cast<int>(
      std::ceil(7.0 * m / (std::sqrt(gap) * std::sqrt(eps_target))));
  const Real s = budget.quadrature_nodes;
  budget.eps_sample = 7.0 / (2.0 * s);
  if (budget.eps_sample >= 1.0) {
    throw std::invalid_argument("thm5_sample_budget: derived sampling precision >= 1");
  }
  const Real eta = 2.0;  // worst-case warm-start distance in 1-norm
  budget.ht_star =
      4.0 * s *
      std::pow(std::pow(s, -1.5) * eta / (std::exp(2.0 * s) * std::sqrt(M_PI)),
               1.0 / (1.0 + 2.0 * s));
  const Real pairs = static_cast<Real>(m) * (m - 1) / 2.0;  // nonzero commutator cap
  const Real eps = budget.eps_sample;
  const Real per_node = 2.0 / (eps * eps * (1.0 - eps)) * std::pow(3.0, 2 * k - 1) *
                        std::log(3.0 * pairs * s / delta_fail);
  budget.shots_per_node = static_cast<long long>(std::ceil(per_node));
  budget.total_measurements =
      static_cast<long long>(budget.quadrature_nodes) * budget.shots_per_node;
  return budget;
}

EstimateReport make_estimate_report(const GaussianBelief& posterior,
                                    const RealVector* truth) {
  EstimateReport report;
  report.map = posterior.mean;
  report.covariance = posterior.covariance;
  report.marginal_two_sigma = 2.0 * posterior.covariance.diagonal().cwiseSqrt();
  report.expected_error = std::sqrt(posterior.covariance.trace());
  if (truth != nullptr) {
    report.fidelity_vs_truth = fidelity(posterior.mean, *truth);
  }
  return report;
}

std::string estimate_report_csv(const EstimateReport& report, const PauliBasis& basis,
                                const RealVector& prior_mean, const RealVector* truth) {
  std::ostringstream out;
  out << "coupling_index,pauli_string,true_value_if_known,prior_mean,posterior_mean,"
         "posterior_2sigma\n";
  char buf[160];
  for (int i = 0; i < basis.size(); ++i) {
    char truth_buf[32];
    if (truth != nullptr) {
      std::snprintf(truth_buf, sizeof truth_buf, "%.17g", (*truth)(i));
    } else {
      std::snprintf(truth_buf, sizeof truth_buf, "%s", "");
    }
    std::snprintf(buf, sizeof buf, "%d,%s,%s,%.17g,%.17g,%.17g\n", i,
                  basis[i].to_string().c_str(), truth_buf, prior_mean(i), report.map(i),
                  report.marginal_two_sigma(i));
    out << buf;
  }
  return out.str();
}

std::string covariance_csv(const RealMatrix& covariance) {
  std::ostringstream out;
  char buf[32];
  for (Eigen::Index r = 0; r < covariance.rows(); ++r) {
    for (Eigen::Index c = 0; c < covariance.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", covariance(r, c));
      out << buf << (c + 1 == covariance.cols() ? '\n' : ',');
    }
  }
  return out.str();
}

}  // namespace hamlearn
