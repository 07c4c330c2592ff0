#ifndef GPCC_GP_PRIOR_HPP_
#define GPCC_GP_PRIOR_HPP_

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpcc/errors.hpp"

namespace gpcc {

/// Conditioning inputs, one row per point.
using Inputs = Eigen::MatrixXd;

/// Squared-exponential hyperparameters:
///   k(z, z') = beta * exp(-(z - z')^T diag(lambda) (z - z')) + gamma [z == z']
struct KernelHyper {
  Eigen::VectorXd lambda; // inverse squared length-scales, one per dimension
  double beta = 1.0;      // amplitude
  double gamma = 0.0;     // diagonal noise

  void validate() const {
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (!std::isfinite(lambda[i]) || lambda[i] < 0.0) {
        throw DomainError("kernel lambda must be finite and non-negative");
      }
    }
    if (!std::isfinite(beta) || beta < 0.0 || !std::isfinite(gamma) ||
        gamma < 0.0) {
      throw DomainError("kernel beta and gamma must be finite and non-negative");
    }
    if (!(beta + gamma > 0.0)) {
      throw DomainError("kernel beta + gamma must be positive");
    }
  }
};

/// GP prior for one latent function: constant mean, SE kernel and the FITC
/// pseudo-inputs.
struct GpPrior {
  double mean_const = 0.0;
  KernelHyper hyper;
  Inputs pseudo_inputs;
};

struct LatentGaussian {
  double mean = 0.0;
  double variance = 0.0;
};

inline Eigen::MatrixXd kernel_matrix(const Inputs &a, const Inputs &b,
                                     const KernelHyper &hyper,
                                     bool add_noise_diag) {
  if (a.cols() != b.cols() || a.cols() != hyper.lambda.size()) {
    throw ShapeError("kernel_matrix: input dimension mismatch (" +
                     std::to_string(a.cols()) + ", " +
                     std::to_string(b.cols()) + ", lambda " +
                     std::to_string(hyper.lambda.size()) + ")");
  }
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    for (Eigen::Index l = 0; l < b.rows(); ++l) {
      const Eigen::VectorXd d = (a.row(j) - b.row(l)).transpose();
      const double q = d.dot(hyper.lambda.cwiseProduct(d));
      k(j, l) = hyper.beta * std::exp(-q);
    }
  }
  if (add_noise_diag) {
    const Eigen::Index m = std::min(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < m; ++j) {
      if (a.row(j) == b.row(j)) {
        k(j, j) += hyper.gamma;
      }
    }
  }
  return k;
}

/// Affine map of scalar time indices onto [0, 1] over the given range.
inline Inputs normalized_time_inputs(std::size_t n, double first = 0.0,
                                     double last = -1.0) {
  if (last < first) {
    last = n > 1 ? static_cast<double>(n - 1) : 1.0;
  }
  const double span = last > first ? last - first : 1.0;
  Inputs z(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    z(static_cast<Eigen::Index>(i), 0) = (static_cast<double>(i) - first) / span;
  }
  return z;
}

/// `count` training inputs evenly spaced in sorted order along the first
/// coordinate. Independent of row order.
inline Inputs evenly_spaced_pseudo_inputs(const Inputs &train,
                                          std::size_t count) {
  const auto n = static_cast<std::size_t>(train.rows());
  if (n == 0 || count == 0) {
    throw ShapeError("pseudo-input selection needs inputs and count >= 1");
  }
  count = std::min(count, n);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return train(a, 0) < train(b, 0);
  });
  Inputs out(static_cast<Eigen::Index>(count), train.cols());
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t idx =
        count == 1 ? (n - 1) / 2
                   : static_cast<std::size_t>(std::llround(
                         static_cast<double>(j) * static_cast<double>(n - 1) /
                         static_cast<double>(count - 1)));
    out.row(static_cast<Eigen::Index>(j)) = train.row(order[idx]);
  }
  return out;
}

/// FITC form of the training covariance: K' = D + V V^T with V V^T = Q.
struct FitcFactor {
  KernelHyper hyper;
  Inputs pseudo_inputs;
  Inputs train;
  Eigen::MatrixXd kmm_chol; // lower Cholesky factor of K_mm + jitter
  Eigen::MatrixXd V;        // n x m
  Eigen::VectorXd D;        // diag(K) - diag(Q), clamped at zero
  Eigen::VectorXd diag_k;   // diag(K) including noise

  Eigen::Index size() const { return V.rows(); }
  Eigen::Index rank() const { return V.cols(); }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd k = V * V.transpose();
    k.diagonal() += D;
    return k;
  }

  /// L^{-1} k_m(query).
  Eigen::VectorXd project(const Eigen::RowVectorXd &query) const {
    if (query.size() != pseudo_inputs.cols()) {
      throw ShapeError("query dimension " + std::to_string(query.size()) +
                       " does not match inputs dimension " +
                       std::to_string(pseudo_inputs.cols()));
    }
    const Eigen::VectorXd kq =
        kernel_matrix(pseudo_inputs, Inputs(query), hyper, false).col(0);
    return kmm_chol.triangularView<Eigen::Lower>().solve(kq);
  }

  double prior_variance() const { return hyper.beta + hyper.gamma; }
};

inline constexpr double kMinJitterFactor = 1e-12;
inline constexpr double kMaxJitterFactor = 1e-6;

inline FitcFactor fitc_decompose(const Inputs &train, const GpPrior &prior) {
  prior.hyper.validate();
  if (prior.pseudo_inputs.rows() < 1) {
    throw ShapeError("FITC needs at least one pseudo-input");
  }
  if (prior.pseudo_inputs.cols() != train.cols() && train.rows() > 0) {
    throw ShapeError("pseudo-inputs and training inputs differ in dimension");
  }
  FitcFactor f;
  f.hyper = prior.hyper;
  f.pseudo_inputs = prior.pseudo_inputs;
  f.train = train;
  const Eigen::MatrixXd kmm =
      kernel_matrix(prior.pseudo_inputs, prior.pseudo_inputs, prior.hyper, false);
  // Smallest jitter that factorizes: the diagonal correction at n0 = n is of
  // the order of the jitter, so it is kept as small as the Gram matrix allows.
  bool factored = false;
  for (double jitter = kMinJitterFactor; jitter <= kMaxJitterFactor * 1.0001; jitter *= 100.0) {
    Eigen::MatrixXd a = kmm;
    a.diagonal().array() += jitter * std::max(prior.hyper.beta, 1e-300);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      f.kmm_chol = llt.matrixL();
      factored = true;
      break;
    }
  }
  if (!factored) {
    throw ConditioningError("pseudo-input Gram matrix is singular after jitter");
  }
  const auto n = train.rows();
  if (n == 0) {
    f.V.resize(0, prior.pseudo_inputs.rows());
    return f;
  }
  const Eigen::MatrixXd kmn =
      kernel_matrix(prior.pseudo_inputs, train, prior.hyper, false);
  f.V = f.kmm_chol.triangularView<Eigen::Lower>().solve(kmn).transpose();
  f.diag_k = Eigen::VectorXd::Constant(n, prior.hyper.beta + prior.hyper.gamma);
  f.D = (f.diag_k - f.V.rowwise().squaredNorm()).cwiseMax(0.0);
  return f;
}

/// Gaussian approximation q(f) proportional to N(f | m 1, K') times diagonal
/// Gaussian sites exp(-precision_i f_i^2 / 2 + shift_i f_i). All solves go
/// through the rank-m structure, so no D^{-1} or site variance is needed and
/// flat or negative sites are handled.
class LatentPosterior {
public:
  LatentPosterior() = default;

  LatentPosterior(std::shared_ptr<const FitcFactor> fitc, double mean_const,
                  const Eigen::VectorXd &site_precision,
                  const Eigen::VectorXd &site_shift)
      : fitc_(std::move(fitc)), mean_const_(mean_const) {
    const auto &F = *fitc_;
    const auto n = F.size();
    const auto m = F.rank();
    if (site_precision.size() != n || site_shift.size() != n) {
      throw ShapeError("site vectors do not match the number of observations");
    }
    const Eigen::ArrayXd T = site_precision.array();
    const Eigen::ArrayXd E = 1.0 + T * F.D.array();
    if ((E <= 0.0).any()) {
      throw NumericError("posterior precision is not positive definite");
    }
    const Eigen::ArrayXd S = T / E;
    Eigen::MatrixXd W = Eigen::MatrixXd::Identity(m, m);
    W.noalias() += F.V.transpose() * (S.matrix().asDiagonal() * F.V);
    Eigen::LLT<Eigen::MatrixXd> wllt(W);
    if (wllt.info() != Eigen::Success) {
      throw NumericError("posterior precision is not positive definite");
    }
    w_chol_ = wllt.matrixL();
    const Eigen::MatrixXd R = (1.0 / E).matrix().asDiagonal() * F.V; // n x m
    const Eigen::VectorXd b =
        (site_shift.array() - T * mean_const).matrix();

    // Sigma x = (D/E) x + R W^{-1} R^T x
    const Eigen::VectorXd rb = R.transpose() * b;
    const Eigen::VectorXd wrb = wllt.solve(rb);
    const Eigen::VectorXd sigma_b =
        (F.D.array() / E * b.array()).matrix() + R * wrb;
    mean_ = Eigen::VectorXd::Constant(n, mean_const) + sigma_b;

    const Eigen::MatrixXd X =
        w_chol_.triangularView<Eigen::Lower>().solve(R.transpose()); // m x n
    variance_ = (F.D.array() / E).matrix() + X.colwise().squaredNorm().transpose();

    log_det_term_ = E.log().sum() + 2.0 * w_chol_.diagonal().array().log().sum();
    const double sum_shift = site_shift.sum();
    const double sum_prec = site_precision.sum();
    log_ratio_ = 0.5 * (2.0 * mean_const * sum_shift -
                        mean_const * mean_const * sum_prec + b.dot(sigma_b)) -
                 0.5 * log_det_term_;

    // K'^{-1} (mu - m) = b - T (mu - m)
    const Eigen::VectorXd alpha = b - (T * sigma_b.array()).matrix();
    proj_alpha_ = F.V.transpose() * alpha;
  }

  const Eigen::VectorXd &mean() const { return mean_; }
  const Eigen::VectorXd &variance() const { return variance_; }
  double mean_const() const { return mean_const_; }
  const FitcFactor &fitc() const { return *fitc_; }
  const std::shared_ptr<const FitcFactor> &fitc_ptr() const { return fitc_; }

  /// log of integral N(f | m, K') prod_i exp(-T_i f_i^2/2 + shift_i f_i) df.
  double log_normalizer_ratio() const { return log_ratio_; }

  /// Predictive distribution of the latent at a new input, integrating the
  /// FITC conditional against q. A query equal to a training input is the
  /// same latent variable and returns its q marginal.
  LatentGaussian predict(const Eigen::RowVectorXd &query) const {
    if (query.size() == fitc_->train.cols()) {
      for (Eigen::Index i = 0; i < fitc_->train.rows(); ++i) {
        if (fitc_->train.row(i) == query) {
          return {mean_[i], std::max(variance_[i], 0.0)};
        }
      }
    }
    const Eigen::VectorXd v = fitc_->project(query);
    const Eigen::VectorXd wv =
        w_chol_.triangularView<Eigen::Lower>().solve(v);
    LatentGaussian out;
    out.mean = mean_const_ + v.dot(proj_alpha_);
    out.variance = std::max(fitc_->prior_variance() - v.squaredNorm() +
                                wv.squaredNorm(),
                            0.0);
    return out;
  }

private:
  std::shared_ptr<const FitcFactor> fitc_;
  double mean_const_ = 0.0;
  Eigen::MatrixXd w_chol_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd variance_;
  Eigen::VectorXd proj_alpha_;
  double log_det_term_ = 0.0;
  double log_ratio_ = 0.0;
};

/// Latent predictive distribution at `query` given a posterior built on the
/// training inputs of `prior`.
inline LatentGaussian latent_predict(const LatentPosterior &posterior,
                                     const Eigen::RowVectorXd &query) {
  return posterior.predict(query);
}

} // namespace gpcc

#endif // GPCC_GP_PRIOR_HPP_
