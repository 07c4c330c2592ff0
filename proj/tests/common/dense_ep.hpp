#ifndef GPCC_TESTS_DENSE_EP_HPP_
#define GPCC_TESTS_DENSE_EP_HPP_

// Reference EP on a dense covariance matrix: parallel damped site
// updates, moment matching by trapezoid on a fine grid. Shares no code with
// the library EP beyond Eigen, so a match means both reached the same fixed
// point.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace gpcc::oracle {

struct DenseEpResult {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  int sweeps = 0;
};

inline DenseEpResult dense_ep(const Eigen::MatrixXd &K, double m,
                              const std::function<double(int, double)> &loglik,
                              double tol = 1e-10, int max_sweeps = 2000,
                              double damping = 0.5) {
  const auto n = K.rows();
  Eigen::VectorXd T = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(n);
  const Eigen::MatrixXd Kinv = K.inverse();
  const Eigen::VectorXd prior_shift = Kinv * Eigen::VectorXd::Constant(n, m);
  auto posterior = [&](Eigen::MatrixXd &S, Eigen::VectorXd &mu) {
    Eigen::MatrixXd P = Kinv;
    P.diagonal() += T;
    if (P.llt().info() != Eigen::Success) {
      throw std::runtime_error("dense_ep: improper posterior");
    }
    S = P.inverse();
    mu = S * (prior_shift + nu);
  };
  Eigen::MatrixXd S;
  Eigen::VectorXd mu;
  DenseEpResult r;
  for (r.sweeps = 0; r.sweeps < max_sweeps; ++r.sweeps) {
    posterior(S, mu);
    const Eigen::VectorXd before = mu;
    bool skipped = false;
    Eigen::VectorXd T_new = T;
    Eigen::VectorXd nu_new = nu;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lc = 1.0 / S(i, i) - T[i];
      const double ec = mu[i] / S(i, i) - nu[i];
      if (!(lc > 0.0)) {
        skipped = true; // retried next sweep
        continue;
      }
      const double cm = ec / lc;
      const double cs = std::sqrt(1.0 / lc);
      constexpr int points = 40001;
      const double lo = cm - 12.0 * cs;
      const double h = 24.0 * cs / (points - 1);
      std::vector<double> lw(points);
      double mx = -INFINITY;
      for (int k = 0; k < points; ++k) {
        const double f = lo + h * k;
        lw[k] = -0.5 * (f - cm) * (f - cm) / (cs * cs) +
                loglik(static_cast<int>(i), f);
        mx = std::max(mx, lw[k]);
      }
      double w0 = 0.0;
      double w1 = 0.0;
      double w2 = 0.0;
      for (int k = 0; k < points; ++k) {
        const double f = lo + h * k;
        const double w = std::exp(lw[k] - mx) * ((k == 0 || k == points - 1) ? 0.5 : 1.0);
        w0 += w;
        w1 += w * f;
        w2 += w * f * f;
      }
      const double M = w1 / w0;
      const double V = w2 / w0 - M * M;
      T_new[i] = (1.0 - damping) * T[i] + damping * (1.0 / V - lc);
      nu_new[i] = (1.0 - damping) * nu[i] + damping * (M / V - ec);
    }
    T = T_new;
    nu = nu_new;
    posterior(S, mu);
    if (!skipped && (mu - before).lpNorm<Eigen::Infinity>() < tol) {
      ++r.sweeps;
      break;
    }
  }
  if (r.sweeps >= max_sweeps) {
    throw std::runtime_error("dense_ep: no convergence");
  }
  r.mean = mu;
  r.var = S.diagonal();
  return r;
}

} // namespace gpcc::oracle

#endif // GPCC_TESTS_DENSE_EP_HPP_
