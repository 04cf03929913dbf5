#pragma once

// Brute-force reference for the filter and smoother: build the joint Gaussian
// of (x_1..x_T, w_1..w_T) from (G, Q, H, R_t, prior) and condition by
// block-matrix algebra. Shares nothing with the recursive implementation
// beyond the model matrices.

#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Marginal {
  VectorXd mean;
  MatrixXd cov;
};

struct JointModel {
  MatrixXd G, Q;
  Eigen::RowVectorXd H;
  VectorXd prior_mean;
  MatrixXd prior_cov;
  std::vector<double> R;  // one per step
};

class JointGaussian {
 public:
  explicit JointGaussian(const JointModel& m) : d_(static_cast<int>(m.G.rows())), T_(static_cast<int>(m.R.size())) {
    const int nx = d_ * T_;
    mean_ = VectorXd::Zero(nx + T_);
    cov_ = MatrixXd::Zero(nx + T_, nx + T_);

    // Unconditional state means and variances.
    std::vector<VectorXd> mu(T_);
    std::vector<MatrixXd> V(T_);
    VectorXd mprev = m.prior_mean;
    MatrixXd vprev = m.prior_cov;
    for (int t = 0; t < T_; ++t) {
      mu[t] = m.G * mprev;
      V[t] = m.G * vprev * m.G.transpose() + m.Q;
      mprev = mu[t];
      vprev = V[t];
    }
    // Cov(x_t, x_s) = G^{t-s} V_s for t >= s.
    for (int s = 0; s < T_; ++s) {
      MatrixXd block = V[s];
      for (int t = s; t < T_; ++t) {
        cov_.block(t * d_, s * d_, d_, d_) = block;
        cov_.block(s * d_, t * d_, d_, d_) = block.transpose();
        block = m.G * block;
      }
    }
    for (int t = 0; t < T_; ++t) {
      mean_.segment(t * d_, d_) = mu[t];
      mean_(nx + t) = m.H.dot(mu[t]);
    }
    // Observation rows/cols.
    for (int t = 0; t < T_; ++t) {
      for (int s = 0; s < T_; ++s) {
        const Eigen::RowVectorXd c = m.H * cov_.block(t * d_, s * d_, d_, d_);  // Cov(w_t, x_s)
        cov_.block(nx + t, s * d_, 1, d_) = c;
        cov_.block(s * d_, nx + t, d_, 1) = c.transpose();
      }
      for (int s = 0; s < T_; ++s) {
        cov_(nx + t, nx + s) = m.H * cov_.block(t * d_, s * d_, d_, d_) * m.H.transpose();
      }
      cov_(nx + t, nx + t) += m.R[t];
    }
  }

  /// Posterior over the stacked states given w_1..w_upto.
  Marginal condition(const std::vector<long>& w, int upto) const {
    const int nx = d_ * T_;
    MatrixXd Sxy = cov_.block(0, nx, nx, upto);
    MatrixXd Syy = cov_.block(nx, nx, upto, upto);
    VectorXd resid(upto);
    for (int t = 0; t < upto; ++t) resid(t) = static_cast<double>(w[t]) - mean_(nx + t);
    const auto solver = Syy.fullPivLu();
    Marginal out;
    out.mean = mean_.head(nx) + Sxy * solver.solve(resid);
    out.cov = cov_.topLeftCorner(nx, nx) - Sxy * solver.solve(Sxy.transpose());
    return out;
  }

  Marginal state(const Marginal& post, int t) const {  // t is 0-based
    return {post.mean.segment(t * d_, d_), post.cov.block(t * d_, t * d_, d_, d_)};
  }

  MatrixXd cross(const Marginal& post, int t, int s) const { return post.cov.block(t * d_, s * d_, d_, d_); }

 private:
  int d_;
  int T_;
  VectorXd mean_;
  MatrixXd cov_;
};

}  // namespace oracle
