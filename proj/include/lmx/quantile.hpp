#ifndef LMX_QUANTILE_HPP
#define LMX_QUANTILE_HPP

#include <optional>

#include "lmx/robust.hpp"
#include "lmx/rng.hpp"

namespace lmx {

struct QuantFit {
    double tau = 0.5;
    VectorXd beta;
    double objective = 0.0;  // sum of check losses
    std::optional<CovEstimate> cov;
    std::vector<long> basis;  // interpolated observations (vertex solution)
};

double check_loss(double u, double tau);

// Exterior-point simplex on the regression-quantile LP: the iterate is a
// vertex interpolating p observations; each step is a weighted-median
// line search over breakpoint residuals.
QuantFit rq_fit(const ModelMatrix& mm, double tau);
QuantFit rq_fit(const MatrixXd& X, const VectorXd& Y, double tau);

// Powell kernel covariance: n^{-1} B^{-1} M B^{-1} with
//   M = n^{-1} sum (tau - 1{e<=0})^2 x x',
//   B = (2nh)^{-1} sum 1{|e|<=h} x x',  h = 1.06 sd(e) n^{-1/3}.
CovEstimate rq_powell_cov(const QuantFit& fit, const MatrixXd& X, const VectorXd& Y,
                          std::optional<double> bandwidth = std::nullopt);

// Pairs bootstrap with per-replicate streams seed xor b.
CovEstimate rq_bootstrap_cov(const MatrixXd& X, const VectorXd& Y, double tau, long B,
                             std::uint64_t seed);

}  // namespace lmx

#endif
