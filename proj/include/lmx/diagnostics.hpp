#ifndef LMX_DIAGNOSTICS_HPP
#define LMX_DIAGNOSTICS_HPP

#include "lmx/robust.hpp"

namespace lmx {

struct LooResult {
    MatrixXd beta_loo;       // row i = coefficient without observation i
    VectorXd pred_residuals;  // e_i / (1 - h_i)
    double press = 0.0;
    double gcv = 0.0;  // RSS * (1 - p/n)^{-2}
};

struct InfluenceReport {
    VectorXd standardized;
    VectorXd studentized;
    VectorXd cook;
    VectorXd sigma2_loo;
};

// Streaming OLS state; single-owner mutable.
struct OnlineOlsState {
    MatrixXd V;  // (X'X)^{-1} so far
    VectorXd beta;
    long n_seen = 0;
};

LooResult loo_all(const OlsFit& fit);

InfluenceReport influence(const OlsFit& fit);

CovEstimate jackknife_cov(const OlsFit& fit);

OnlineOlsState online_init(const MatrixXd& X0, const VectorXd& Y0);

// Sherman-Morrison rank-one update; beta moves by gamma * predicted residual.
OnlineOlsState gauss_update(const OnlineOlsState& state, const VectorXd& x_new, double y_new);

struct ConformalGrid {
    double lo = 0.0;
    double hi = 0.0;
    long steps = 200;
};

// Default grid [min(Y) - 3 sd(Y), max(Y) + 3 sd(Y)] at 200 steps.
ConformalGrid default_conformal_grid(const VectorXd& Y, long steps = 200);

// Split-free full conformal interval: accept y* when the rank of the
// augmented-fit residual |e_{n+1}(y*)| is <= ceil((1-alpha)(n+1)).
// Augmented fits use the rank-one update, so the sweep is O(n) per grid
// point after an O(n p^2) setup.
std::pair<double, double> conformal_interval(const ModelMatrix& mm, const VectorXd& x_new,
                                             double alpha, const ConformalGrid& grid);

}  // namespace lmx

#endif
