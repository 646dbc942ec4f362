#include "lmx/diagnostics.hpp"

#include <cmath>

#include "lmx/errors.hpp"

namespace lmx {

namespace {

void require_leverage_below_one(const VectorXd& h) {
    for (Eigen::Index i = 0; i < h.size(); ++i)
        if (1.0 - h(i) <= 1e-12) throw LeverageOneError(i);
}

}  // namespace

LooResult loo_all(const OlsFit& fit) {
    require_leverage_below_one(fit.leverage);
    const long n = fit.n(), p = fit.p();
    LooResult out;
    out.pred_residuals = fit.residuals.array() / (1.0 - fit.leverage.array());
    out.beta_loo.resize(n, p);
    // beta_{[-i]} = beta - (X'X)^{-1} x_i e_i / (1 - h_i)
    const MatrixXd G = fit.X * fit.xtx_inv;  // rows = (X'X)^{-1} x_i
    for (long i = 0; i < n; ++i)
        out.beta_loo.row(i) =
            fit.beta.transpose() - G.row(i) * (fit.residuals(i) / (1.0 - fit.leverage(i)));
    out.press = out.pred_residuals.squaredNorm();
    const double ratio = 1.0 - static_cast<double>(p) / n;
    out.gcv = fit.rss() / (ratio * ratio);
    return out;
}

InfluenceReport influence(const OlsFit& fit) {
    const long n = fit.n(), p = fit.p();
    if (n <= p + 1) throw InsufficientDataError("influence: need n > p + 1");
    require_leverage_below_one(fit.leverage);
    InfluenceReport out;
    out.standardized.resize(n);
    out.studentized.resize(n);
    out.cook.resize(n);
    out.sigma2_loo.resize(n);
    for (long i = 0; i < n; ++i) {
        const double omh = 1.0 - fit.leverage(i);
        const double e = fit.residuals(i);
        const double standr = e / std::sqrt(fit.sigma2_hat * omh);
        // (n-p-1) s2_{[-i]} = (n-p) s2 - e^2/(1-h)
        const double s2_loo = ((n - p) * fit.sigma2_hat - e * e / omh) / (n - p - 1);
        out.standardized(i) = standr;
        out.sigma2_loo(i) = s2_loo;
        out.studentized(i) = (e / omh) / std::sqrt(s2_loo / omh);
        out.cook(i) = standr * standr * fit.leverage(i) / (p * omh);
    }
    return out;
}

CovEstimate jackknife_cov(const OlsFit& fit) {
    const LooResult loo = loo_all(fit);
    const long n = fit.n(), p = fit.p();
    // Pseudo-values theta_i = n beta - (n-1) beta_{[-i]}.
    MatrixXd pseudo(n, p);
    for (long i = 0; i < n; ++i)
        pseudo.row(i) = n * fit.beta.transpose() - (n - 1.0) * loo.beta_loo.row(i);
    const Eigen::RowVectorXd mean = pseudo.colwise().mean();
    const MatrixXd centered = pseudo.rowwise() - mean;
    return CovEstimate::from_matrix(centered.transpose() * centered / (n * (n - 1.0)),
                                    CovEstimate::Kind::Jackknife);
}

OnlineOlsState online_init(const MatrixXd& X0, const VectorXd& Y0) {
    if (X0.rows() < X0.cols()) throw InsufficientDataError("online_init: need at least p rows");
    const QRFactors qr = gram_schmidt_qr(X0);
    OnlineOlsState s;
    s.V = xtx_inverse_from_r(qr.R);
    s.beta = back_solve(qr.R, qr.Q.transpose() * Y0);
    s.n_seen = X0.rows();
    return s;
}

OnlineOlsState gauss_update(const OnlineOlsState& state, const VectorXd& x_new, double y_new) {
    OnlineOlsState s;
    const VectorXd Vx = state.V * x_new;
    const double denom = 1.0 + x_new.dot(Vx);
    s.V = state.V - Vx * Vx.transpose() / denom;
    const VectorXd gamma = s.V * x_new;
    const double pred_residual = y_new - x_new.dot(state.beta);
    s.beta = state.beta + gamma * pred_residual;
    s.n_seen = state.n_seen + 1;
    return s;
}

ConformalGrid default_conformal_grid(const VectorXd& Y, long steps) {
    const double mean = Y.mean();
    const double sd = std::sqrt((Y.array() - mean).square().sum() / (Y.size() - 1));
    return {Y.minCoeff() - 3.0 * sd, Y.maxCoeff() + 3.0 * sd, steps};
}

std::pair<double, double> conformal_interval(const ModelMatrix& mm, const VectorXd& x_new,
                                             double alpha, const ConformalGrid& grid) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw SpecError("conformal_interval: alpha outside (0,1)");
    const long n = mm.n();

    // Augment with (x_new, y*). Residuals of the (n+1)-point fit are
    // affine in y*: r(y*) = a + b y*. Two rank-one updated fits pin a, b.
    OnlineOlsState st = online_init(mm.X, mm.Y);
    auto augmented_residuals = [&](double ystar) {
        const OnlineOlsState aug = gauss_update(st, x_new, ystar);
        VectorXd r(n + 1);
        r.head(n) = mm.Y - mm.X * aug.beta;
        r(n) = ystar - x_new.dot(aug.beta);
        return r;
    };
    const VectorXd a = augmented_residuals(0.0);
    const VectorXd b = augmented_residuals(1.0) - a;

    const long rank_cut = static_cast<long>(std::ceil((1.0 - alpha) * (n + 1)));
    double lo = 0.0, hi = 0.0;
    bool any = false;
    const double step = (grid.hi - grid.lo) / (grid.steps - 1);
    for (long g = 0; g < grid.steps; ++g) {
        const double ystar = grid.lo + g * step;
        const VectorXd r = a + ystar * b;
        const double target = std::fabs(r(n));
        long rank = 1;
        for (long i = 0; i < n; ++i)
            if (std::fabs(r(i)) <= target) ++rank;
        if (rank <= rank_cut) {
            if (!any) lo = ystar;
            hi = ystar;
            any = true;
        }
    }
    if (!any) throw ConformalEmptyError("conformal_interval: no grid point accepted");
    return {lo, hi};
}

}  // namespace lmx
