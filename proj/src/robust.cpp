#include "lmx/robust.hpp"

#include <cmath>

#include "lmx/errors.hpp"

namespace lmx {

CovEstimate CovEstimate::from_matrix(MatrixXd m, Kind kind) {
    CovEstimate out;
    out.matrix = 0.5 * (m + m.transpose());  // exact symmetry
    out.kind = kind;
    out.se = out.matrix.diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

std::string cov_kind_name(CovEstimate::Kind kind) {
    switch (kind) {
        case CovEstimate::Kind::Classic: return "classic";
        case CovEstimate::Kind::HC0: return "hc0";
        case CovEstimate::Kind::HC1: return "hc1";
        case CovEstimate::Kind::HC2: return "hc2";
        case CovEstimate::Kind::HC3: return "hc3";
        case CovEstimate::Kind::HC4: return "hc4";
        case CovEstimate::Kind::WlsSandwich: return "wls_sandwich";
        case CovEstimate::Kind::Cluster: return "cluster";
        case CovEstimate::Kind::Sandwich: return "sandwich";
        case CovEstimate::Kind::Jackknife: return "jackknife";
        case CovEstimate::Kind::Powell: return "powell";
        case CovEstimate::Kind::Bootstrap: return "bootstrap";
    }
    return "unknown";
}

CovEstimate classic_covariance(const OlsFit& fit) {
    return CovEstimate::from_matrix(fit.sigma2_hat * fit.xtx_inv, CovEstimate::Kind::Classic);
}

CovEstimate hc_covariance(const OlsFit& fit, CovEstimate::Kind kind) {
    const long n = fit.n(), p = fit.p();
    const bool needs_leverage = kind == CovEstimate::Kind::HC2 ||
                                kind == CovEstimate::Kind::HC3 ||
                                kind == CovEstimate::Kind::HC4;
    if (needs_leverage) {
        for (long i = 0; i < n; ++i)
            if (1.0 - fit.leverage(i) <= 1e-12) throw LeverageOneError(i);
    }
    VectorXd e = fit.residuals;
    switch (kind) {
        case CovEstimate::Kind::HC0:
            break;
        case CovEstimate::Kind::HC1:
            e *= std::sqrt(static_cast<double>(n) / (n - p));
            break;
        case CovEstimate::Kind::HC2:
            e = e.array() / (1.0 - fit.leverage.array()).sqrt();
            break;
        case CovEstimate::Kind::HC3:
            e = e.array() / (1.0 - fit.leverage.array());
            break;
        case CovEstimate::Kind::HC4: {
            for (long i = 0; i < n; ++i) {
                const double expo = std::min(2.0, n * fit.leverage(i) / (2.0 * p));
                e(i) /= std::pow(1.0 - fit.leverage(i), expo);
            }
            break;
        }
        default:
            throw SpecError("hc_covariance: kind must be hc0..hc4");
    }
    // Meat = X' diag(e_k^2) X.
    const MatrixXd meat = fit.X.transpose() * e.array().square().matrix().asDiagonal() * fit.X;
    return CovEstimate::from_matrix(fit.xtx_inv * meat * fit.xtx_inv, kind);
}

WlsFit wls_fit(const ModelMatrix& mm) {
    if (!mm.weights) throw SpecError("wls_fit: no weights in the model matrix");
    const VectorXd& w = *mm.weights;
    if ((w.array() <= 0.0).any()) throw SpecError("wls_fit: nonpositive weight");
    const VectorXd sw = w.cwiseSqrt();
    const MatrixXd Xs = sw.asDiagonal() * mm.X;
    const VectorXd Ys = sw.cwiseProduct(mm.Y);
    const QRFactors qr = gram_schmidt_qr(Xs);

    WlsFit fit;
    fit.X = mm.X;
    fit.column_names = mm.column_names;
    fit.weights = w;
    fit.beta_w = back_solve(qr.R, qr.Q.transpose() * Ys);
    fit.residuals_w = mm.Y - mm.X * fit.beta_w;
    fit.hat_w_diag = hat_diagonals(qr);
    fit.xtwx_inv = xtx_inverse_from_r(qr.R);
    const long n = mm.n(), p = mm.p();
    if (n <= p) throw InsufficientDataError("wls_fit: n <= p");
    fit.sigma2_w = w.cwiseProduct(fit.residuals_w.cwiseAbs2()).sum() / (n - p);
    return fit;
}

CovEstimate wls_sandwich(const WlsFit& fit) {
    const VectorXd scale = fit.weights.array().square() * fit.residuals_w.array().square();
    const MatrixXd meat = fit.X.transpose() * scale.asDiagonal() * fit.X;
    return CovEstimate::from_matrix(fit.xtwx_inv * meat * fit.xtwx_inv,
                                    CovEstimate::Kind::WlsSandwich);
}

FglsFit fgls_fit(const ModelMatrix& mm) {
    const OlsFit step1 = fit_ols(mm);
    const double floor = 1e-12 * step1.sigma2_hat;
    VectorXd log_e2(mm.n());
    for (long i = 0; i < mm.n(); ++i)
        log_e2(i) = std::log(std::max(step1.residuals(i) * step1.residuals(i), floor));
    const OlsFit step2 = fit_ols(mm.X, log_e2, mm.column_names);

    ModelMatrix weighted = mm;
    weighted.weights = (-step2.fitted.array()).exp().matrix();
    FglsFit out;
    out.wls = wls_fit(weighted);
    out.variance_model_coef = step2.beta;
    return out;
}

}  // namespace lmx
