#include "lmx/ols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lmx/dist.hpp"
#include "lmx/errors.hpp"

namespace lmx {

namespace {

// An intercept is "present" when 1_n lies in the column span: H 1 = 1.
bool span_contains_ones(const QRFactors& qr) {
    const VectorXd ones = VectorXd::Ones(qr.Q.rows());
    const VectorXd proj = qr.Q * (qr.Q.transpose() * ones);
    return (proj - ones).lpNorm<Eigen::Infinity>() < 1e-8;
}

}  // namespace

OlsFit fit_ols(const MatrixXd& X, const VectorXd& Y, std::vector<std::string> column_names) {
    const long n = X.rows(), p = X.cols();
    if (n <= p) throw InsufficientDataError("fit_ols: n <= p");
    const QRFactors qr = gram_schmidt_qr(X);

    OlsFit fit;
    fit.X = X;
    fit.beta = back_solve(qr.R, qr.Q.transpose() * Y);
    fit.fitted = X * fit.beta;
    fit.residuals = Y - fit.fitted;
    fit.df_residual = n - p;
    fit.sigma2_hat = fit.residuals.squaredNorm() / fit.df_residual;
    fit.xtx_inv = xtx_inverse_from_r(qr.R);
    fit.leverage = hat_diagonals(qr);
    fit.has_intercept = span_contains_ones(qr);
    if (column_names.empty()) {
        for (long j = 0; j < p; ++j) column_names.push_back("x" + std::to_string(j));
    }
    fit.column_names = std::move(column_names);

    if (fit.has_intercept) {
        const double ybar = Y.mean();
        const double tss = (Y.array() - ybar).square().sum();
        const double ess = (fit.fitted.array() - ybar).square().sum();
        fit.r2 = tss > 0.0 ? ess / tss : 0.0;
        fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (n - 1.0) / (n - p);
    } else {
        fit.r2 = std::numeric_limits<double>::quiet_NaN();
        fit.adj_r2 = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

OlsFit fit_ols(const ModelMatrix& mm) {
    OlsFit fit = fit_ols(mm.X, mm.Y, mm.column_names);
    return fit;
}

std::pair<TestResult, std::pair<double, double>> t_inference(const OlsFit& fit, const VectorXd& c,
                                                             double level) {
    if (fit.sigma2_hat <= 0.0) throw DegenerateError("t_inference: perfect fit, sigma2 = 0");
    const double est = c.dot(fit.beta);
    const double se = std::sqrt(fit.sigma2_hat * c.dot(fit.xtx_inv * c));
    TestResult t;
    t.kind = TestResult::Kind::T;
    t.statistic = est / se;
    t.df1 = 1;
    t.df2 = static_cast<double>(fit.df_residual);
    t.p_value = dist::t_two_sided_p(t.statistic, static_cast<double>(fit.df_residual));
    const double alpha = 1.0 - level;
    const double crit = dist::t_quantile(1.0 - alpha / 2.0, static_cast<double>(fit.df_residual));
    return {t, {est - crit * se, est + crit * se}};
}

TestResult wald_f_test(const OlsFit& fit, const MatrixXd& C, const VectorXd& r) {
    const long l = C.rows();
    if (l == 0) throw SpecError("wald_f_test: empty constraint matrix");
    // Row independence via QR of C^T.
    try {
        gram_schmidt_qr(C.transpose());
    } catch (const RankDeficientError&) {
        throw SpecError("wald_f_test: constraint rows are linearly dependent");
    }
    if (fit.sigma2_hat <= 0.0) throw DegenerateError("wald_f_test: perfect fit, sigma2 = 0");
    const VectorXd gap = C * fit.beta - r;
    const MatrixXd mid = C * fit.xtx_inv * C.transpose();
    const VectorXd solved = mid.ldlt().solve(gap);
    TestResult t;
    t.kind = TestResult::Kind::F;
    t.statistic = gap.dot(solved) / (l * fit.sigma2_hat);
    t.df1 = static_cast<double>(l);
    t.df2 = static_cast<double>(fit.df_residual);
    t.p_value = dist::f_upper_p(t.statistic, t.df1, *t.df2);
    return t;
}

TestResult anova_f(const OlsFit& fit_short, const OlsFit& fit_long) {
    if (fit_short.n() != fit_long.n()) throw SpecError("anova_f: different sample sizes");
    const VectorXd y_short = fit_short.y(), y_long = fit_long.y();
    if ((y_short - y_long).lpNorm<Eigen::Infinity>() >
        1e-10 * (1.0 + y_long.lpNorm<Eigen::Infinity>()))
        throw SpecError("anova_f: models fit different responses");
    // Nestedness by column names, not a numerical subspace test.
    const std::set<std::string> long_names(fit_long.column_names.begin(),
                                           fit_long.column_names.end());
    for (const auto& name : fit_short.column_names)
        if (!long_names.count(name)) throw SpecError("anova_f: models are not nested: " + name);
    const long l = fit_long.p() - fit_short.p();
    if (l <= 0) throw SpecError("anova_f: no extra columns in the long model");

    TestResult t;
    t.kind = TestResult::Kind::F;
    t.df1 = static_cast<double>(l);
    t.df2 = static_cast<double>(fit_long.df_residual);
    t.statistic = (fit_short.rss() - fit_long.rss()) / l /
                  (fit_long.rss() / fit_long.df_residual);
    t.p_value = dist::f_upper_p(t.statistic, t.df1, *t.df2);
    return t;
}

std::pair<double, double> r_squared(const OlsFit& fit) {
    if (!fit.has_intercept) throw SpecError("r_squared: design has no intercept");
    return {fit.r2, fit.adj_r2};
}

PredictionResult predict(const OlsFit& fit, const VectorXd& x_new, PredictionResult::Kind kind,
                         double level) {
    if (!(level > 0.0 && level < 1.0)) throw SpecError("predict: level outside (0,1)");
    PredictionResult out;
    out.kind = kind;
    out.level = level;
    out.point = x_new.dot(fit.beta);
    const double quad = x_new.dot(fit.xtx_inv * x_new);
    const double se2 = (kind == PredictionResult::Kind::Mean) ? fit.sigma2_hat * quad
                                                              : fit.sigma2_hat * (1.0 + quad);
    const double crit =
        dist::t_quantile(1.0 - (1.0 - level) / 2.0, static_cast<double>(fit.df_residual));
    out.lo = out.point - crit * std::sqrt(se2);
    out.hi = out.point + crit * std::sqrt(se2);
    return out;
}

FwlResult fwl_partial(const ModelMatrix& mm, const std::vector<long>& split) {
    if (split.empty()) throw SpecError("fwl_partial: empty split");
    std::set<long> in_split(split.begin(), split.end());
    std::vector<long> rest;
    for (long j = 0; j < mm.p(); ++j)
        if (!in_split.count(j)) rest.push_back(j);

    MatrixXd X2(mm.n(), static_cast<Eigen::Index>(split.size()));
    for (size_t j = 0; j < split.size(); ++j) X2.col(static_cast<Eigen::Index>(j)) = mm.X.col(split[j]);

    FwlResult out;
    if (rest.empty()) {
        out.x2_tilde = X2;
        out.y_tilde = mm.Y;
    } else {
        MatrixXd X1(mm.n(), static_cast<Eigen::Index>(rest.size()));
        for (size_t j = 0; j < rest.size(); ++j) X1.col(static_cast<Eigen::Index>(j)) = mm.X.col(rest[j]);
        const QRFactors qr1 = gram_schmidt_qr(X1);
        out.x2_tilde = X2 - qr1.Q * (qr1.Q.transpose() * X2);
        out.y_tilde = mm.Y - qr1.Q * (qr1.Q.transpose() * mm.Y);
    }
    const QRFactors qr2 = gram_schmidt_qr(out.x2_tilde);
    out.beta2 = back_solve(qr2.R, qr2.Q.transpose() * out.y_tilde);
    return out;
}

CochranResult cochran_decompose(const VectorXd& Y, const MatrixXd& X1, const MatrixXd& X2) {
    const long p1 = X1.cols(), p2 = X2.cols();
    MatrixXd X(Y.size(), p1 + p2);
    X << X1, X2;
    const QRFactors qr_full = gram_schmidt_qr(X);  // throws on joint rank deficiency
    const VectorXd beta_full = back_solve(qr_full.R, qr_full.Q.transpose() * Y);

    const QRFactors qr2 = gram_schmidt_qr(X2);
    CochranResult out;
    out.beta_long2 = beta_full.tail(p2);
    out.beta_short2 = back_solve(qr2.R, qr2.Q.transpose() * Y);
    out.delta_hat.resize(p2, p1);
    for (long j = 0; j < p1; ++j)
        out.delta_hat.col(j) = back_solve(qr2.R, qr2.Q.transpose() * X1.col(j));
    const VectorXd gap =
        out.beta_short2 - (out.beta_long2 + out.delta_hat * beta_full.head(p1));
    out.identity_gap = gap.lpNorm<Eigen::Infinity>();
    return out;
}

RestrictedFit restricted_fit(const ModelMatrix& mm, const MatrixXd& C, const VectorXd& r) {
    const long l = C.rows();
    if (l == 0) throw SpecError("restricted_fit: empty constraint matrix");
    try {
        gram_schmidt_qr(C.transpose());
    } catch (const RankDeficientError&) {
        throw SpecError("restricted_fit: constraint rows are linearly dependent");
    }
    const OlsFit fit = fit_ols(mm);
    const MatrixXd mid = C * fit.xtx_inv * C.transpose();
    const VectorXd adj = mid.ldlt().solve(C * fit.beta - r);

    RestrictedFit out;
    out.beta_r = fit.beta - fit.xtx_inv * C.transpose() * adj;
    out.fitted = mm.X * out.beta_r;
    out.residuals = mm.Y - out.fitted;
    out.df_residual = mm.n() - mm.p() + l;
    out.sigma2_r = out.residuals.squaredNorm() / out.df_residual;
    out.sigma2_unrestricted = fit.sigma2_hat;
    return out;
}

}  // namespace lmx
