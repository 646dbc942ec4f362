#include "lmx/glm.hpp"

#include <cmath>
#include <limits>

#include "lmx/dist.hpp"
#include "lmx/errors.hpp"

namespace lmx {

GlmFamily GlmFamily::linear() { return {Kind::Linear, Link::Logit, std::nullopt}; }
GlmFamily GlmFamily::binary(Link link) { return {Kind::Binary, link, std::nullopt}; }
GlmFamily GlmFamily::poisson() { return {Kind::Poisson, Link::Logit, std::nullopt}; }
GlmFamily GlmFamily::negbin() { return {Kind::NegBin, Link::Logit, std::nullopt}; }
GlmFamily GlmFamily::negbin_fixed(double theta) { return {Kind::NegBin, Link::Logit, theta}; }

GlmFamily parse_family(const std::string& name) {
    if (name == "logit") return GlmFamily::binary(Link::Logit);
    if (name == "probit") return GlmFamily::binary(Link::Probit);
    if (name == "cauchit") return GlmFamily::binary(Link::Cauchit);
    if (name == "cloglog") return GlmFamily::binary(Link::Cloglog);
    if (name == "poisson") return GlmFamily::poisson();
    if (name == "negbin") return GlmFamily::negbin();
    if (name == "linear") return GlmFamily::linear();
    throw SpecError("unknown family: " + name);
}

std::pair<double, double> link_eval(Link link, double z) {
    switch (link) {
        case Link::Logit: {
            const double g = 1.0 / (1.0 + std::exp(-z));
            return {g, g * (1.0 - g)};
        }
        case Link::Probit:
            return {dist::norm_cdf(z), dist::norm_pdf(z)};
        case Link::Cauchit:
            return {std::atan(z) / M_PI + 0.5, 1.0 / (M_PI * (1.0 + z * z))};
        case Link::Cloglog: {
            const double ez = std::exp(std::min(z, 30.0));
            return {-std::expm1(-ez), std::exp(std::min(z, 30.0) - ez)};
        }
    }
    throw SpecError("link_eval: bad link");
}

namespace {

constexpr double kProbEps = 1e-12;
constexpr double kThetaCap = 1e6;

double clamp_prob(double p) { return std::min(1.0 - kProbEps, std::max(kProbEps, p)); }

double binary_loglik(const VectorXd& y, const VectorXd& mu) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double m = clamp_prob(mu(i));
        ll += y(i) * std::log(m) + (1.0 - y(i)) * std::log1p(-m);
    }
    return ll;
}

double poisson_loglik(const VectorXd& y, const VectorXd& mu) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double m = std::max(mu(i), 1e-300);
        ll += y(i) * std::log(m) - m - std::lgamma(y(i) + 1.0);
    }
    return ll;
}

double negbin_loglik(const VectorXd& y, const VectorXd& mu, double theta) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double m = std::max(mu(i), 1e-300);
        ll += std::lgamma(y(i) + theta) - std::lgamma(theta) - std::lgamma(y(i) + 1.0) +
              theta * std::log(theta / (m + theta)) + y(i) * std::log(m / (m + theta));
    }
    return ll;
}

// Evaluate mean, IRLS/Fisher weight, and per-observation quasi-score
// factor s (score = sum s_i x_i) at the linear predictor.
struct FamilyEval {
    VectorXd mu;
    VectorXd weight;
    VectorXd score_factor;
};

FamilyEval eval_family(const GlmFamily& family, const VectorXd& eta, const VectorXd& y,
                       double theta) {
    const Eigen::Index n = eta.size();
    FamilyEval out;
    out.mu.resize(n);
    out.weight.resize(n);
    out.score_factor.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        switch (family.kind) {
            case GlmFamily::Kind::Linear:
                out.mu(i) = eta(i);
                out.weight(i) = 1.0;
                out.score_factor(i) = y(i) - eta(i);
                break;
            case GlmFamily::Kind::Binary: {
                const auto [g, gprime] = link_eval(family.link, eta(i));
                const double var = clamp_prob(g) * (1.0 - clamp_prob(g));
                out.mu(i) = g;
                if (family.link == Link::Logit) {
                    out.weight(i) = std::max(var, 1e-10);
                    out.score_factor(i) = y(i) - g;
                } else {
                    out.weight(i) = std::max(gprime * gprime / var, 1e-10);
                    out.score_factor(i) = (y(i) - g) * gprime / var;
                }
                break;
            }
            case GlmFamily::Kind::Poisson: {
                const double lam = std::exp(std::min(eta(i), 300.0));
                out.mu(i) = lam;
                out.weight(i) = std::max(lam, 1e-10);
                out.score_factor(i) = y(i) - lam;
                break;
            }
            case GlmFamily::Kind::NegBin: {
                const double m = std::exp(std::min(eta(i), 300.0));
                const double w = 1.0 / (1.0 + m / theta);
                out.mu(i) = m;
                out.weight(i) = std::max(w * m, 1e-10);
                out.score_factor(i) = w * (y(i) - m);
                break;
            }
        }
    }
    return out;
}

double family_loglik(const GlmFamily& family, const VectorXd& y, const VectorXd& mu,
                     double theta) {
    switch (family.kind) {
        case GlmFamily::Kind::Linear:
            return -0.5 * (y - mu).squaredNorm();  // working Normal, unit variance
        case GlmFamily::Kind::Binary:
            return binary_loglik(y, mu);
        case GlmFamily::Kind::Poisson:
            return poisson_loglik(y, mu);
        case GlmFamily::Kind::NegBin:
            return negbin_loglik(y, mu, theta);
    }
    return 0.0;
}

bool span_has_intercept(const MatrixXd& X) {
    const QRFactors qr = gram_schmidt_qr(X);
    const VectorXd ones = VectorXd::Ones(X.rows());
    return ((qr.Q * (qr.Q.transpose() * ones)) - ones).lpNorm<Eigen::Infinity>() < 1e-8;
}

double null_mean_loglik(const GlmFamily& family, const VectorXd& y, double theta) {
    // Intercept-only MLE has mu = ybar for every family here.
    const VectorXd mu0 = VectorXd::Constant(y.size(), y.mean());
    return family_loglik(family, y, mu0, theta);
}

// Fisher scoring / Newton with step halving for a fixed family (theta
// fixed for NB). Returns the fit without deviance bookkeeping.
struct CoreFit {
    VectorXd beta;
    VectorXd mu;
    VectorXd weights;
    long iterations = 0;
    bool converged = false;
};

CoreFit irls_core(const GlmFamily& family, const MatrixXd& X, const VectorXd& y, double theta,
                  const VectorXd* start) {
    const long p = X.cols();
    CoreFit core;
    core.beta = start ? *start : VectorXd::Zero(p);
    VectorXd eta = X * core.beta;
    FamilyEval ev = eval_family(family, eta, y, theta);
    double ll = family_loglik(family, y, ev.mu, theta);
    constexpr long kMaxIter = 50;
    constexpr double kScoreTol = 1e-8;
    for (long it = 1; it <= kMaxIter; ++it) {
        const VectorXd score = X.transpose() * ev.score_factor;
        const MatrixXd info = X.transpose() * ev.weight.asDiagonal() * X;
        const VectorXd delta = info.ldlt().solve(score);

        double step = 1.0;
        VectorXd beta_new;
        FamilyEval ev_new;
        double ll_new = -std::numeric_limits<double>::infinity();
        for (int halving = 0; halving <= 20; ++halving) {
            beta_new = core.beta + step * delta;
            ev_new = eval_family(family, X * beta_new, y, theta);
            ll_new = family_loglik(family, y, ev_new.mu, theta);
            if (ll_new >= ll - 1e-12 * (1.0 + std::fabs(ll))) break;
            step *= 0.5;
        }
        const double ll_change = std::fabs(ll_new - ll) / (1.0 + std::fabs(ll_new));
        core.beta = beta_new;
        ev = ev_new;
        ll = ll_new;
        core.iterations = it;

        const double score_norm =
            (X.transpose() * ev.score_factor).lpNorm<Eigen::Infinity>();
        const double beta_norm = core.beta.lpNorm<Eigen::Infinity>();
        // Separation: a binary fit that classifies perfectly has fitted
        // probabilities numerically 0 or 1 and an unbounded likelihood.
        if (family.kind == GlmFamily::Kind::Binary &&
            (y - ev.mu).lpNorm<Eigen::Infinity>() < 1e-8)
            throw SeparationError("glm_fit: separation (fitted probabilities 0 or 1)");
        if (beta_norm > 1e3 && (y - ev.mu).lpNorm<Eigen::Infinity>() < 1e-8)
            throw SeparationError("glm_fit: separation detected (diverging coefficients)");
        if (beta_norm > 1e6) throw SeparationError("glm_fit: coefficients diverging");
        if (score_norm < kScoreTol || (ll_change < 1e-13 && score_norm < 1e-6)) {
            core.converged = true;
            break;
        }
    }
    if (!core.converged) throw ConvergenceError("glm_fit: no convergence in 50 iterations");
    core.mu = ev.mu;
    core.weights = ev.weight;
    return core;
}

void finalize_fit(GlmFit& fit, const GlmFamily& family, const MatrixXd& X, const VectorXd& y,
                  double theta, long extra_params) {
    fit.fisher_info = X.transpose() * fit.working_weights.asDiagonal() * X;
    fit.deviance = -2.0 * family_loglik(family, y, fit.fitted_mean, theta);
    if (span_has_intercept(X))
        fit.null_deviance = -2.0 * null_mean_loglik(family, y, theta);
    else
        fit.null_deviance = std::numeric_limits<double>::quiet_NaN();
    fit.aic = fit.deviance + 2.0 * (X.cols() + extra_params);
}

}  // namespace

GlmFit glm_fit(const GlmFamily& family, const MatrixXd& X, const VectorXd& Y,
               std::vector<std::string> column_names) {
    if (family.kind == GlmFamily::Kind::NegBin && !family.theta)
        return negbin_fit(X, Y, std::move(column_names));
    if (X.rows() <= X.cols()) throw InsufficientDataError("glm_fit: n <= p");
    gram_schmidt_qr(X);  // full-rank precondition
    if (family.kind == GlmFamily::Kind::Binary) {
        for (Eigen::Index i = 0; i < Y.size(); ++i)
            if (Y(i) != 0.0 && Y(i) != 1.0) throw SpecError("glm_fit: binary outcome must be 0/1");
    }
    if (family.kind == GlmFamily::Kind::Poisson || family.kind == GlmFamily::Kind::NegBin) {
        for (Eigen::Index i = 0; i < Y.size(); ++i)
            if (Y(i) < 0.0 || Y(i) != std::floor(Y(i)))
                throw SpecError("glm_fit: count outcome must be a nonnegative integer");
    }

    const double theta = family.theta.value_or(0.0);
    const CoreFit core = irls_core(family, X, Y, theta, nullptr);

    GlmFit fit;
    fit.family = family;
    fit.beta = core.beta;
    fit.theta = family.theta;
    fit.fitted_mean = core.mu;
    fit.working_weights = core.weights;
    fit.iterations = core.iterations;
    fit.converged = core.converged;
    fit.X = X;
    fit.Y = Y;
    if (column_names.empty())
        for (long j = 0; j < X.cols(); ++j) column_names.push_back("x" + std::to_string(j));
    fit.column_names = std::move(column_names);
    finalize_fit(fit, family, X, Y, theta, family.theta ? 1 : 0);
    return fit;
}

GlmFit glm_fit(const GlmFamily& family, const ModelMatrix& mm) {
    return glm_fit(family, mm.X, mm.Y, mm.column_names);
}

namespace {

// d loglik / d theta and the expected-information-style second derivative.
std::pair<double, double> theta_derivatives(const VectorXd& y, const VectorXd& mu, double theta) {
    double d1 = 0.0, d2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double m = mu(i);
        d1 += dist::digamma(y(i) + theta) - dist::digamma(theta) + std::log(theta) + 1.0 -
              std::log(m + theta) - (y(i) + theta) / (m + theta);
        d2 += dist::trigamma(y(i) + theta) - dist::trigamma(theta) + 1.0 / theta -
              2.0 / (m + theta) + (y(i) + theta) / ((m + theta) * (m + theta));
    }
    return {d1, d2};
}

double update_theta(const VectorXd& y, const VectorXd& mu, double theta) {
    // Newton on log theta keeps the dispersion positive.
    double u = std::log(theta);
    for (int it = 0; it < 25; ++it) {
        const double th = std::exp(u);
        if (th >= kThetaCap) return kThetaCap;
        const auto [d1, d2] = theta_derivatives(y, mu, th);
        const double grad = th * d1;
        const double hess = th * th * d2 + th * d1;
        if (hess >= 0.0) {
            // Not locally concave; fall back to a damped gradient step.
            u += std::clamp(grad, -1.0, 1.0);
        } else {
            double step = -grad / hess;
            u += std::clamp(step, -2.0, 2.0);
        }
        if (std::fabs(grad) < 1e-10 * y.size()) break;
    }
    return std::min(std::exp(u), kThetaCap);
}

}  // namespace

GlmFit negbin_fit(const MatrixXd& X, const VectorXd& Y, std::vector<std::string> column_names) {
    const double ymean = Y.mean();
    const double yvar = (Y.array() - ymean).square().sum() / std::max<long>(Y.size() - 1, 1);
    if (yvar <= 0.0) throw InsufficientDataError("negbin_fit: outcome has no variability");

    // Poisson start for beta; method-of-moments start for theta.
    GlmFit pois = glm_fit(GlmFamily::poisson(), X, Y, column_names);
    double theta = (yvar > ymean) ? std::max(0.01, ymean * ymean / (yvar - ymean)) : 100.0;
    VectorXd beta = pois.beta;
    const GlmFamily nb = GlmFamily::negbin();

    bool capped = false;
    long outer = 0;
    CoreFit core;
    for (outer = 1; outer <= 100; ++outer) {
        core = irls_core(nb, X, Y, theta, &beta);
        const double theta_new = update_theta(Y, core.mu, theta);
        const double change = std::max((core.beta - beta).lpNorm<Eigen::Infinity>(),
                                       std::fabs(std::log(theta_new) - std::log(theta)));
        beta = core.beta;
        theta = theta_new;
        if (theta >= kThetaCap) {
            capped = true;
            break;
        }
        if (change < 1e-8) break;
        if (outer == 100) throw ConvergenceError("negbin_fit: no convergence in 100 alternations");
    }

    GlmFit fit;
    fit.family = GlmFamily::negbin();
    if (capped) {
        // Poisson limit: keep the Poisson coefficients and flag it.
        fit.beta = pois.beta;
        fit.fitted_mean = pois.fitted_mean;
        fit.working_weights = pois.working_weights;
        fit.iterations = outer;
        fit.converged = true;
        fit.poisson_fallback = true;
        theta = kThetaCap;
    } else {
        fit.beta = beta;
        fit.fitted_mean = core.mu;
        fit.working_weights = core.weights;
        fit.iterations = outer;
        fit.converged = true;
    }
    fit.theta = theta;
    const auto [d1, d2] = theta_derivatives(Y, fit.fitted_mean, theta);
    (void)d1;
    if (d2 < 0.0) fit.theta_se = 1.0 / std::sqrt(-d2);
    fit.X = X;
    fit.Y = Y;
    if (column_names.empty())
        for (long j = 0; j < X.cols(); ++j) column_names.push_back("x" + std::to_string(j));
    fit.column_names = std::move(column_names);
    finalize_fit(fit, nb, X, Y, theta, 1);
    return fit;
}

GlmFit negbin_fit(const ModelMatrix& mm) { return negbin_fit(mm.X, mm.Y, mm.column_names); }

CovEstimate glm_model_cov(const GlmFit& fit) {
    Eigen::LDLT<MatrixXd> ldlt(fit.fisher_info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw SingularError("glm_model_cov: singular information matrix");
    const MatrixXd inv = ldlt.solve(MatrixXd::Identity(fit.p(), fit.p()));
    return CovEstimate::from_matrix(inv, CovEstimate::Kind::Classic);
}

CovEstimate glm_sandwich(const GlmFit& fit) {
    const FamilyEval ev =
        eval_family(fit.family, fit.X * fit.beta, fit.Y, fit.theta.value_or(0.0));
    const MatrixXd meat =
        fit.X.transpose() * ev.score_factor.array().square().matrix().asDiagonal() * fit.X;
    Eigen::LDLT<MatrixXd> ldlt(fit.fisher_info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw SingularError("glm_sandwich: singular information matrix");
    const MatrixXd binv = ldlt.solve(MatrixXd::Identity(fit.p(), fit.p()));
    return CovEstimate::from_matrix(binv * meat * binv, CovEstimate::Kind::Sandwich);
}

DevianceReport deviance_aic(const GlmFit& fit) {
    if (std::isnan(fit.null_deviance))
        throw SpecError("deviance_aic: design has no intercept for the null model");
    DevianceReport out;
    out.deviance = fit.deviance;
    out.null_deviance = fit.null_deviance;
    out.aic = fit.aic;
    out.lr_test.kind = TestResult::Kind::ChiSq;
    out.lr_test.statistic = std::max(0.0, fit.null_deviance - fit.deviance);
    out.lr_test.df1 = static_cast<double>(fit.p() - 1);
    out.lr_test.p_value = out.lr_test.df1 > 0
                              ? dist::chisq_upper_p(out.lr_test.statistic, out.lr_test.df1)
                              : 1.0;
    return out;
}

std::pair<double, double> glm_predict(const GlmFit& fit, const VectorXd& x_new,
                                      bool response_scale) {
    const CovEstimate cov = glm_model_cov(fit);
    const double eta = x_new.dot(fit.beta);
    const double se_lin = std::sqrt(x_new.dot(cov.matrix * x_new));
    if (!response_scale) return {eta, se_lin};
    switch (fit.family.kind) {
        case GlmFamily::Kind::Linear:
            return {eta, se_lin};
        case GlmFamily::Kind::Binary: {
            const auto [g, gprime] = link_eval(fit.family.link, eta);
            return {g, gprime * se_lin};
        }
        case GlmFamily::Kind::Poisson:
        case GlmFamily::Kind::NegBin: {
            const double mu = std::exp(eta);
            return {mu, mu * se_lin};
        }
    }
    throw SpecError("glm_predict: bad family");
}

}  // namespace lmx
