#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmx/dist.hpp"
#include "lmx/errors.hpp"
#include "lmx/glm.hpp"
#include "lmx/rng.hpp"

using namespace lmx;

namespace {

MatrixXd intercept_design(const VectorXd& x) {
    MatrixXd X(x.size(), 2);
    X.col(0).setOnes();
    X.col(1) = x;
    return X;
}

}  // namespace

TEST_CASE("link_eval closed forms") {
    auto [g, gp] = link_eval(Link::Logit, 0.0);
    CHECK(g == doctest::Approx(0.5));
    CHECK(gp == doctest::Approx(0.25));
    auto [gc, gpc] = link_eval(Link::Cloglog, 0.0);
    CHECK(gc == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(gpc == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    auto [gq, gpq] = link_eval(Link::Cauchit, 0.0);
    CHECK(gq == doctest::Approx(0.5));
    auto [gn, gpn] = link_eval(Link::Probit, 0.0);
    CHECK(gn == doctest::Approx(0.5));

    // Derivatives match central finite differences.
    const double h = 1e-6;
    for (Link link : {Link::Logit, Link::Probit, Link::Cauchit, Link::Cloglog}) {
        for (double z : {-1.5, -0.2, 0.0, 0.9, 2.0}) {
            const double fd =
                (link_eval(link, z + h).first - link_eval(link, z - h).first) / (2 * h);
            CHECK(link_eval(link, z).second == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("logistic intercept-only is logit of the mean") {
    VectorXd y(8);
    y << 1, 0, 0, 0, 1, 0, 0, 0;  // ybar = 0.25
    const GlmFit fit = glm_fit(GlmFamily::binary(Link::Logit), MatrixXd::Ones(8, 1), y);
    CHECK(fit.beta(0) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-8));
    CHECK(fit.converged);
    // Model covariance: Var = 1/(n ybar (1-ybar)).
    const CovEstimate v = glm_model_cov(fit);
    CHECK(v.matrix(0, 0) == doctest::Approx(1.0 / (8 * 0.25 * 0.75)).epsilon(1e-6));
}

TEST_CASE("poisson intercept-only is log of the mean") {
    VectorXd y(5);
    y << 0, 1, 3, 2, 4;
    const GlmFit fit = glm_fit(GlmFamily::poisson(), MatrixXd::Ones(5, 1), y);
    CHECK(fit.beta(0) == doctest::Approx(std::log(2.0)).epsilon(1e-8));
}

TEST_CASE("poisson model covariance: intercept-only Var = 1/(n ybar)") {
    VectorXd y(8);
    y << 1, 0, 2, 3, 1, 2, 0, 1;
    const GlmFit fit = glm_fit(GlmFamily::poisson(), MatrixXd::Ones(8, 1), y);
    const CovEstimate v = glm_model_cov(fit);
    CHECK(v.matrix(0, 0) == doctest::Approx(1.0 / (8.0 * y.mean())).epsilon(1e-6));
}

TEST_CASE("canonical score identity and mean matching") {
    Rng rng(60);
    const long n = 200;
    VectorXd x(n), yb(n), yp(n);
    for (long i = 0; i < n; ++i) {
        x(i) = rng.normal();
        const double pr = 1.0 / (1.0 + std::exp(-(0.3 + 0.8 * x(i))));
        yb(i) = rng.uniform() < pr ? 1.0 : 0.0;
        yp(i) = static_cast<double>(rng.poisson(std::exp(0.2 + 0.5 * x(i))));
    }
    const MatrixXd X = intercept_design(x);
    for (const GlmFit& fit :
         {glm_fit(GlmFamily::binary(Link::Logit), X, yb), glm_fit(GlmFamily::poisson(), X, yp)}) {
        const VectorXd score = X.transpose() * (fit.Y - fit.fitted_mean);
        CHECK(score.lpNorm<Eigen::Infinity>() < 1e-6);
        CHECK(fit.Y.sum() == doctest::Approx(fit.fitted_mean.sum()).epsilon(1e-6));
    }
}

TEST_CASE("non-canonical links fit and respect the quasi-score") {
    Rng rng(61);
    const long n = 400;
    VectorXd x(n), y(n);
    for (long i = 0; i < n; ++i) {
        x(i) = rng.normal();
        const double pr = dist::norm_cdf(0.4 + 0.6 * x(i));
        y(i) = rng.uniform() < pr ? 1.0 : 0.0;
    }
    const MatrixXd X = intercept_design(x);
    for (Link link : {Link::Probit, Link::Cauchit, Link::Cloglog}) {
        const GlmFit fit = glm_fit(GlmFamily::binary(link), X, y);
        CHECK(fit.converged);
        // Quasi-score at the solution.
        VectorXd score = VectorXd::Zero(2);
        for (long i = 0; i < n; ++i) {
            const auto [g, gp] = link_eval(link, X.row(i).dot(fit.beta));
            score += (y(i) - g) * gp / (g * (1.0 - g)) * X.row(i).transpose();
        }
        CHECK(score.lpNorm<Eigen::Infinity>() < 1e-6);
    }
}

TEST_CASE("logistic fitted probabilities invariant under reparameterization") {
    Rng rng(62);
    const long n = 150;
    MatrixXd X(n, 3);
    X.col(0).setOnes();
    VectorXd y(n);
    for (long i = 0; i < n; ++i) {
        X(i, 1) = rng.normal();
        X(i, 2) = rng.normal();
        const double pr = 1.0 / (1.0 + std::exp(-(X(i, 1) - X(i, 2))));
        y(i) = rng.uniform() < pr ? 1.0 : 0.0;
    }
    MatrixXd G(3, 3);
    G << 1, 0.5, -0.3, 0, 2.0, 0.7, 0, 0, 1.5;
    const GlmFit f1 = glm_fit(GlmFamily::binary(Link::Logit), X, y);
    const GlmFit f2 = glm_fit(GlmFamily::binary(Link::Logit), X * G, y);
    CHECK((f1.fitted_mean - f2.fitted_mean).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("separation raises SeparationError") {
    const long n = 20;
    MatrixXd X(n, 2);
    VectorXd y(n);
    for (long i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = i < 10 ? -1.0 - 0.1 * i : 1.0 + 0.1 * i;
        y(i) = i < 10 ? 0.0 : 1.0;  // perfectly separated
    }
    CHECK_THROWS_AS(glm_fit(GlmFamily::binary(Link::Logit), X, y), SeparationError);
}

TEST_CASE("deviance, LR test, and AIC") {
    Rng rng(63);
    const long n = 300;
    VectorXd x(n), y(n);
    for (long i = 0; i < n; ++i) {
        x(i) = rng.normal();
        const double pr = 1.0 / (1.0 + std::exp(-(0.2 + 1.2 * x(i))));
        y(i) = rng.uniform() < pr ? 1.0 : 0.0;
    }
    const MatrixXd X = intercept_design(x);
    const GlmFit fit = glm_fit(GlmFamily::binary(Link::Logit), X, y);
    const DevianceReport dev = deviance_aic(fit);
    CHECK(dev.aic == doctest::Approx(dev.deviance + 4.0));
    CHECK(dev.lr_test.statistic > 0.0);

    // Intercept-only fit: null deviance equals residual deviance.
    const GlmFit fit0 = glm_fit(GlmFamily::binary(Link::Logit), MatrixXd::Ones(n, 1), y);
    CHECK(fit0.deviance == doctest::Approx(fit0.null_deviance).epsilon(1e-10));

    // Adding a pure-noise column never increases the deviance.
    MatrixXd X3(n, 3);
    X3.leftCols(2) = X;
    for (long i = 0; i < n; ++i) X3(i, 2) = rng.normal();
    const GlmFit fit3 = glm_fit(GlmFamily::binary(Link::Logit), X3, y);
    CHECK(fit3.deviance <= fit.deviance + 1e-8);
}

TEST_CASE("negbin intercept-only mean and theta recovery") {
    VectorXd y(6);
    y << 0, 2, 1, 5, 3, 1;
    const GlmFit fit = negbin_fit(MatrixXd::Ones(6, 1), y);
    CHECK(std::exp(fit.beta(0)) == doctest::Approx(2.0).epsilon(1e-7));

    // Data with no overdispersion drive theta to the cap (Poisson limit).
    {
        const long n = 200;
        VectorXd yu(n);
        for (long i = 0; i < n; ++i) yu(i) = 2.0 + (i % 2);  // var < mean
        const GlmFit ufit = negbin_fit(MatrixXd::Ones(n, 1), yu);
        CHECK(ufit.poisson_fallback);
        CHECK(*ufit.theta == doctest::Approx(1e6));
    }

    // Over Poisson simulations the cap is hit in a nontrivial fraction of
    // replicates (half asymptotically).
    Rng master(64);
    const long n = 400;
    long capped = 0;
    for (long r = 0; r < 10; ++r) {
        Rng rng = master.substream(r);
        VectorXd x(n), yp(n);
        for (long i = 0; i < n; ++i) {
            x(i) = rng.normal();
            yp(i) = static_cast<double>(rng.poisson(std::exp(0.5 + 0.3 * x(i))));
        }
        const GlmFit pfit = negbin_fit(intercept_design(x), yp);
        if (pfit.poisson_fallback) ++capped;
        CHECK(*pfit.theta > 3.0);  // never spuriously overdispersed
    }
    CHECK(capped >= 2);
}

TEST_CASE("negbin with fixed theta solves its weighted score equation") {
    Rng rng(640);
    const long n = 300;
    VectorXd x(n), y(n);
    for (long i = 0; i < n; ++i) {
        x(i) = rng.normal();
        y(i) = static_cast<double>(rng.negative_binomial(std::exp(0.4 * x(i)), 0.7));
    }
    const GlmFit fit = glm_fit(GlmFamily::negbin_fixed(0.7), intercept_design(x), y);
    CHECK(fit.converged);
    VectorXd score = VectorXd::Zero(2);
    for (long i = 0; i < n; ++i) {
        const double mu = std::exp(fit.X.row(i).dot(fit.beta));
        score += (y(i) - mu) / (1.0 + mu / 0.7) * fit.X.row(i).transpose();
    }
    CHECK(score.lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("negbin recovers the dispersion (Monte Carlo)") {
    Rng master(65);
    const long n = 1000, reps = 30;
    long ok = 0;
    for (long r = 0; r < reps; ++r) {
        Rng rng = master.substream(r);
        VectorXd x(n), y(n);
        for (long i = 0; i < n; ++i) {
            x(i) = rng.normal();
            y(i) = static_cast<double>(rng.negative_binomial(std::exp(x(i) / 5.0), 0.2));
        }
        const GlmFit fit = negbin_fit(intercept_design(x), y);
        if (*fit.theta >= 0.1 && *fit.theta <= 0.4) ++ok;
    }
    CHECK(static_cast<double>(ok) / reps >= 0.9);
}

TEST_CASE("identity-link sandwich equals HC0") {
    Rng rng(66);
    const long n = 50;
    VectorXd x(n), y(n);
    for (long i = 0; i < n; ++i) {
        x(i) = rng.normal();
        y(i) = 1.0 + x(i) + rng.normal();
    }
    const MatrixXd X = intercept_design(x);
    const GlmFit fit = glm_fit(GlmFamily::linear(), X, y);
    const CovEstimate sand = glm_sandwich(fit);
    const CovEstimate hc0 = hc_covariance(fit_ols(X, y), CovEstimate::Kind::HC0);
    CHECK((sand.matrix - hc0.matrix).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("sandwich vs model covariance under correct specification") {
    Rng rng(67);
    const long n = 2000;
    VectorXd x(n), y(n);
    for (long i = 0; i < n; ++i) {
        x(i) = rng.normal();
        const double pr = 1.0 / (1.0 + std::exp(-(0.5 * x(i))));
        y(i) = rng.uniform() < pr ? 1.0 : 0.0;
    }
    const GlmFit fit = glm_fit(GlmFamily::binary(Link::Logit), intercept_design(x), y);
    const double ratio = glm_sandwich(fit).se(1) / glm_model_cov(fit).se(1);
    CHECK(ratio > 0.8);
    CHECK(ratio < 1.25);
}

TEST_CASE("Poisson fit to NB data: sandwich exceeds model SE") {
    Rng master(68);
    const long n = 600, reps = 40;
    long bigger = 0;
    for (long r = 0; r < reps; ++r) {
        Rng rng = master.substream(r);
        VectorXd x(n), y(n);
        for (long i = 0; i < n; ++i) {
            x(i) = rng.normal();
            y(i) = static_cast<double>(rng.negative_binomial(std::exp(0.5 + 0.4 * x(i)), 0.5));
        }
        const GlmFit fit = glm_fit(GlmFamily::poisson(), intercept_design(x), y);
        if (glm_sandwich(fit).se(1) > glm_model_cov(fit).se(1)) ++bigger;
    }
    CHECK(static_cast<double>(bigger) / reps >= 0.95);
}

TEST_CASE("glm_predict") {
    Rng rng(69);
    const long n = 300;
    VectorXd x(n), y(n);
    for (long i = 0; i < n; ++i) {
        x(i) = rng.normal();
        const double pr = 1.0 / (1.0 + std::exp(-(0.3 + x(i))));
        y(i) = rng.uniform() < pr ? 1.0 : 0.0;
    }
    const GlmFit fit = glm_fit(GlmFamily::binary(Link::Logit), intercept_design(x), y);
    VectorXd x_new(2);
    x_new << 1.0, 0.7;
    const auto [eta, se_lin] = glm_predict(fit, x_new, false);
    const CovEstimate v = glm_model_cov(fit);
    CHECK(se_lin == doctest::Approx(std::sqrt(x_new.dot(v.matrix * x_new))).epsilon(1e-12));
    const auto [prob, se_resp] = glm_predict(fit, x_new, true);
    CHECK(prob > 0.0);
    CHECK(prob < 1.0);
    const auto [g, gp] = link_eval(Link::Logit, eta);
    CHECK(se_resp == doctest::Approx(gp * se_lin).epsilon(1e-12));
}
