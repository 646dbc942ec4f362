#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmx/errors.hpp"
#include "lmx/robust.hpp"
#include "lmx/rng.hpp"

using namespace lmx;

namespace {

MatrixXd random_design(long n, long p, Rng& rng) {
    MatrixXd X(n, p);
    X.col(0).setOnes();
    for (long i = 0; i < n; ++i)
        for (long j = 1; j < p; ++j) X(i, j) = rng.normal();
    return X;
}

}  // namespace

TEST_CASE("zero residuals give a zero matrix for every HC kind") {
    Rng rng(1);
    const MatrixXd X = random_design(10, 2, rng);
    const VectorXd y = X * VectorXd::Constant(2, 1.5);  // exact fit
    const OlsFit fit = fit_ols(X, y);
    for (auto kind : {CovEstimate::Kind::HC0, CovEstimate::Kind::HC1, CovEstimate::Kind::HC2,
                      CovEstimate::Kind::HC3, CovEstimate::Kind::HC4})
        CHECK(hc_covariance(fit, kind).matrix.lpNorm<Eigen::Infinity>() < 1e-20);
}

TEST_CASE("HC1 is HC0 scaled by n/(n-p)") {
    Rng rng(2);
    const long n = 23, p = 3;
    const MatrixXd X = random_design(n, p, rng);
    VectorXd y(n);
    for (long i = 0; i < n; ++i) y(i) = rng.normal();
    const OlsFit fit = fit_ols(X, y);
    const MatrixXd v0 = hc_covariance(fit, CovEstimate::Kind::HC0).matrix;
    const MatrixXd v1 = hc_covariance(fit, CovEstimate::Kind::HC1).matrix;
    CHECK((v1 - v0 * (static_cast<double>(n) / (n - p))).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("HC ordering: hc3 >= hc2 >= hc0 on the diagonal") {
    Rng rng(3);
    const MatrixXd X = random_design(30, 4, rng);
    VectorXd y(30);
    for (long i = 0; i < 30; ++i) y(i) = rng.normal();
    const OlsFit fit = fit_ols(X, y);
    const VectorXd d0 = hc_covariance(fit, CovEstimate::Kind::HC0).matrix.diagonal();
    const VectorXd d2 = hc_covariance(fit, CovEstimate::Kind::HC2).matrix.diagonal();
    const VectorXd d3 = hc_covariance(fit, CovEstimate::Kind::HC3).matrix.diagonal();
    for (long j = 0; j < 4; ++j) {
        CHECK(d3(j) >= d2(j) - 1e-15);
        CHECK(d2(j) >= d0(j) - 1e-15);
    }
}

TEST_CASE("two-sample HC2 t equals the unequal-variance t") {
    Rng rng(4);
    const long m = 11, n2 = 17, n = m + n2;
    MatrixXd X(n, 2);
    X.col(0).setOnes();
    VectorXd y(n);
    for (long i = 0; i < n; ++i) {
        X(i, 1) = i < m ? 1.0 : 0.0;
        y(i) = (i < m) ? rng.normal(1.0, 2.0) : rng.normal(0.0, 0.5);
    }
    const OlsFit fit = fit_ols(X, y);
    const double se_hc2 = hc_covariance(fit, CovEstimate::Kind::HC2).se(1);
    const double t_hc2 = fit.beta(1) / se_hc2;

    const VectorXd z = y.head(m), w = y.tail(n2);
    const double sz2 = (z.array() - z.mean()).square().sum() / (m - 1);
    const double sw2 = (w.array() - w.mean()).square().sum() / (n2 - 1);
    const double t_uneq = (z.mean() - w.mean()) / std::sqrt(sz2 / m + sw2 / n2);
    CHECK(std::fabs(t_hc2 - t_uneq) < 1e-10);
}

TEST_CASE("HC invariance of a contrast under reparameterization") {
    Rng rng(6);
    const long n = 40, p = 3;
    const MatrixXd X = random_design(n, p, rng);
    VectorXd y(n);
    for (long i = 0; i < n; ++i) y(i) = X(i, 1) + rng.normal(0.0, 1.0 + std::fabs(X(i, 1)));
    MatrixXd G(p, p);
    for (long a = 0; a < p; ++a)
        for (long b = 0; b < p; ++b) G(a, b) = rng.normal();
    G += 3.0 * MatrixXd::Identity(p, p);

    const OlsFit f1 = fit_ols(X, y);
    const OlsFit f2 = fit_ols(X * G, y);
    // beta1 = G beta2, so the contrast x0'beta1 maps to (G'x0)'beta2 and its
    // variance is invariant: V1 = G V2 G'.
    VectorXd x0(p);
    x0 << 1.0, 0.5, -0.2;
    for (auto kind : {CovEstimate::Kind::HC0, CovEstimate::Kind::HC2, CovEstimate::Kind::HC3,
                      CovEstimate::Kind::HC4}) {
        const MatrixXd V1 = hc_covariance(f1, kind).matrix;
        const MatrixXd V2 = hc_covariance(f2, kind).matrix;
        const VectorXd x0t = G.transpose() * x0;
        CHECK(x0.dot(V1 * x0) == doctest::Approx(x0t.dot(V2 * x0t)).epsilon(1e-9));
    }
}

TEST_CASE("HC2 unbiasedness and HC0 downward bias (Monte Carlo)") {
    Rng master(77);
    const long n = 30, p = 3, reps = 10000;
    Rng xrng = master.substream(31337);
    MatrixXd X(n, p);
    X.col(0).setOnes();
    for (long i = 0; i < n; ++i) {
        X(i, 1) = xrng.normal();
        X(i, 2) = xrng.exponential();
    }
    const QRFactors qr = gram_schmidt_qr(X);
    const MatrixXd target = xtx_inverse_from_r(qr.R);  // sigma2 = 1

    MatrixXd sum2 = MatrixXd::Zero(p, p), sumsq2 = MatrixXd::Zero(p, p);
    MatrixXd sum0 = MatrixXd::Zero(p, p);
    for (long r = 0; r < reps; ++r) {
        Rng rng = master.substream(r);
        VectorXd y(n);
        for (long i = 0; i < n; ++i) y(i) = rng.normal();
        const OlsFit fit = fit_ols(X, y);
        const MatrixXd v2 = hc_covariance(fit, CovEstimate::Kind::HC2).matrix;
        sum2 += v2;
        sumsq2 += v2.cwiseProduct(v2);
        sum0 += hc_covariance(fit, CovEstimate::Kind::HC0).matrix;
    }
    const MatrixXd mean2 = sum2 / reps;
    const MatrixXd mean0 = sum0 / reps;
    for (long a = 0; a < p; ++a)
        for (long b = 0; b < p; ++b) {
            const double var =
                (sumsq2(a, b) / reps - mean2(a, b) * mean2(a, b)) * reps / (reps - 1.0);
            const double mcse = std::sqrt(var / reps);
            CHECK(std::fabs(mean2(a, b) - target(a, b)) < 4.0 * mcse);
        }
    // HC0 is biased downward on the diagonal.
    for (long a = 0; a < p; ++a) CHECK(mean0(a, a) < target(a, a));
}

TEST_CASE("leverage one raises LeverageOneError for HC2-HC4") {
    // The third row is the only one spanning the second coordinate, so its
    // leverage is exactly 1.
    MatrixXd X(4, 2);
    X << 1, 0, 1, 0, 0, 1, 1, 0;
    VectorXd y(4);
    y << 1.0, 2.0, 5.0, 1.5;
    const OlsFit fit = fit_ols(X, y);
    CHECK(fit.leverage.maxCoeff() > 1.0 - 1e-12);
    for (auto kind :
         {CovEstimate::Kind::HC2, CovEstimate::Kind::HC3, CovEstimate::Kind::HC4})
        CHECK_THROWS_AS(hc_covariance(fit, kind), LeverageOneError);
    // HC0/HC1 do not touch the leverages.
    CHECK_NOTHROW(hc_covariance(fit, CovEstimate::Kind::HC0));
    CHECK_NOTHROW(hc_covariance(fit, CovEstimate::Kind::HC1));
}

TEST_CASE("wls_fit basics") {
    Rng rng(10);
    const long n = 20, p = 3;
    const MatrixXd X = random_design(n, p, rng);
    VectorXd y(n);
    for (long i = 0; i < n; ++i) y(i) = X.row(i).sum() + rng.normal();

    ModelMatrix mm;
    mm.X = X;
    mm.Y = y;
    mm.weights = VectorXd::Ones(n);
    const WlsFit w1 = wls_fit(mm);
    const OlsFit ols = fit_ols(X, y);
    CHECK((w1.beta_w - ols.beta).lpNorm<Eigen::Infinity>() < 1e-12);

    // Weighted normal equations hold.
    mm.weights = VectorXd::LinSpaced(n, 0.5, 3.0);
    const WlsFit w2 = wls_fit(mm);
    const VectorXd grad =
        X.transpose() * mm.weights->asDiagonal() * (y - X * w2.beta_w);
    CHECK(grad.lpNorm<Eigen::Infinity>() < 1e-8);

    // Weight 2 equals duplicating the row.
    ModelMatrix dup;
    dup.X.resize(n + 1, p);
    dup.X.topRows(n) = X;
    dup.X.row(n) = X.row(0);
    dup.Y.resize(n + 1);
    dup.Y.head(n) = y;
    dup.Y(n) = y(0);
    dup.weights = VectorXd::Ones(n + 1);
    ModelMatrix w2x;
    w2x.X = X;
    w2x.Y = y;
    VectorXd wts = VectorXd::Ones(n);
    wts(0) = 2.0;
    w2x.weights = wts;
    CHECK((wls_fit(dup).beta_w - wls_fit(w2x).beta_w).lpNorm<Eigen::Infinity>() < 1e-10);

    // Nonpositive weight rejected.
    wts(3) = 0.0;
    w2x.weights = wts;
    CHECK_THROWS_AS(wls_fit(w2x), SpecError);
}

TEST_CASE("binary covariate WLS slope is the weighted mean difference") {
    Rng rng(11);
    const long n = 24;
    MatrixXd X(n, 2);
    X.col(0).setOnes();
    VectorXd y(n), w(n);
    for (long i = 0; i < n; ++i) {
        X(i, 1) = (i % 3 == 0) ? 1.0 : 0.0;
        y(i) = rng.normal(X(i, 1), 1.0);
        w(i) = rng.uniform(0.5, 2.0);
    }
    ModelMatrix mm;
    mm.X = X;
    mm.Y = y;
    mm.weights = w;
    const WlsFit fit = wls_fit(mm);
    double w1 = 0, wy1 = 0, w0 = 0, wy0 = 0;
    for (long i = 0; i < n; ++i) {
        if (X(i, 1) == 1.0) {
            w1 += w(i);
            wy1 += w(i) * y(i);
        } else {
            w0 += w(i);
            wy0 += w(i) * y(i);
        }
    }
    CHECK(fit.beta_w(1) == doctest::Approx(wy1 / w1 - wy0 / w0).epsilon(1e-10));
}

TEST_CASE("wls_sandwich") {
    Rng rng(12);
    const long n = 6, p = 2;
    MatrixXd X(n, p);
    X.col(0).setOnes();
    for (long i = 0; i < n; ++i) X(i, 1) = rng.normal();
    VectorXd y(n), w(n);
    for (long i = 0; i < n; ++i) {
        y(i) = rng.normal();
        w(i) = rng.uniform(0.5, 2.0);
    }
    ModelMatrix mm;
    mm.X = X;
    mm.Y = y;
    mm.weights = w;
    const WlsFit fit = wls_fit(mm);
    const CovEstimate v = wls_sandwich(fit);

    // Explicit triple product oracle.
    MatrixXd A = MatrixXd::Zero(p, p), B = MatrixXd::Zero(p, p);
    for (long i = 0; i < n; ++i) {
        const VectorXd xi = X.row(i).transpose();
        A += w(i) * xi * xi.transpose();
        const double e = y(i) - X.row(i).dot(fit.beta_w);
        B += w(i) * w(i) * e * e * xi * xi.transpose();
    }
    const MatrixXd oracle = A.inverse() * B * A.inverse();
    CHECK((v.matrix - oracle).lpNorm<Eigen::Infinity>() < 1e-12);

    // Unit weights match HC0 on the OLS fit.
    mm.weights = VectorXd::Ones(n);
    const WlsFit fu = wls_fit(mm);
    const CovEstimate vu = wls_sandwich(fu);
    const CovEstimate h0 = hc_covariance(fit_ols(X, y), CovEstimate::Kind::HC0);
    CHECK((vu.matrix - h0.matrix).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("group-dummy WLS sandwich is diagonal with the closed form") {
    Rng rng(13);
    const long n = 15;
    MatrixXd X = MatrixXd::Zero(n, 2);  // two group dummies, no intercept
    VectorXd y(n), w(n);
    for (long i = 0; i < n; ++i) {
        X(i, i < 7 ? 0 : 1) = 1.0;
        y(i) = rng.normal();
        w(i) = rng.uniform(0.5, 2.0);
    }
    ModelMatrix mm;
    mm.X = X;
    mm.Y = y;
    mm.weights = w;
    const WlsFit fit = wls_fit(mm);
    const CovEstimate v = wls_sandwich(fit);
    CHECK(std::fabs(v.matrix(0, 1)) < 1e-14);
    for (int g = 0; g < 2; ++g) {
        double num = 0.0, den = 0.0;
        for (long i = 0; i < n; ++i) {
            if (X(i, g) != 1.0) continue;
            const double e = y(i) - fit.beta_w(g);
            num += w(i) * w(i) * e * e;
            den += w(i);
        }
        CHECK(v.matrix(g, g) == doctest::Approx(num / (den * den)).epsilon(1e-12));
    }
}

TEST_CASE("FGLS") {
    Rng master(14);
    // Weights strictly positive even with a zero residual.
    {
        Rng rng = master.substream(0);
        const long n = 25;
        const MatrixXd X = random_design(n, 2, rng);
        VectorXd y(n);
        for (long i = 0; i < n; ++i) y(i) = X.row(i).sum() + rng.normal();
        ModelMatrix mm;
        mm.X = X;
        mm.Y = y;
        const FglsFit f = fgls_fit(mm);
        CHECK((f.wls.weights.array() > 0.0).all());
    }

    // Homoskedastic: FGLS close to OLS across reps.
    {
        const long n = 60, reps = 300;
        VectorXd diffs(reps);
        for (long r = 0; r < reps; ++r) {
            Rng rng = master.substream(100 + r);
            const MatrixXd X = random_design(n, 2, rng);
            VectorXd y(n);
            for (long i = 0; i < n; ++i) y(i) = 1.0 + X(i, 1) + rng.normal();
            ModelMatrix mm;
            mm.X = X;
            mm.Y = y;
            diffs(r) = fgls_fit(mm).wls.beta_w(1) - fit_ols(X, y).beta(1);
        }
        const double mean_diff = diffs.mean();
        const double mcse = std::sqrt((diffs.array() - mean_diff).square().sum() /
                                      (reps - 1.0) / reps);
        CHECK(std::fabs(mean_diff) < 3.0 * mcse + 1e-3);
    }

    // Heteroskedastic var ~ exp(x): FGLS beats OLS in variance.
    {
        const long n = 200, reps = 2000;
        VectorXd b_ols(reps), b_fgls(reps);
        for (long r = 0; r < reps; ++r) {
            Rng rng = master.substream(10000 + r);
            MatrixXd X(n, 2);
            X.col(0).setOnes();
            VectorXd y(n);
            for (long i = 0; i < n; ++i) {
                X(i, 1) = rng.normal();
                y(i) = X(i, 1) + rng.normal(0.0, std::exp(0.5 * X(i, 1)));
            }
            ModelMatrix mm;
            mm.X = X;
            mm.Y = y;
            b_ols(r) = fit_ols(X, y).beta(1);
            b_fgls(r) = fgls_fit(mm).wls.beta_w(1);
        }
        const double v_ols = (b_ols.array() - b_ols.mean()).square().sum() / (reps - 1);
        const double v_fgls = (b_fgls.array() - b_fgls.mean()).square().sum() / (reps - 1);
        CHECK(v_fgls <= v_ols);
    }
}
