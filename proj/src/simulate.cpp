#include "lmx/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lmx/diagnostics.hpp"
#include "lmx/dist.hpp"
#include "lmx/errors.hpp"
#include "lmx/rng.hpp"
#include "lmx/shrinkage.hpp"

namespace lmx {

namespace {

// KS distance of a sample against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::fabs(f - (i + 1) / n));
        d = std::max(d, std::fabs(f - i / n));
    }
    return d;
}

MatrixXd intercept_design(const MatrixXd& covariates) {
    MatrixXd X(covariates.rows(), covariates.cols() + 1);
    X.col(0) = VectorXd::Ones(covariates.rows());
    X.rightCols(covariates.cols()) = covariates;
    return X;
}

}  // namespace

Report simulate_freedman(long n, long p, long reps, std::uint64_t seed) {
    if (p < 2 || n <= p) throw SpecError("freedman: need 2 <= p < n");
    Rng master(seed);
    std::vector<double> r2s(reps);
    for (long rep = 0; rep < reps; ++rep) {
        Rng rng = master.substream(rep);
        MatrixXd Z(n, p - 1);
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < p - 1; ++j) Z(i, j) = rng.normal();
        VectorXd y(n);
        for (long i = 0; i < n; ++i) y(i) = rng.normal();
        r2s[rep] = fit_ols(intercept_design(Z), y).r2;
    }
    const double mean = std::accumulate(r2s.begin(), r2s.end(), 0.0) / reps;
    double var = 0.0;
    for (double v : r2s) var += (v - mean) * (v - mean);
    var /= reps - 1;
    const double a = (p - 1) / 2.0, b = (n - p) / 2.0;
    const double ks = ks_statistic(r2s, [&](double x) { return dist::beta_cdf(x, a, b); });

    Report report;
    report.model_kind = "simulate:freedman";
    report.fit_stats["n"] = static_cast<double>(n);
    report.fit_stats["p"] = static_cast<double>(p);
    report.fit_stats["reps"] = static_cast<double>(reps);
    report.fit_stats["r2_mean"] = mean;
    report.fit_stats["r2_var"] = var;
    report.fit_stats["r2_mean_theory"] = (p - 1.0) / (n - 1.0);
    report.fit_stats["beta_a"] = a;
    report.fit_stats["beta_b"] = b;
    report.fit_stats["ks_distance"] = ks;
    report.fit_stats["ks_p_value"] = dist::ks_p_value(ks, reps);
    return report;
}

Report simulate_ehw_compare(long n, long reps, std::uint64_t seed) {
    Rng master(seed);
    VectorXd x(n);
    for (long i = 0; i < n; ++i) x(i) = master.uniform(-2.0, 2.0);
    const MatrixXd X = intercept_design(x);
    const double z975 = dist::norm_quantile(0.975);
    const double t975 = dist::t_quantile(0.975, static_cast<double>(n - 2));

    Report report;
    report.model_kind = "simulate:ehw-compare";
    report.fit_stats["n"] = static_cast<double>(n);
    report.fit_stats["reps"] = static_cast<double>(reps);
    const std::vector<std::string> panels = {"normal", "exponential", "het_normal",
                                             "het_uniform"};
    for (int panel = 0; panel < 4; ++panel) {
        std::vector<double> slopes(reps), se1s(reps), se2s(reps);
        long cover_classic = 0, cover_hc2 = 0;
        for (long rep = 0; rep < reps; ++rep) {
            Rng rng = master.substream(1000003ULL * (panel + 1) + rep);
            VectorXd y(n);
            for (long i = 0; i < n; ++i) {
                double err = 0.0;
                switch (panel) {
                    case 0: err = rng.normal(); break;
                    case 1: err = rng.exponential(); break;
                    case 2: err = rng.normal(0.0, std::fabs(x(i))); break;
                    case 3: err = rng.uniform(-x(i) * x(i), x(i) * x(i)); break;
                }
                y(i) = x(i) + err;
            }
            const OlsFit fit = fit_ols(X, y);
            const double se_classic = std::sqrt(fit.sigma2_hat * fit.xtx_inv(1, 1));
            const double se_hc0 = hc_covariance(fit, CovEstimate::Kind::HC0).se(1);
            const double se_hc2 = hc_covariance(fit, CovEstimate::Kind::HC2).se(1);
            slopes[rep] = fit.beta(1);
            se1s[rep] = se_classic;
            se2s[rep] = se_hc0;
            if (std::fabs(fit.beta(1) - 1.0) <= t975 * se_classic) ++cover_classic;
            if (std::fabs(fit.beta(1) - 1.0) <= z975 * se_hc2) ++cover_hc2;
        }
        const double mean_slope = std::accumulate(slopes.begin(), slopes.end(), 0.0) / reps;
        double sd0 = 0.0;
        for (double s : slopes) sd0 += (s - mean_slope) * (s - mean_slope);
        sd0 = std::sqrt(sd0 / (reps - 1));
        const std::string& tag = panels[panel];
        report.fit_stats[tag + "_se0"] = sd0;
        report.fit_stats[tag + "_se1"] =
            std::accumulate(se1s.begin(), se1s.end(), 0.0) / reps;
        report.fit_stats[tag + "_se2"] =
            std::accumulate(se2s.begin(), se2s.end(), 0.0) / reps;
        report.fit_stats[tag + "_coverage_classic"] = static_cast<double>(cover_classic) / reps;
        report.fit_stats[tag + "_coverage_hc2"] = static_cast<double>(cover_hc2) / reps;
    }
    return report;
}

Report simulate_hc2_unbiased(long n, long p, long reps, std::uint64_t seed) {
    Rng master(seed);
    // Fixed design: intercept, a Normal column, and a skewed column for
    // leverage spread.
    MatrixXd Z(n, p - 1);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < p - 1; ++j)
            Z(i, j) = (j % 2 == 0) ? master.normal() : master.exponential();
    const MatrixXd X = intercept_design(Z);
    const QRFactors qr = gram_schmidt_qr(X);
    const MatrixXd true_cov = xtx_inverse_from_r(qr.R);  // sigma2 = 1

    MatrixXd sum_hc2 = MatrixXd::Zero(p, p), sum_hc0 = MatrixXd::Zero(p, p);
    MatrixXd sumsq_hc2 = MatrixXd::Zero(p, p);
    for (long rep = 0; rep < reps; ++rep) {
        Rng rng = master.substream(rep + 17);
        VectorXd y(n);
        for (long i = 0; i < n; ++i) y(i) = rng.normal();
        const OlsFit fit = fit_ols(X, y);
        const MatrixXd v2 = hc_covariance(fit, CovEstimate::Kind::HC2).matrix;
        const MatrixXd v0 = hc_covariance(fit, CovEstimate::Kind::HC0).matrix;
        sum_hc2 += v2;
        sum_hc0 += v0;
        sumsq_hc2 += v2.cwiseProduct(v2);
    }
    const MatrixXd mean_hc2 = sum_hc2 / reps;
    const MatrixXd mean_hc0 = sum_hc0 / reps;
    const MatrixXd var_hc2 =
        (sumsq_hc2 / reps - mean_hc2.cwiseProduct(mean_hc2)) * (reps / (reps - 1.0));
    double max_abs_z = 0.0;
    for (long a = 0; a < p; ++a)
        for (long b = 0; b < p; ++b) {
            const double mcse = std::sqrt(std::max(var_hc2(a, b), 1e-300) / reps);
            max_abs_z = std::max(max_abs_z, std::fabs(mean_hc2(a, b) - true_cov(a, b)) / mcse);
        }
    double hc0_diag_ratio = 0.0;
    long hc0_below = 0;
    for (long a = 0; a < p; ++a) {
        hc0_diag_ratio += mean_hc0(a, a) / true_cov(a, a);
        if (mean_hc0(a, a) < true_cov(a, a)) ++hc0_below;
    }

    Report report;
    report.model_kind = "simulate:hc2-unbiased";
    report.fit_stats["n"] = static_cast<double>(n);
    report.fit_stats["p"] = static_cast<double>(p);
    report.fit_stats["reps"] = static_cast<double>(reps);
    report.fit_stats["hc2_max_abs_z"] = max_abs_z;
    report.fit_stats["hc0_diag_mean_ratio"] = hc0_diag_ratio / p;
    report.fit_stats["hc0_diag_below_count"] = static_cast<double>(hc0_below);
    return report;
}

Report simulate_conformal_coverage(long n, long reps, std::uint64_t seed) {
    Rng master(seed);
    const double alpha = 0.1;
    long covered = 0;
    std::vector<long> rank_counts(n + 1, 0);
    for (long rep = 0; rep < reps; ++rep) {
        Rng rng = master.substream(rep);
        MatrixXd Z(n, 1);
        VectorXd y(n);
        for (long i = 0; i < n; ++i) {
            Z(i, 0) = rng.normal();
            y(i) = 1.0 + 2.0 * Z(i, 0) + rng.normal();
        }
        const double x_new_val = rng.normal();
        const double y_new = 1.0 + 2.0 * x_new_val + rng.normal();

        ModelMatrix mm;
        mm.X = intercept_design(Z);
        mm.Y = y;
        mm.has_intercept = true;
        mm.column_names = {"(Intercept)", "x"};
        VectorXd x_new(2);
        x_new << 1.0, x_new_val;
        // Finer-than-default grid: interval endpoints snap to grid points,
        // and the snapping must cost well under the coverage tolerance.
        const auto [lo, hi] = conformal_interval(mm, x_new, alpha,
                                                 default_conformal_grid(y, 800));
        if (y_new >= lo && y_new <= hi) ++covered;

        // Rank of the augmented residual at the true outcome.
        MatrixXd Xa(n + 1, 2);
        Xa.topRows(n) = mm.X;
        Xa.row(n) = x_new.transpose();
        VectorXd ya(n + 1);
        ya.head(n) = y;
        ya(n) = y_new;
        const OlsFit aug = fit_ols(Xa, ya);
        long rank = 1;
        for (long i = 0; i < n; ++i)
            if (std::fabs(aug.residuals(i)) <= std::fabs(aug.residuals(n))) ++rank;
        ++rank_counts[rank - 1];
    }
    // Chi-square GOF against uniform on {1, ..., n+1}.
    const double expected = static_cast<double>(reps) / (n + 1);
    double chisq = 0.0;
    for (long k = 0; k <= n; ++k) {
        const double diff = rank_counts[k] - expected;
        chisq += diff * diff / expected;
    }

    Report report;
    report.model_kind = "simulate:conformal-coverage";
    report.fit_stats["n"] = static_cast<double>(n);
    report.fit_stats["reps"] = static_cast<double>(reps);
    report.fit_stats["alpha"] = alpha;
    report.fit_stats["coverage"] = static_cast<double>(covered) / reps;
    report.fit_stats["rank_chisq"] = chisq;
    report.fit_stats["rank_chisq_df"] = static_cast<double>(n);
    report.fit_stats["rank_chisq_p"] = dist::chisq_upper_p(chisq, static_cast<double>(n));
    return report;
}

Report simulate_ridge_tradeoff(long n, long p, long reps, std::uint64_t seed) {
    Rng master(seed);
    const double sigma = 0.5;
    std::vector<double> lambdas;
    lambdas.push_back(0.0);
    for (long g = 0; g < 140; ++g) lambdas.push_back(0.1 * std::pow(10.0, 3.0 * g / 139.0));

    long ridge_wins = 0;
    double sum_mse_ridge = 0.0, sum_mse_ols = 0.0;
    for (long rep = 0; rep < reps; ++rep) {
        Rng rng = master.substream(rep);
        const VectorXd beta = VectorXd::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
        auto draw = [&](MatrixXd& X, VectorXd& y) {
            X.resize(n, p);
            for (long i = 0; i < n; ++i)
                for (long j = 0; j < p; ++j) X(i, j) = rng.normal();
            X = center_columns(X);
            for (long j = 0; j < p; ++j)
                X.col(j) *= std::sqrt(n / X.col(j).squaredNorm());
            y = X * beta;
            for (long i = 0; i < n; ++i) y(i) += rng.normal(0.0, sigma);
        };
        MatrixXd Xtr, Xte;
        VectorXd ytr, yte;
        draw(Xtr, ytr);
        draw(Xte, yte);

        ModelMatrix mm;
        mm.X = Xtr;
        mm.Y = ytr.array() - ytr.mean();
        const RidgePath path = ridge_path(mm, lambdas);
        const double lam = ridge_gcv_lambda(path);
        long lam_idx = 0;
        for (size_t l = 0; l < lambdas.size(); ++l)
            if (lambdas[l] == lam) lam_idx = static_cast<long>(l);
        const VectorXd beta_ridge = path.coefs.col(lam_idx);
        const VectorXd beta_ols = path.coefs.col(0);  // lambda = 0 entry

        const double ybar = ytr.mean();
        const double mse_ridge = (yte.array() - ybar - (Xte * beta_ridge).array()).square().mean();
        const double mse_ols = (yte.array() - ybar - (Xte * beta_ols).array()).square().mean();
        sum_mse_ridge += mse_ridge;
        sum_mse_ols += mse_ols;
        if (mse_ridge <= mse_ols) ++ridge_wins;
    }

    Report report;
    report.model_kind = "simulate:ridge-tradeoff";
    report.fit_stats["n"] = static_cast<double>(n);
    report.fit_stats["p"] = static_cast<double>(p);
    report.fit_stats["reps"] = static_cast<double>(reps);
    report.fit_stats["ridge_win_rate"] = static_cast<double>(ridge_wins) / reps;
    report.fit_stats["mean_test_mse_ridge"] = sum_mse_ridge / reps;
    report.fit_stats["mean_test_mse_ols"] = sum_mse_ols / reps;
    return report;
}

Report simulate(const std::string& suite, const SimParams& params) {
    const auto def = [](long v, long d) { return v > 0 ? v : d; };
    if (suite == "freedman")
        return simulate_freedman(def(params.n, 100), def(params.p, 50), def(params.reps, 5000),
                                 params.seed);
    if (suite == "ehw-compare")
        return simulate_ehw_compare(def(params.n, 200), def(params.reps, 5000), params.seed);
    if (suite == "hc2-unbiased")
        return simulate_hc2_unbiased(def(params.n, 30), def(params.p, 3), def(params.reps, 10000),
                                     params.seed);
    if (suite == "conformal-coverage")
        return simulate_conformal_coverage(def(params.n, 49), def(params.reps, 1000), params.seed);
    if (suite == "ridge-tradeoff")
        return simulate_ridge_tradeoff(def(params.n, 200), def(params.p, 100),
                                       def(params.reps, 500), params.seed);
    throw SpecError("unknown simulation suite: " + suite);
}

}  // namespace lmx
