#include "lmx/shrinkage.hpp"

#include <algorithm>
#include <cmath>

#include "lmx/errors.hpp"

namespace lmx {

RidgePath ridge_path(const ModelMatrix& mm_std, const std::vector<double>& lambdas) {
    for (double lam : lambdas)
        if (lam < 0.0) throw SpecError("ridge_path: negative lambda");
    const long n = mm_std.n(), p = mm_std.p();
    RidgePath path;
    path.lambdas = lambdas;
    path.svd = thin_svd(mm_std.X);
    path.Y = mm_std.Y;
    const long L = static_cast<long>(lambdas.size());
    const long r = path.svd.rank();
    const VectorXd uty = path.svd.U.transpose() * mm_std.Y;

    path.coefs.resize(p, L);
    path.df.resize(L);
    path.gcv.resize(L);
    path.press.resize(L);
    path.intercept_back = VectorXd::Zero(L);
    for (long l = 0; l < L; ++l) {
        const double lam = lambdas[l];
        VectorXd shrink(r), hshrink(r);
        for (long j = 0; j < r; ++j) {
            const double d2 = path.svd.d(j) * path.svd.d(j);
            shrink(j) = path.svd.d(j) / (d2 + lam);
            hshrink(j) = d2 / (d2 + lam);
        }
        path.coefs.col(l) = path.svd.V * shrink.cwiseProduct(uty).eval();
        path.df(l) = hshrink.sum();
        const VectorXd fitted = path.svd.U * hshrink.cwiseProduct(uty).eval();
        const VectorXd resid = mm_std.Y - fitted;
        const double denom = 1.0 - path.df(l) / n;
        path.gcv(l) = resid.squaredNorm() / (denom * denom);
        const VectorXd h = (path.svd.U.array().square().matrix() * hshrink).eval();
        path.press(l) = (resid.array() / (1.0 - h.array())).square().sum();
    }
    return path;
}

double ridge_gcv_lambda(const RidgePath& path) {
    // Ties go to the smallest lambda.
    long best = 0;
    for (long l = 1; l < path.gcv.size(); ++l) {
        const bool better = path.gcv(l) < path.gcv(best) ||
                            (path.gcv(l) == path.gcv(best) && path.lambdas[l] < path.lambdas[best]);
        if (better) best = l;
    }
    return path.lambdas[best];
}

RidgeTuning ridge_tune(const RidgePath& path, const OlsFit& fit0) {
    RidgeTuning out;
    out.gcv_lambda = ridge_gcv_lambda(path);
    const long p = fit0.p();
    const double s2 = fit0.sigma2_hat;
    out.hkb_lambda = p * s2 / fit0.beta.squaredNorm();
    // beta' D^2 beta in the SVD basis of the standardized design.
    const VectorXd gamma = path.svd.V.transpose() * fit0.beta;
    double weighted = 0.0;
    for (long j = 0; j < path.svd.rank(); ++j)
        weighted += gamma(j) * gamma(j) * path.svd.d(j) * path.svd.d(j);
    out.lw_lambda = p * s2 / weighted;
    return out;
}

MatrixXd ridge_loo(const RidgePath& path) {
    const long n = path.Y.size();
    const long L = static_cast<long>(path.lambdas.size());
    const long r = path.svd.rank();
    const VectorXd uty = path.svd.U.transpose() * path.Y;
    MatrixXd out(n, L);
    for (long l = 0; l < L; ++l) {
        const double lam = path.lambdas[l];
        VectorXd hshrink(r);
        for (long j = 0; j < r; ++j) {
            const double d2 = path.svd.d(j) * path.svd.d(j);
            hshrink(j) = d2 / (d2 + lam);
        }
        const VectorXd fitted = path.svd.U * hshrink.cwiseProduct(uty).eval();
        const VectorXd h = (path.svd.U.array().square().matrix() * hshrink).eval();
        out.col(l) = (path.Y - fitted).array() / (1.0 - h.array());
    }
    return out;
}

double soft_threshold(double b0, double lam) {
    if (b0 > lam) return b0 - lam;
    if (b0 < -lam) return b0 + lam;
    return 0.0;
}

EnetResult enet_cd_result(const MatrixXd& X, const VectorXd& Y, double lambda, double alpha,
                          const EnetOptions& opts, const VectorXd* warm) {
    if (lambda < 0.0) throw SpecError("enet_cd: negative lambda");
    if (alpha < 0.0 || alpha > 1.0) throw SpecError("enet_cd: alpha outside [0,1]");
    const long n = X.rows(), p = X.cols();
    EnetResult out;
    out.beta = warm ? *warm : VectorXd::Zero(p);
    VectorXd resid = Y - X * out.beta;
    const VectorXd v = X.colwise().squaredNorm() / static_cast<double>(n);
    const double thresh = lambda * (1.0 - alpha);
    const double shrink = lambda * alpha;
    for (long sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (long j = 0; j < p; ++j) {
            const double old = out.beta(j);
            const double z = X.col(j).dot(resid) / n + v(j) * old;
            const double next = soft_threshold(z, thresh) / (v(j) + shrink);
            if (next != old) {
                resid -= (next - old) * X.col(j);
                out.beta(j) = next;
                max_change = std::max(max_change, std::fabs(next - old));
            }
        }
        out.sweeps = sweep + 1;
        if (max_change < opts.tol) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

VectorXd enet_cd(const MatrixXd& X, const VectorXd& Y, double lambda, double alpha,
                 const EnetOptions& opts, const VectorXd* warm) {
    EnetResult res = enet_cd_result(X, Y, lambda, alpha, opts, warm);
    if (!res.converged)
        throw ConvergenceError("enet_cd: no convergence after " + std::to_string(opts.max_sweeps) +
                               " sweeps");
    return std::move(res.beta);
}

double lasso_lambda_max(const MatrixXd& X, const VectorXd& Y, double alpha) {
    const double corr_max = (X.transpose() * Y).cwiseAbs().maxCoeff() / X.rows();
    // Pure-ridge end never zeroes coefficients; floor the lasso share.
    return corr_max / std::max(1.0 - alpha, 1e-3);
}

namespace {

struct StandardizedFold {
    MatrixXd X;
    VectorXd Y;
    VectorXd means, scales;
    double y_mean = 0.0;
};

StandardizedFold standardize_block(const MatrixXd& X, const VectorXd& Y) {
    StandardizedFold out;
    const long n = X.rows(), p = X.cols();
    out.means = X.colwise().mean();
    out.scales.resize(p);
    out.X.resize(n, p);
    for (long j = 0; j < p; ++j) {
        const double scale =
            std::sqrt((X.col(j).array() - out.means(j)).square().sum() / n);
        out.scales(j) = scale < 1e-12 ? 1.0 : scale;
        out.X.col(j) = (X.col(j).array() - out.means(j)) / out.scales(j);
    }
    out.y_mean = Y.mean();
    out.Y = Y.array() - out.y_mean;
    return out;
}

double fold_prediction_error(const StandardizedFold& train, const VectorXd& beta,
                             const MatrixXd& X_test, const VectorXd& Y_test) {
    double sum = 0.0;
    for (long i = 0; i < X_test.rows(); ++i) {
        double pred = train.y_mean;
        for (long j = 0; j < X_test.cols(); ++j)
            pred += beta(j) * (X_test(i, j) - train.means(j)) / train.scales(j);
        const double err = Y_test(i) - pred;
        sum += err * err;
    }
    return sum;
}

}  // namespace

CvResult cv_path(const ModelMatrix& mm, double alpha, long K, std::uint64_t seed, long n_lambda) {
    if (K < 2) throw SpecError("cv_path: K < 2");
    const long n = mm.n();
    // Shrinkage acts on covariates only; drop an explicit intercept column.
    MatrixXd Xraw = mm.X;
    if (mm.has_intercept) Xraw = mm.X.rightCols(mm.p() - 1);
    const VectorXd& Yraw = mm.Y;
    const long p = Xraw.cols();

    const StandardizedFold full = standardize_block(Xraw, Yraw);
    const auto folds = kfold_indices(n, K, seed);

    // Standardize each training fold up front; the grid top must zero the
    // solution on every fold, so lambda_max is the max across them.
    std::vector<StandardizedFold> trains(folds.size());
    std::vector<MatrixXd> tests_x(folds.size());
    std::vector<VectorXd> tests_y(folds.size());
    double lam_max = lasso_lambda_max(full.X, full.Y, alpha);
    for (size_t f = 0; f < folds.size(); ++f) {
        const auto& test_idx = folds[f];
        std::vector<char> in_test(n, 0);
        for (long i : test_idx) in_test[i] = 1;
        std::vector<long> train_idx;
        for (long i = 0; i < n; ++i)
            if (!in_test[i]) train_idx.push_back(i);

        MatrixXd Xtr(static_cast<long>(train_idx.size()), p);
        VectorXd Ytr(Xtr.rows());
        for (size_t i = 0; i < train_idx.size(); ++i) {
            Xtr.row(static_cast<long>(i)) = Xraw.row(train_idx[i]);
            Ytr(static_cast<long>(i)) = Yraw(train_idx[i]);
        }
        tests_x[f].resize(static_cast<long>(test_idx.size()), p);
        tests_y[f].resize(static_cast<long>(test_idx.size()));
        for (size_t i = 0; i < test_idx.size(); ++i) {
            tests_x[f].row(static_cast<long>(i)) = Xraw.row(test_idx[i]);
            tests_y[f](static_cast<long>(i)) = Yraw(test_idx[i]);
        }
        trains[f] = standardize_block(Xtr, Ytr);
        lam_max = std::max(lam_max, lasso_lambda_max(trains[f].X, trains[f].Y, alpha));
    }

    std::vector<double> lambdas(n_lambda);
    for (long l = 0; l < n_lambda; ++l)
        lambdas[l] = lam_max * std::pow(10.0, -4.0 * l / (n_lambda - 1.0));

    VectorXd cv_sum = VectorXd::Zero(n_lambda);
    for (size_t f = 0; f < folds.size(); ++f) {
        VectorXd warm = VectorXd::Zero(p);
        for (long l = 0; l < n_lambda; ++l) {
            warm = enet_cd(trains[f].X, trains[f].Y, lambdas[l], alpha, {}, &warm);
            cv_sum(l) += fold_prediction_error(trains[f], warm, tests_x[f], tests_y[f]);
        }
    }

    CvResult out;
    out.cv_errors = cv_sum / n;
    out.path.lambdas = lambdas;
    out.path.alpha = alpha;
    out.path.coefs.resize(p, n_lambda);
    VectorXd warm = VectorXd::Zero(p);
    for (long l = 0; l < n_lambda; ++l) {
        const EnetResult res = enet_cd_result(full.X, full.Y, lambdas[l], alpha, {}, &warm);
        warm = res.beta;
        out.path.coefs.col(l) = res.beta;
        out.path.n_iter.push_back(res.sweeps);
        out.path.converged.push_back(res.converged);
    }
    long best = 0;
    for (long l = 1; l < n_lambda; ++l)
        if (out.cv_errors(l) < out.cv_errors(best)) best = l;
    // Grid is decreasing, so scan for the last (smallest-lambda) strict
    // minimum then prefer smaller lambda on exact ties.
    for (long l = 0; l < n_lambda; ++l)
        if (out.cv_errors(l) == out.cv_errors(best) && lambdas[l] < lambdas[best]) best = l;
    out.lambda_min = lambdas[best];
    return out;
}

}  // namespace lmx
