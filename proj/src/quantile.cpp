#include "lmx/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lmx/errors.hpp"

namespace lmx {

double check_loss(double u, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw SpecError("check_loss: tau outside (0,1)");
    return u >= 0.0 ? u * tau : -u * (1.0 - tau);
}

namespace {

struct Breakpoint {
    double t;
    double gain;  // |w|, the slope increase when the residual crosses zero
    long index;
};

}  // namespace

QuantFit rq_fit(const MatrixXd& X, const VectorXd& Y, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw SpecError("rq_fit: tau outside (0,1)");
    const long n = X.rows(), p = X.cols();
    if (n < p) throw InsufficientDataError("rq_fit: n < p");

    // Initial vertex: p linearly independent rows from a pivoted QR of X'.
    Eigen::ColPivHouseholderQR<MatrixXd> pivot(X.transpose());
    if (pivot.rank() < p) throw RankDeficientError(pivot.rank());
    std::vector<long> basis(p);
    for (long j = 0; j < p; ++j) basis[j] = pivot.colsPermutation().indices()(j);

    const double tolR = 1e-9 * (1.0 + Y.cwiseAbs().maxCoeff());
    VectorXd beta(p), resid(n);
    MatrixXd Xb(p, p), Xb_inv(p, p);
    std::vector<char> in_basis(n, 0);

    auto refresh = [&] {
        std::fill(in_basis.begin(), in_basis.end(), 0);
        VectorXd Yb(p);
        for (long j = 0; j < p; ++j) {
            Xb.row(j) = X.row(basis[j]);
            Yb(j) = Y(basis[j]);
            in_basis[basis[j]] = 1;
        }
        Eigen::PartialPivLU<MatrixXd> lu(Xb);
        Xb_inv = lu.inverse();
        beta = lu.solve(Yb);
        resid = Y - X * beta;
        for (long j = 0; j < p; ++j) resid(basis[j]) = 0.0;
    };
    refresh();

    const long max_iter = 100 * n + 1000;
    long degenerate_run = 0;
    for (long iter = 0; iter < max_iter; ++iter) {
        // D(i, j) = x_i' d_j where X_B d_j = e_j.
        const MatrixXd D = X * Xb_inv;
        const bool bland = degenerate_run > 2 * p + 10;

        long best_j = -1;
        int best_s = +1;
        double best_df = 0.0;
        for (long j = 0; j < p && !(bland && best_j >= 0); ++j) {
            double scale = 1.0;
            for (long i = 0; i < n; ++i) scale += std::fabs(D(i, j));
            const double eps_g = 1e-9 * scale;
            for (int s : {+1, -1}) {
                // One-sided derivative along s * d_j.
                double df = (s > 0) ? (1.0 - tau) : tau;
                for (long i = 0; i < n; ++i) {
                    if (in_basis[i]) continue;
                    const double w = -s * D(i, j);
                    if (resid(i) > tolR)
                        df += tau * w;
                    else if (resid(i) < -tolR)
                        df += -(1.0 - tau) * w;
                    else
                        df += std::max(tau * w, -(1.0 - tau) * w);
                }
                if (df < -eps_g && (best_j < 0 || df < best_df)) {
                    best_j = j;
                    best_s = s;
                    best_df = df;
                    if (bland) break;  // first eligible direction
                }
            }
        }
        if (best_j < 0) break;  // vertex optimality certificate holds

        // Weighted-median line search over breakpoint residuals.
        std::vector<Breakpoint> bps;
        bps.reserve(n);
        for (long i = 0; i < n; ++i) {
            if (in_basis[i]) continue;
            const double w = -best_s * D(i, best_j);
            if (w == 0.0 || std::fabs(resid(i)) <= tolR) continue;
            const double t = -resid(i) / w;
            if (t > 0.0) bps.push_back({t, std::fabs(w), i});
        }
        std::sort(bps.begin(), bps.end(), [](const Breakpoint& a, const Breakpoint& b) {
            return a.t != b.t ? a.t < b.t : a.index < b.index;
        });
        double g = best_df;
        long enter = -1;
        double t_star = 0.0;
        for (const auto& bp : bps) {
            g += bp.gain;
            if (g >= 0.0) {
                enter = bp.index;
                t_star = bp.t;
                break;
            }
        }
        if (enter < 0) throw SolverError("rq_fit: descent direction is unbounded");

        degenerate_run = (t_star <= tolR) ? degenerate_run + 1 : 0;
        basis[best_j] = enter;
        refresh();
        if (iter == max_iter - 1) throw SolverError("rq_fit: pivot limit exceeded");
    }

    QuantFit fit;
    fit.tau = tau;
    fit.beta = beta;
    fit.basis = basis;
    double obj = 0.0;
    for (long i = 0; i < n; ++i) obj += check_loss(resid(i), tau);
    fit.objective = obj;
    return fit;
}

QuantFit rq_fit(const ModelMatrix& mm, double tau) { return rq_fit(mm.X, mm.Y, tau); }

CovEstimate rq_powell_cov(const QuantFit& fit, const MatrixXd& X, const VectorXd& Y,
                          std::optional<double> bandwidth) {
    const long n = X.rows(), p = X.cols();
    const VectorXd resid = Y - X * fit.beta;
    double h;
    if (bandwidth) {
        h = *bandwidth;
    } else {
        const double mean = resid.mean();
        const double sd = std::sqrt((resid.array() - mean).square().sum() / (n - 1));
        h = 1.06 * sd * std::pow(static_cast<double>(n), -1.0 / 3.0);
    }
    MatrixXd M = MatrixXd::Zero(p, p);
    MatrixXd B = MatrixXd::Zero(p, p);
    for (long i = 0; i < n; ++i) {
        const double psi = fit.tau - (resid(i) <= 0.0 ? 1.0 : 0.0);
        M += psi * psi * X.row(i).transpose() * X.row(i);
        if (std::fabs(resid(i)) <= h) B += X.row(i).transpose() * X.row(i);
    }
    M /= n;
    B /= 2.0 * n * h;
    Eigen::FullPivLU<MatrixXd> lu(B);
    if (!lu.isInvertible())
        throw BandwidthError("rq_powell_cov: density matrix singular, increase the bandwidth");
    const MatrixXd binv = lu.inverse();
    return CovEstimate::from_matrix(binv * M * binv / n, CovEstimate::Kind::Powell);
}

CovEstimate rq_bootstrap_cov(const MatrixXd& X, const VectorXd& Y, double tau, long B,
                             std::uint64_t seed) {
    if (B < 100) throw SpecError("rq_bootstrap_cov: need B >= 100");
    const long n = X.rows(), p = X.cols();
    MatrixXd draws(B, p);
    Rng master(seed);
    long attempts = 0;
    for (long b = 0; b < B; ++b) {
        // Replicate stream seed xor b; a rank-deficient resample keeps
        // drawing from the same stream.
        Rng rep = master.substream(static_cast<std::uint64_t>(b));
        bool done = false;
        while (!done) {
            if (++attempts > 10 * B)
                throw SolverError("rq_bootstrap_cov: too many rank-deficient resamples");
            MatrixXd Xb(n, p);
            VectorXd Yb(n);
            for (long i = 0; i < n; ++i) {
                const long k = rep.uniform_int(n);
                Xb.row(i) = X.row(k);
                Yb(i) = Y(k);
            }
            try {
                draws.row(b) = rq_fit(Xb, Yb, tau).beta.transpose();
                done = true;
            } catch (const RankDeficientError&) {
            }
        }
    }
    const Eigen::RowVectorXd mean = draws.colwise().mean();
    const MatrixXd centered = draws.rowwise() - mean;
    return CovEstimate::from_matrix(centered.transpose() * centered / (B - 1.0),
                                    CovEstimate::Kind::Bootstrap);
}

}  // namespace lmx
