#include "lmx/gee.hpp"

#include <cmath>
#include <map>

#include "lmx/errors.hpp"

namespace lmx {

long PanelData::total_rows() const {
    long n = 0;
    for (const auto& c : clusters) n += c.X.rows();
    return n;
}

long PanelData::max_cluster_size() const {
    long m = 0;
    for (const auto& c : clusters) m = std::max(m, static_cast<long>(c.X.rows()));
    return m;
}

PanelData make_panel(const ModelMatrix& mm, const GlmFamily& family) {
    if (!mm.cluster_ids) throw SpecError("make_panel: no cluster ids");
    PanelData panel;
    panel.family = family;
    std::map<std::string, long> index_of;
    std::vector<std::vector<long>> rows;
    for (long i = 0; i < mm.n(); ++i) {
        const auto& id = (*mm.cluster_ids)[i];
        auto it = index_of.find(id);
        if (it == index_of.end()) {
            it = index_of.emplace(id, static_cast<long>(rows.size())).first;
            rows.emplace_back();
        }
        rows[it->second].push_back(i);
    }
    for (const auto& idx : rows) {
        Cluster c;
        c.X.resize(static_cast<long>(idx.size()), mm.p());
        c.Y.resize(static_cast<long>(idx.size()));
        for (size_t t = 0; t < idx.size(); ++t) {
            c.X.row(static_cast<long>(t)) = mm.X.row(idx[t]);
            c.Y(static_cast<long>(t)) = mm.Y(idx[t]);
        }
        panel.clusters.push_back(std::move(c));
    }
    return panel;
}

namespace {

// Marginal mean, mean derivative d mu/d eta, and working variance at eta.
struct Marginal {
    double mu, dmu, var;
};

Marginal marginal_at(const GlmFamily& family, double eta) {
    switch (family.kind) {
        case GlmFamily::Kind::Linear:
            return {eta, 1.0, 1.0};  // constant working variance
        case GlmFamily::Kind::Binary: {
            const auto [g, gp] = link_eval(family.link, eta);
            const double v = std::max(g * (1.0 - g), 1e-10);
            return {g, gp, v};
        }
        case GlmFamily::Kind::Poisson: {
            const double lam = std::exp(std::min(eta, 300.0));
            return {lam, lam, std::max(lam, 1e-10)};
        }
        default:
            throw SpecError("gee: family must be linear, logistic, or poisson");
    }
}

double rho_lower_bound(long max_size) {
    return max_size > 1 ? -1.0 / (max_size - 1) : -1.0;
}

}  // namespace

double estimate_exchangeable_rho(const PanelData& panel, const VectorXd& beta) {
    double pair_sum = 0.0;
    double pair_count = 0.0;
    for (const auto& c : panel.clusters) {
        const long ni = c.X.rows();
        if (ni < 2) continue;
        VectorXd e(ni);
        for (long t = 0; t < ni; ++t) {
            const Marginal m = marginal_at(panel.family, c.X.row(t).dot(beta));
            e(t) = (c.Y(t) - m.mu) / std::sqrt(m.var);
        }
        for (long t = 0; t < ni; ++t)
            for (long s = t + 1; s < ni; ++s) pair_sum += e(t) * e(s);
        pair_count += 0.5 * ni * (ni - 1);
    }
    if (pair_count == 0.0)
        throw SpecError("estimate_exchangeable_rho: no cluster of size >= 2");
    return pair_sum / pair_count;
}

GeeFit gee_fit(const PanelData& panel, CorStructure corstr, double tol, long max_iter) {
    const long p = panel.p();
    const long max_size = panel.max_cluster_size();
    const bool exchangeable = corstr == CorStructure::Exchangeable && max_size > 1;

    GeeFit fit;
    fit.beta = VectorXd::Zero(p);
    double rho = 0.0;

    for (long it = 1; it <= max_iter; ++it) {
        MatrixXd info = MatrixXd::Zero(p, p);
        VectorXd score = VectorXd::Zero(p);
        for (const auto& c : panel.clusters) {
            const long ni = c.X.rows();
            MatrixXd D(p, ni);       // d mu / d beta, column t
            VectorXd resid(ni);      // y - mu
            VectorXd sd(ni);         // working standard deviations
            for (long t = 0; t < ni; ++t) {
                const Marginal m = marginal_at(panel.family, c.X.row(t).dot(fit.beta));
                D.col(t) = m.dmu * c.X.row(t).transpose();
                resid(t) = c.Y(t) - m.mu;
                sd(t) = std::sqrt(m.var);
            }
            // V^{-1} = A^{-1/2} R(rho)^{-1} A^{-1/2} with the closed-form
            // exchangeable inverse R^{-1} = (I - rho/(1+(ni-1)rho) J)/(1-rho).
            const VectorXd std_resid = resid.cwiseQuotient(sd);
            MatrixXd DA = D * sd.cwiseInverse().asDiagonal();  // p x ni
            VectorXd u;
            MatrixXd W;
            if (!exchangeable || ni == 1 || rho == 0.0) {
                u = std_resid;
                W = DA.transpose();
            } else {
                const double denom = 1.0 + (ni - 1) * rho;
                const double c1 = 1.0 / (1.0 - rho);
                const double c2 = rho / ((1.0 - rho) * denom);
                u = c1 * std_resid - (c2 * std_resid.sum()) * VectorXd::Ones(ni);
                W = (c1 * DA - c2 * (DA.rowwise().sum()) * Eigen::RowVectorXd::Ones(ni)).transpose();
            }
            score += DA * u;
            info += DA * W;
        }
        const VectorXd delta = info.ldlt().solve(score);
        fit.beta += delta;
        fit.iterations = it;
        if (exchangeable) {
            double r = estimate_exchangeable_rho(panel, fit.beta);
            const double lo = rho_lower_bound(max_size) * (1.0 - 1e-6);
            const double hi = 1.0 - 1e-6;
            if (r < lo || r > hi) fit.rho_clamped = true;
            rho = std::clamp(r, lo, hi);
        }
        if (delta.lpNorm<Eigen::Infinity>() < tol) {
            fit.converged = true;
            break;
        }
        if (it == max_iter) throw ConvergenceError("gee_fit: no convergence");
    }
    if (exchangeable) fit.rho = rho;

    // Naive covariance from the converged working information.
    MatrixXd info = MatrixXd::Zero(p, p);
    for (const auto& c : panel.clusters) {
        const long ni = c.X.rows();
        MatrixXd D(p, ni);
        VectorXd sd(ni);
        for (long t = 0; t < ni; ++t) {
            const Marginal m = marginal_at(panel.family, c.X.row(t).dot(fit.beta));
            D.col(t) = m.dmu * c.X.row(t).transpose();
            sd(t) = std::sqrt(m.var);
        }
        MatrixXd DA = D * sd.cwiseInverse().asDiagonal();
        if (!fit.rho || ni == 1) {
            info += DA * DA.transpose();
        } else {
            const double r = *fit.rho;
            const double denom = 1.0 + (ni - 1) * r;
            const double c1 = 1.0 / (1.0 - r);
            const double c2 = r / ((1.0 - r) * denom);
            info += DA * (c1 * DA - c2 * DA.rowwise().sum() * Eigen::RowVectorXd::Ones(ni))
                             .transpose();
        }
    }
    fit.naive_cov = info.ldlt().solve(MatrixXd::Identity(p, p));
    fit.robust_cov = lz_cov(fit, panel).matrix;
    return fit;
}

CovEstimate lz_cov(const GeeFit& fit, const PanelData& panel) {
    const long p = panel.p();
    MatrixXd bread = MatrixXd::Zero(p, p);
    MatrixXd meat = MatrixXd::Zero(p, p);
    const double rho = fit.rho.value_or(0.0);
    for (const auto& c : panel.clusters) {
        const long ni = c.X.rows();
        MatrixXd D(p, ni);
        VectorXd resid(ni), sd(ni);
        for (long t = 0; t < ni; ++t) {
            const Marginal m = marginal_at(panel.family, c.X.row(t).dot(fit.beta));
            D.col(t) = m.dmu * c.X.row(t).transpose();
            resid(t) = c.Y(t) - m.mu;
            sd(t) = std::sqrt(m.var);
        }
        MatrixXd DA = D * sd.cwiseInverse().asDiagonal();
        const VectorXd std_resid = resid.cwiseQuotient(sd);
        VectorXd u;
        MatrixXd W;
        if (rho == 0.0 || ni == 1) {
            u = std_resid;
            W = DA.transpose();
        } else {
            const double denom = 1.0 + (ni - 1) * rho;
            const double c1 = 1.0 / (1.0 - rho);
            const double c2 = rho / ((1.0 - rho) * denom);
            u = c1 * std_resid - (c2 * std_resid.sum()) * VectorXd::Ones(ni);
            W = (c1 * DA - c2 * DA.rowwise().sum() * Eigen::RowVectorXd::Ones(ni)).transpose();
        }
        const VectorXd g = DA * u;  // cluster score
        meat += g * g.transpose();
        bread += DA * W;
    }
    const MatrixXd binv = bread.ldlt().solve(MatrixXd::Identity(p, p));
    return CovEstimate::from_matrix(binv * meat * binv, CovEstimate::Kind::Cluster);
}

}  // namespace lmx
