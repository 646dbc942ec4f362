#include "lmx/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "lmx/dist.hpp"
#include "lmx/errors.hpp"

namespace lmx {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Positive-definite solve; LDLT alone accepts semidefinite matrices.
Eigen::LDLT<MatrixXd> pd_ldlt(const MatrixXd& M, const char* who) {
    Eigen::LDLT<MatrixXd> ldlt(M);
    const double scale = M.diagonal().cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * std::max(scale, 1e-300))
        throw SingularError(std::string(who) + ": singular information matrix");
    return ldlt;
}
}

void SurvData::validate() const {
    if (time.size() == 0) throw SpecError("survival: empty data");
    if (event.size() != time.size()) throw SpecError("survival: time/event size mismatch");
    for (Eigen::Index i = 0; i < time.size(); ++i) {
        if (!(time(i) > 0.0)) throw SpecError("survival: times must be positive");
        if (event(i) != 0.0 && event(i) != 1.0) throw SpecError("survival: event must be 0/1");
    }
    if (event.sum() < 1.0) throw SpecError("survival: no events observed");
}

double KmCurve::survival_at(double t) const {
    double s = 1.0;
    for (size_t k = 0; k < times.size(); ++k) {
        if (times[k] <= t)
            s = surv[k];
        else
            break;
    }
    return s;
}

KmCurve km_fit(const SurvData& data, double conf_level) {
    data.validate();
    const long n = data.time.size();
    std::set<double> failure_times;
    for (long i = 0; i < n; ++i)
        if (data.event(i) == 1.0) failure_times.insert(data.time(i));

    KmCurve km;
    const double z = dist::norm_quantile(1.0 - (1.0 - conf_level) / 2.0);
    double surv = 1.0;
    double gw = 0.0;  // cumulative Greenwood Var{log S}
    for (double t : failure_times) {
        long r = 0, d = 0;
        for (long i = 0; i < n; ++i) {
            if (data.time(i) >= t) ++r;
            if (data.time(i) == t && data.event(i) == 1.0) ++d;
        }
        surv *= 1.0 - static_cast<double>(d) / r;
        gw += (r > d) ? static_cast<double>(d) / (static_cast<double>(r) * (r - d))
                      : std::numeric_limits<double>::infinity();
        km.times.push_back(t);
        km.n_risk.push_back(r);
        km.n_event.push_back(d);
        km.surv.push_back(surv);
        km.greenwood_var_log.push_back(gw);

        if (surv > 0.0 && std::isfinite(gw)) {
            const double se_log = std::sqrt(gw);
            km.ci_log.emplace_back(surv * std::exp(-z * se_log),
                                   std::min(1.0, surv * std::exp(z * se_log)));
            if (surv < 1.0) {
                const double v = std::log(-std::log(surv));
                const double se_v = se_log / std::fabs(std::log(surv));
                km.ci_loglog.emplace_back(std::exp(-std::exp(v + z * se_v)),
                                          std::exp(-std::exp(v - z * se_v)));
            } else {
                km.ci_loglog.emplace_back(kNaN, kNaN);
            }
        } else {
            km.ci_log.emplace_back(kNaN, kNaN);
            km.ci_loglog.emplace_back(kNaN, kNaN);
        }
    }
    return km;
}

TestResult logrank_test(const SurvData& data) {
    data.validate();
    const long n = data.time.size();
    if (static_cast<long>(data.group.size()) != n)
        throw SpecError("logrank_test: group labels required");
    std::set<std::string> labels(data.group.begin(), data.group.end());
    if (labels.size() != 2) throw SpecError("logrank_test: need exactly two groups");
    const std::string g1 = *labels.begin();

    std::set<double> failure_times;
    for (long i = 0; i < n; ++i)
        if (data.event(i) == 1.0) failure_times.insert(data.time(i));

    double observed_minus_expected = 0.0;
    double variance = 0.0;
    for (double t : failure_times) {
        long r = 0, r1 = 0, d = 0, d1 = 0;
        for (long i = 0; i < n; ++i) {
            if (data.time(i) >= t) {
                ++r;
                if (data.group[i] == g1) ++r1;
            }
            if (data.time(i) == t && data.event(i) == 1.0) {
                ++d;
                if (data.group[i] == g1) ++d1;
            }
        }
        const double frac = static_cast<double>(r1) / r;
        observed_minus_expected += d1 - d * frac;
        // Hypergeometric variance accommodates tied failures.
        if (r > 1) variance += d * frac * (1.0 - frac) * (r - d) / (r - 1.0);
    }
    if (variance <= 0.0) throw SingularError("logrank_test: zero variance");
    TestResult out;
    out.kind = TestResult::Kind::ChiSq;
    out.df1 = 1;
    out.statistic = observed_minus_expected * observed_minus_expected / variance;
    out.p_value = dist::chisq_upper_p(out.statistic, 1.0);
    return out;
}

namespace {

struct PartialLik {
    double loglik = 0.0;
    VectorXd score;
    MatrixXd info;
};

// One sweep over risk sets, descending in time, with the Efron or
// Breslow within-tie denominators.
PartialLik partial_loglik(const SurvData& data, const VectorXd& beta, CoxTies ties) {
    const long n = data.time.size();
    const long p = data.X.cols();
    std::vector<long> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](long a, long b) { return data.time(a) > data.time(b); });

    PartialLik out;
    out.score = VectorXd::Zero(p);
    out.info = MatrixXd::Zero(p, p);
    double s0 = 0.0;
    VectorXd s1 = VectorXd::Zero(p);
    MatrixXd s2 = MatrixXd::Zero(p, p);

    long pos = 0;
    while (pos < n) {
        const double t = data.time(order[pos]);
        long next = pos;
        // Everyone with y_i == t joins the risk set (censored included).
        std::vector<long> deaths;
        while (next < n && data.time(order[next]) == t) {
            const long i = order[next];
            const double w = std::exp(data.X.row(i).dot(beta));
            s0 += w;
            s1 += w * data.X.row(i).transpose();
            s2 += w * data.X.row(i).transpose() * data.X.row(i);
            if (data.event(i) == 1.0) deaths.push_back(i);
            ++next;
        }
        if (!deaths.empty()) {
            const double d = static_cast<double>(deaths.size());
            double s0D = 0.0;
            VectorXd s1D = VectorXd::Zero(p);
            MatrixXd s2D = MatrixXd::Zero(p, p);
            for (long i : deaths) {
                const double w = std::exp(data.X.row(i).dot(beta));
                s0D += w;
                s1D += w * data.X.row(i).transpose();
                s2D += w * data.X.row(i).transpose() * data.X.row(i);
                out.loglik += data.X.row(i).dot(beta);
                out.score += data.X.row(i).transpose();
            }
            for (long l = 0; l < static_cast<long>(d); ++l) {
                const double f = (ties == CoxTies::Efron) ? l / d : 0.0;
                const double denom = s0 - f * s0D;
                const VectorXd m1 = (s1 - f * s1D) / denom;
                const MatrixXd m2 = (s2 - f * s2D) / denom;
                out.loglik -= std::log(denom);
                out.score -= m1;
                out.info += m2 - m1 * m1.transpose();
            }
        }
        pos = next;
    }
    return out;
}

// True when some event's risk set contains anyone beyond the failures
// themselves (the saturation check needs a nontrivial comparison).
bool has_multi_risk_event(const SurvData& data) {
    for (long k = 0; k < data.time.size(); ++k) {
        if (data.event(k) != 1.0) continue;
        long at_risk = 0, tied_deaths = 0;
        for (long i = 0; i < data.time.size(); ++i) {
            if (data.time(i) >= data.time(k)) ++at_risk;
            if (data.time(i) == data.time(k) && data.event(i) == 1.0) ++tied_deaths;
        }
        if (at_risk > tied_deaths) return true;
    }
    return false;
}

}  // namespace

CoxFit cox_fit(const SurvData& data, CoxTies ties) {
    data.validate();
    const long p = data.X.cols();
    if (p == 0) throw SpecError("cox_fit: no covariates");
    if (data.X.rows() != data.time.size()) throw SpecError("cox_fit: covariate rows mismatch");

    CoxFit fit;
    fit.ties = ties;
    fit.beta = VectorXd::Zero(p);
    PartialLik pl = partial_loglik(data, fit.beta, ties);
    for (long it = 1; it <= 50; ++it) {
        const auto ldlt = pd_ldlt(pl.info, "cox_fit");
        const VectorXd delta = ldlt.solve(pl.score);

        double step = 1.0;
        VectorXd beta_new;
        PartialLik pl_new;
        for (int halving = 0; halving <= 20; ++halving) {
            beta_new = fit.beta + step * delta;
            pl_new = partial_loglik(data, beta_new, ties);
            if (pl_new.loglik >= pl.loglik - 1e-12 * (1.0 + std::fabs(pl.loglik))) break;
            step *= 0.5;
        }
        fit.beta = beta_new;
        pl = pl_new;
        fit.iterations = it;
        if (fit.beta.lpNorm<Eigen::Infinity>() > 1e3)
            throw SeparationError("cox_fit: monotone likelihood, coefficients diverging");
        // A partial likelihood at its upper bound of 1 means a covariate
        // perfectly orders the failures (possible only at beta -> inf when
        // some risk set has competitors).
        if (pl.loglik > -1e-6 && has_multi_risk_event(data))
            throw SeparationError("cox_fit: monotone likelihood, a covariate orders failures");
        if (pl.score.lpNorm<Eigen::Infinity>() < 1e-8) {
            fit.converged = true;
            break;
        }
        if (it == 50) throw ConvergenceError("cox_fit: no convergence in 50 iterations");
    }
    fit.loglik = pl.loglik;
    fit.information = pl.info;
    fit.score_test = cox_score_test(data, ties);
    for (long j = 0; j < p; ++j) fit.column_names.push_back("x" + std::to_string(j));
    return fit;
}

TestResult cox_score_test(const SurvData& data, CoxTies ties) {
    data.validate();
    const long p = data.X.cols();
    const PartialLik pl = partial_loglik(data, VectorXd::Zero(p), ties);
    const auto ldlt = pd_ldlt(pl.info, "cox_score_test");
    TestResult out;
    out.kind = TestResult::Kind::ChiSq;
    out.df1 = static_cast<double>(p);
    out.statistic = pl.score.dot(ldlt.solve(pl.score));
    out.p_value = dist::chisq_upper_p(out.statistic, out.df1);
    return out;
}

}  // namespace lmx
