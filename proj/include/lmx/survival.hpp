#ifndef LMX_SURVIVAL_HPP
#define LMX_SURVIVAL_HPP

#include <optional>

#include "lmx/ols.hpp"

namespace lmx {

struct SurvData {
    VectorXd time;   // y_i = min(T_i, C_i), positive
    VectorXd event;  // delta_i, 1 = failure
    std::vector<std::string> group;  // optional two-sample labels
    MatrixXd X;                      // optional covariates, no intercept column

    void validate() const;
};

struct KmCurve {
    std::vector<double> times;   // distinct failure times, ascending
    std::vector<long> n_risk;
    std::vector<long> n_event;
    std::vector<double> surv;
    std::vector<double> greenwood_var_log;  // Var{log S}, cumulative
    // Confidence bands; NaN marks undefined entries (S = 0 tail).
    std::vector<std::pair<double, double>> ci_log;
    std::vector<std::pair<double, double>> ci_loglog;

    // Right-continuous step evaluation.
    double survival_at(double t) const;
};

enum class CoxTies { Efron, Breslow };

struct CoxFit {
    VectorXd beta;
    double loglik = 0.0;
    MatrixXd information;  // minus Hessian at beta
    TestResult score_test;
    bool converged = false;
    long iterations = 0;
    CoxTies ties = CoxTies::Efron;
    std::vector<std::string> column_names;
};

KmCurve km_fit(const SurvData& data, double conf_level = 0.95);

TestResult logrank_test(const SurvData& data);

// Newton on the partial likelihood; ties default to the Efron
// correction (Breslow available).
CoxFit cox_fit(const SurvData& data, CoxTies ties = CoxTies::Efron);

// U(0)' I(0)^{-1} U(0), chi-squared on p degrees of freedom.
TestResult cox_score_test(const SurvData& data, CoxTies ties = CoxTies::Efron);

}  // namespace lmx

#endif
