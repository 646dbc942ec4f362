#ifndef LMX_OLS_HPP
#define LMX_OLS_HPP

#include <optional>
#include <string>
#include <vector>

#include "lmx/dataset.hpp"
#include "lmx/linalg.hpp"

namespace lmx {

struct TestResult {
    double statistic = 0.0;
    double df1 = 0.0;
    std::optional<double> df2;  // absent = asymptotic (chisq / normal)
    double p_value = 1.0;
    enum class Kind { T, F, ChiSq, Normal } kind = Kind::T;
};

struct PredictionResult {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.95;
    enum class Kind { Mean, Observation } kind = Kind::Mean;
};

struct OlsFit {
    VectorXd beta;
    VectorXd fitted;
    VectorXd residuals;
    double sigma2_hat = 0.0;  // RSS / (n - p)
    long df_residual = 0;
    MatrixXd xtx_inv;
    VectorXd leverage;
    double r2 = 0.0;       // NaN without an intercept
    double adj_r2 = 0.0;
    std::vector<std::string> column_names;
    MatrixXd X;  // kept for covariance and leave-one-out work
    bool has_intercept = false;

    long n() const { return X.rows(); }
    long p() const { return X.cols(); }
    double rss() const { return residuals.squaredNorm(); }
    VectorXd y() const { return fitted + residuals; }
};

// Restricted OLS under C beta = r.
struct RestrictedFit {
    VectorXd beta_r;
    VectorXd fitted;
    VectorXd residuals;
    double sigma2_r = 0.0;             // RSS_r / (n - p + l)
    double sigma2_unrestricted = 0.0;  // from the unrestricted fit
    long df_residual = 0;              // n - p + l
};

struct FwlResult {
    VectorXd beta2;
    MatrixXd x2_tilde;
    VectorXd y_tilde;
};

struct CochranResult {
    VectorXd beta_short2;  // Y ~ X2 coefficients
    VectorXd beta_long2;   // X2 block of Y ~ (X1, X2)
    MatrixXd delta_hat;    // column-wise fit of X1 on X2, p2 x p1
    double identity_gap = 0.0;
};

OlsFit fit_ols(const ModelMatrix& mm);
OlsFit fit_ols(const MatrixXd& X, const VectorXd& Y,
               std::vector<std::string> column_names = {});

// Inference for c' beta: t statistic, two-sided p, and the level CI.
std::pair<TestResult, std::pair<double, double>> t_inference(const OlsFit& fit, const VectorXd& c,
                                                             double level = 0.95);

TestResult wald_f_test(const OlsFit& fit, const MatrixXd& C, const VectorXd& r);

TestResult anova_f(const OlsFit& fit_short, const OlsFit& fit_long);

std::pair<double, double> r_squared(const OlsFit& fit);

PredictionResult predict(const OlsFit& fit, const VectorXd& x_new, PredictionResult::Kind kind,
                         double level = 0.95);

// FWL partial regression: split holds the X2 column indices.
FwlResult fwl_partial(const ModelMatrix& mm, const std::vector<long>& split);

CochranResult cochran_decompose(const VectorXd& Y, const MatrixXd& X1, const MatrixXd& X2);

RestrictedFit restricted_fit(const ModelMatrix& mm, const MatrixXd& C, const VectorXd& r);

}  // namespace lmx

#endif
