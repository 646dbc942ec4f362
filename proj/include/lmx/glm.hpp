#ifndef LMX_GLM_HPP
#define LMX_GLM_HPP

#include <optional>

#include "lmx/ols.hpp"
#include "lmx/robust.hpp"

namespace lmx {

enum class Link { Logit, Probit, Cauchit, Cloglog };

// Identity-link linear is carried along for the marginal-model machinery
// (unit working variance).
struct GlmFamily {
    enum class Kind { Linear, Binary, Poisson, NegBin } kind = Kind::Binary;
    Link link = Link::Logit;
    // NB dispersion: estimate when absent.
    std::optional<double> theta;

    static GlmFamily linear();
    static GlmFamily binary(Link link);
    static GlmFamily poisson();
    static GlmFamily negbin();                 // theta estimated
    static GlmFamily negbin_fixed(double theta);
};

GlmFamily parse_family(const std::string& name);

// Mean function g(z) and derivative g'(z) for a binary link.
std::pair<double, double> link_eval(Link link, double z);

struct GlmFit {
    GlmFamily family;
    VectorXd beta;
    std::optional<double> theta;     // NB dispersion
    std::optional<double> theta_se;
    VectorXd fitted_mean;
    VectorXd working_weights;  // IRLS / Fisher-scoring weights at convergence
    MatrixXd fisher_info;      // X' W X
    double deviance = 0.0;       // -2 loglik at beta
    double null_deviance = 0.0;  // intercept-only refit
    double aic = 0.0;
    long iterations = 0;
    bool converged = false;
    bool poisson_fallback = false;  // NB theta hit the cap
    MatrixXd X;
    VectorXd Y;
    std::vector<std::string> column_names;

    long n() const { return X.rows(); }
    long p() const { return X.cols(); }
};

GlmFit glm_fit(const GlmFamily& family, const ModelMatrix& mm);
GlmFit glm_fit(const GlmFamily& family, const MatrixXd& X, const VectorXd& Y,
               std::vector<std::string> column_names = {});

// Alternates Fisher scoring for beta (weights (1 + mu/theta)^{-1}) with
// profile Newton for theta on the log scale.
GlmFit negbin_fit(const ModelMatrix& mm);
GlmFit negbin_fit(const MatrixXd& X, const VectorXd& Y,
                  std::vector<std::string> column_names = {});

// Inverse Fisher information (X' W X)^{-1}; for NB the theta block is
// carried in GlmFit::theta_se.
CovEstimate glm_model_cov(const GlmFit& fit);

// B^{-1} M B^{-1} / n with the quasi-score meat.
CovEstimate glm_sandwich(const GlmFit& fit);

struct DevianceReport {
    double deviance = 0.0;
    double null_deviance = 0.0;
    TestResult lr_test;  // chisq on p - 1 df
    double aic = 0.0;
};

DevianceReport deviance_aic(const GlmFit& fit);

// Delta-method mean prediction; response_scale applies g and scales the
// standard error by g'.
std::pair<double, double> glm_predict(const GlmFit& fit, const VectorXd& x_new,
                                      bool response_scale);

}  // namespace lmx

#endif
