#ifndef LMX_ROBUST_HPP
#define LMX_ROBUST_HPP

#include <string>

#include "lmx/ols.hpp"

namespace lmx {

struct CovEstimate {
    MatrixXd matrix;
    enum class Kind {
        Classic,
        HC0,
        HC1,
        HC2,
        HC3,
        HC4,
        WlsSandwich,
        Cluster,
        Sandwich,
        Jackknife,
        Powell,
        Bootstrap
    } kind = Kind::Classic;
    VectorXd se;  // sqrt of the diagonal

    static CovEstimate from_matrix(MatrixXd m, Kind kind);
};

std::string cov_kind_name(CovEstimate::Kind kind);

// Classic sigma2 (X'X)^{-1}.
CovEstimate classic_covariance(const OlsFit& fit);

// HC0-HC4 with the residual rescalings:
//   hc0 raw, hc1 *sqrt(n/(n-p)), hc2 /sqrt(1-h), hc3 /(1-h),
//   hc4 /(1-h)^{min(2, n h_i / (2p))}.
CovEstimate hc_covariance(const OlsFit& fit, CovEstimate::Kind kind);

struct WlsFit {
    VectorXd beta_w;
    VectorXd residuals_w;  // y - x' beta_w on the original scale
    VectorXd weights;
    VectorXd hat_w_diag;  // leverages of the sqrt(w)-scaled design
    MatrixXd X;
    std::vector<std::string> column_names;
    double sigma2_w = 0.0;  // weighted RSS / (n - p)
    MatrixXd xtwx_inv;      // (X' W X)^{-1}

    long n() const { return X.rows(); }
    long p() const { return X.cols(); }
};

// WLS as OLS on sqrt(w)-scaled rows.
WlsFit wls_fit(const ModelMatrix& mm);

// (sum w x x')^{-1} (sum w^2 e^2 x x') (sum w x x')^{-1}.
CovEstimate wls_sandwich(const WlsFit& fit);

struct FglsFit {
    WlsFit wls;
    VectorXd variance_model_coef;  // OLS of log(e^2) on X
};

// Two-step feasible GLS: log squared residuals regressed on X, then WLS
// with weights exp(-fitted log-variance). Squared residuals are floored
// at 1e-12 * sigma2_hat before taking logs.
FglsFit fgls_fit(const ModelMatrix& mm);

}  // namespace lmx

#endif
