#ifndef LMX_SHRINKAGE_HPP
#define LMX_SHRINKAGE_HPP

#include <vector>

#include "lmx/dataset.hpp"
#include "lmx/ols.hpp"

namespace lmx {

// Ridge on standardized data, solved once from the SVD for every lambda:
// beta(lambda) = V diag(d_j / (d_j^2 + lambda)) U' Y.
struct RidgePath {
    std::vector<double> lambdas;
    MatrixXd coefs;            // p x L, standardized scale
    VectorXd df;               // sum d_j^2 / (d_j^2 + lambda)
    VectorXd gcv;              // sum e^2 / (1 - tr(H)/n)^2
    VectorXd press;            // sum (e_i / (1 - h_i))^2
    VectorXd intercept_back;   // original-scale intercept per lambda
    // Factors retained for leave-one-out work.
    SVDFactors svd;
    VectorXd Y;
};

struct RidgeTuning {
    double gcv_lambda = 0.0;
    double hkb_lambda = 0.0;  // p sigma2 / |beta|^2
    double lw_lambda = 0.0;   // p sigma2 / (beta' D^2 beta)
};

struct LassoPath {
    std::vector<double> lambdas;  // decreasing
    MatrixXd coefs;               // p x L
    double alpha = 0.0;           // 0 = pure lasso, 1 = pure ridge
    std::vector<long> n_iter;
    std::vector<bool> converged;
};

struct CvResult {
    LassoPath path;            // full-data path on the CV grid
    VectorXd cv_errors;        // mean held-out squared error per lambda
    double lambda_min = 0.0;
};

RidgePath ridge_path(const ModelMatrix& mm_std, const std::vector<double>& lambdas);

// fit0: OLS on the same standardized data; required for HKB/LW (n > p).
RidgeTuning ridge_tune(const RidgePath& path, const OlsFit& fit0);
double ridge_gcv_lambda(const RidgePath& path);

// Per-lambda predicted residuals e_i(lambda) / (1 - h_i(lambda)).
MatrixXd ridge_loo(const RidgePath& path);

double soft_threshold(double b0, double lam);

struct EnetOptions {
    double tol = 1e-7;
    long max_sweeps = 100000;
};

struct EnetResult {
    VectorXd beta;
    long sweeps = 0;
    bool converged = false;
};

// Coordinate descent for (2n)^{-1} RSS + lambda sum{alpha b^2/2 + (1-alpha)|b|}
// on standardized data: b_j <- S(z_j, lambda(1-alpha)) / (v_j + lambda alpha).
// warm, when given, seeds the iterate.
EnetResult enet_cd_result(const MatrixXd& X, const VectorXd& Y, double lambda, double alpha,
                          const EnetOptions& opts = {}, const VectorXd* warm = nullptr);

// As above but throws ConvergenceError when the sweep budget runs out.
VectorXd enet_cd(const MatrixXd& X, const VectorXd& Y, double lambda, double alpha,
                 const EnetOptions& opts = {}, const VectorXd* warm = nullptr);

// Smallest lambda with an all-zero solution.
double lasso_lambda_max(const MatrixXd& X, const VectorXd& Y, double alpha);

// K-fold CV over a log-spaced grid from lambda_max down four decades,
// warm starts within each fold; ties in the argmin go to the smaller
// lambda. Data are standardized per training fold.
CvResult cv_path(const ModelMatrix& mm, double alpha, long K, std::uint64_t seed,
                 long n_lambda = 100);

}  // namespace lmx

#endif
