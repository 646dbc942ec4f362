#ifndef LMX_GEE_HPP
#define LMX_GEE_HPP

#include <optional>

#include "lmx/glm.hpp"

namespace lmx {

struct Cluster {
    MatrixXd X;
    VectorXd Y;
};

struct PanelData {
    std::vector<Cluster> clusters;
    GlmFamily family;  // linear, logistic, or poisson marginal model

    long total_rows() const;
    long p() const { return clusters.empty() ? 0 : clusters.front().X.cols(); }
    long max_cluster_size() const;
};

// Group a pooled model matrix by its cluster ids (first-appearance order).
PanelData make_panel(const ModelMatrix& mm, const GlmFamily& family);

enum class CorStructure { Independence, Exchangeable };

struct GeeFit {
    VectorXd beta;
    std::optional<double> rho;  // exchangeable working correlation
    MatrixXd naive_cov;         // (sum D V^{-1} D')^{-1}
    MatrixXd robust_cov;        // Liang-Zeger
    long iterations = 0;
    bool converged = false;
    bool rho_clamped = false;
    std::vector<std::string> column_names;
};

GeeFit gee_fit(const PanelData& panel, CorStructure corstr, double tol = 1e-8,
               long max_iter = 100);

CovEstimate lz_cov(const GeeFit& fit, const PanelData& panel);

// Moment estimator: mean pairwise product of working-standardized
// residuals over all within-cluster pairs.
double estimate_exchangeable_rho(const PanelData& panel, const VectorXd& beta);

}  // namespace lmx

#endif
