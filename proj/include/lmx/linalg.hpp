#ifndef LMX_LINALG_HPP
#define LMX_LINALG_HPP

#include <Eigen/Dense>

namespace lmx {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Rank tolerance used for QR pivots and SVD truncation, relative to the
// leading column norm / leading singular value.
constexpr double kRankTol = 1e-10;

struct QRFactors {
    MatrixXd Q;  // n x p, orthonormal columns
    MatrixXd R;  // p x p, upper triangular, positive diagonal
};

struct SVDFactors {
    MatrixXd U;  // n x r
    VectorXd d;  // r singular values, nonincreasing
    MatrixXd V;  // p x r
    Eigen::Index rank() const { return d.size(); }
};

// Modified Gram-Schmidt with one re-orthogonalization pass. Throws
// RankDeficientError(j) when column j's pivot norm falls below
// kRankTol times its original norm.
QRFactors gram_schmidt_qr(const MatrixXd& X);

// Solve R x = b for upper-triangular R. Throws SingularError on a zero
// diagonal entry.
VectorXd back_solve(const MatrixXd& R, const VectorXd& b);

// Leverages h_i = squared length of row i of Q.
VectorXd hat_diagonals(const QRFactors& qr);

// Thin SVD truncated at numerical rank (d_k > kRankTol * d_1).
SVDFactors thin_svd(const MatrixXd& X);

// Subtract column means.
MatrixXd center_columns(const MatrixXd& X);

// (X^T X)^{-1} from the R factor, as R^{-1} R^{-T}.
MatrixXd xtx_inverse_from_r(const MatrixXd& R);

}  // namespace lmx

#endif
