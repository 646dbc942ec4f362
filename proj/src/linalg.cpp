#include "lmx/linalg.hpp"

#include <Eigen/SVD>

#include "lmx/errors.hpp"

namespace lmx {

QRFactors gram_schmidt_qr(const MatrixXd& X) {
    const Eigen::Index n = X.rows(), p = X.cols();
    MatrixXd Q(n, p);
    MatrixXd R = MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double col_norm = X.col(j).norm();
        VectorXd v = X.col(j);
        for (Eigen::Index k = 0; k < j; ++k) {
            const double r = Q.col(k).dot(v);
            v -= r * Q.col(k);
            R(k, j) += r;
        }
        // Second pass recovers orthogonality lost to cancellation.
        for (Eigen::Index k = 0; k < j; ++k) {
            const double c = Q.col(k).dot(v);
            v -= c * Q.col(k);
            R(k, j) += c;
        }
        const double pivot = v.norm();
        if (pivot <= kRankTol * col_norm) throw RankDeficientError(j);
        R(j, j) = pivot;
        Q.col(j) = v / pivot;
    }
    return {std::move(Q), std::move(R)};
}

VectorXd back_solve(const MatrixXd& R, const VectorXd& b) {
    const Eigen::Index p = R.rows();
    VectorXd x(p);
    for (Eigen::Index i = p - 1; i >= 0; --i) {
        if (R(i, i) == 0.0) throw SingularError("back_solve: zero diagonal at " + std::to_string(i));
        double s = b(i);
        for (Eigen::Index j = i + 1; j < p; ++j) s -= R(i, j) * x(j);
        x(i) = s / R(i, i);
    }
    return x;
}

VectorXd hat_diagonals(const QRFactors& qr) { return qr.Q.rowwise().squaredNorm(); }

SVDFactors thin_svd(const MatrixXd& X) {
    // Jacobi for small problems, divide-and-conquer otherwise.
    MatrixXd U, V;
    VectorXd sv;
    if (X.rows() <= 32 || X.cols() <= 32) {
        Eigen::JacobiSVD<MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
        U = svd.matrixU();
        V = svd.matrixV();
        sv = svd.singularValues();
    } else {
        Eigen::BDCSVD<MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
        U = svd.matrixU();
        V = svd.matrixV();
        sv = svd.singularValues();
    }
    Eigen::Index r = 0;
    const double tol = sv.size() > 0 ? kRankTol * sv(0) : 0.0;
    while (r < sv.size() && sv(r) > tol) ++r;
    return {U.leftCols(r), sv.head(r), V.leftCols(r)};
}

MatrixXd center_columns(const MatrixXd& X) {
    return X.rowwise() - X.colwise().mean();
}

MatrixXd xtx_inverse_from_r(const MatrixXd& R) {
    const Eigen::Index p = R.rows();
    // Columns of R^{-1} by back substitution on unit vectors.
    MatrixXd Rinv(p, p);
    for (Eigen::Index j = 0; j < p; ++j) Rinv.col(j) = back_solve(R, VectorXd::Unit(p, j));
    return Rinv * Rinv.transpose();
}

}  // namespace lmx
