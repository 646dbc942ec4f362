#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmx/errors.hpp"
#include "lmx/linalg.hpp"
#include "lmx/rng.hpp"

using namespace lmx;

namespace {
MatrixXd random_matrix(long n, long p, Rng& rng) {
    MatrixXd X(n, p);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < p; ++j) X(i, j) = rng.normal();
    return X;
}
}  // namespace

TEST_CASE("gram_schmidt_qr identity and orthogonal columns") {
    const MatrixXd I2 = MatrixXd::Identity(2, 2);
    const QRFactors qr = gram_schmidt_qr(I2);
    CHECK((qr.Q - I2).norm() < 1e-14);
    CHECK((qr.R - I2).norm() < 1e-14);

    MatrixXd X(2, 2);
    X << 1, 1, 1, -1;
    const QRFactors qr2 = gram_schmidt_qr(X);
    CHECK((qr2.Q - X / std::sqrt(2.0)).norm() < 1e-14);
    CHECK((qr2.R - std::sqrt(2.0) * MatrixXd::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("gram_schmidt_qr reconstruction oracle") {
    Rng rng(11);
    const MatrixXd X = random_matrix(5, 3, rng);
    const QRFactors qr = gram_schmidt_qr(X);
    CHECK((qr.Q * qr.R - X).norm() < 1e-12);
    CHECK((qr.Q.transpose() * qr.Q - MatrixXd::Identity(3, 3)).norm() < 1e-12);
    for (long j = 0; j < 3; ++j) CHECK(qr.R(j, j) > 0.0);
}

TEST_CASE("gram_schmidt_qr rank deficiency") {
    MatrixXd X(4, 3);
    Rng rng(5);
    X.col(0) = random_matrix(4, 1, rng);
    X.col(1) = random_matrix(4, 1, rng);
    X.col(2) = 2.0 * X.col(0) - X.col(1);
    CHECK_THROWS_AS(gram_schmidt_qr(X), RankDeficientError);
}

TEST_CASE("QR uniqueness under column permutation round trip") {
    Rng rng(23);
    const MatrixXd X = random_matrix(20, 4, rng);
    const QRFactors a = gram_schmidt_qr(X);
    // Permute columns, factor, and reconstruct the original factor.
    MatrixXd Xp(20, 4);
    const std::vector<long> perm = {2, 0, 3, 1};
    for (long j = 0; j < 4; ++j) Xp.col(j) = X.col(perm[j]);
    const QRFactors b = gram_schmidt_qr(Xp);
    CHECK((b.Q * b.R - Xp).norm() < 1e-8);
    // Uniqueness: factoring the reconstructed X again matches a.
    const QRFactors c = gram_schmidt_qr(b.Q * b.R * [&] {
        MatrixXd P = MatrixXd::Zero(4, 4);
        for (long j = 0; j < 4; ++j) P(j, perm[j]) = 1.0;
        return P;
    }());
    CHECK((c.Q - a.Q).norm() < 1e-8);
    CHECK((c.R - a.R).norm() < 1e-8);
}

TEST_CASE("back_solve") {
    MatrixXd I = MatrixXd::Identity(2, 2);
    VectorXd b(2);
    b << 3, 1;
    CHECK((back_solve(I, b) - b).norm() < 1e-15);

    MatrixXd R(2, 2);
    R << 2, 1, 0, 1;
    const VectorXd x = back_solve(R, b);
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK(x(1) == doctest::Approx(1.0));

    R(1, 1) = 0.0;
    CHECK_THROWS_AS(back_solve(R, b), SingularError);
}

TEST_CASE("hat_diagonals") {
    // Intercept-only design: h_i = 1/n.
    const MatrixXd ones = MatrixXd::Ones(4, 1);
    const VectorXd h = hat_diagonals(gram_schmidt_qr(ones));
    for (long i = 0; i < 4; ++i) CHECK(h(i) == doctest::Approx(0.25).epsilon(1e-14));

    // Group dummies: h_i = 1 / group size.
    MatrixXd G = MatrixXd::Zero(7, 2);
    G.col(0).head(3).setOnes();   // group of 3
    G.col(1).tail(4).setOnes();   // group of 4
    const VectorXd hg = hat_diagonals(gram_schmidt_qr(G));
    for (long i = 0; i < 3; ++i) CHECK(hg(i) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    for (long i = 3; i < 7; ++i) CHECK(hg(i) == doctest::Approx(0.25).epsilon(1e-12));

    // Trace equals p; intercept design bounds 1/n <= h_i <= 1.
    Rng rng(7);
    MatrixXd X(30, 4);
    X.col(0).setOnes();
    for (long i = 0; i < 30; ++i)
        for (long j = 1; j < 4; ++j) X(i, j) = rng.normal();
    const VectorXd hx = hat_diagonals(gram_schmidt_qr(X));
    CHECK(hx.sum() == doctest::Approx(4.0).epsilon(1e-10));
    for (long i = 0; i < 30; ++i) {
        CHECK(hx(i) >= 1.0 / 30 - 1e-12);
        CHECK(hx(i) <= 1.0 + 1e-12);
    }
}

TEST_CASE("thin_svd") {
    const MatrixXd D = VectorXd{{3.0, 1.0}}.asDiagonal().toDenseMatrix();
    const SVDFactors f = thin_svd(D);
    CHECK(f.d(0) == doctest::Approx(3.0));
    CHECK(f.d(1) == doctest::Approx(1.0));

    Rng rng(3);
    VectorXd u(6), v(3);
    for (long i = 0; i < 6; ++i) u(i) = rng.normal();
    for (long j = 0; j < 3; ++j) v(j) = rng.normal();
    const SVDFactors r1 = thin_svd(u * v.transpose());
    CHECK(r1.rank() == 1);
    CHECK(r1.d(0) == doctest::Approx(u.norm() * v.norm()).epsilon(1e-12));

    MatrixXd X(6, 3);
    for (long i = 0; i < 6; ++i)
        for (long j = 0; j < 3; ++j) X(i, j) = rng.normal();
    const SVDFactors f2 = thin_svd(X);
    const MatrixXd rec = f2.U * f2.d.asDiagonal() * f2.V.transpose();
    CHECK((rec - X).norm() < 1e-10);
    CHECK((f2.U.transpose() * f2.U - MatrixXd::Identity(3, 3)).norm() < 1e-10);
    CHECK((f2.V.transpose() * f2.V - MatrixXd::Identity(3, 3)).norm() < 1e-10);

    // Transpose has the same singular values.
    const SVDFactors ft = thin_svd(X.transpose());
    CHECK((f2.d - ft.d).lpNorm<Eigen::Infinity>() < 1e-10);

    // Zero matrix has rank zero.
    CHECK(thin_svd(MatrixXd::Zero(4, 2)).rank() == 0);
}

TEST_CASE("center_columns") {
    MatrixXd X(3, 1);
    X << 1, 2, 3;
    const MatrixXd C = center_columns(X);
    CHECK(C(0, 0) == doctest::Approx(-1.0));
    CHECK(C(1, 0) == doctest::Approx(0.0));
    CHECK(C(2, 0) == doctest::Approx(1.0));
    CHECK((center_columns(C) - C).norm() < 1e-14);

    Rng rng(9);
    MatrixXd Z(10, 2);
    for (long i = 0; i < 10; ++i)
        for (long j = 0; j < 2; ++j) Z(i, j) = rng.normal(3.0, 2.0);
    const MatrixXd Zc = center_columns(Z);
    CHECK(std::fabs(Zc.col(0).mean()) < 1e-14);
    CHECK(std::fabs(Zc.col(1).mean()) < 1e-14);
}
