#pragma once

// Dense kernels shared by every other module. All matrices are Eigen dense
// doubles; functions here are pure and never keep state.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fdi/errors.hpp"

namespace fdi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

inline constexpr double kDefaultRankTol = 1e-9;

template<typename Derived>
[[nodiscard]] bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

template<typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const std::string& what) {
    if (!m.allFinite()) {
        throw NumericError(what + ": non-finite entry");
    }
}

// Largest absolute entry; the vector infinity norm.
template<typename Derived>
[[nodiscard]] double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Induced infinity norm (max absolute row sum).
template<typename Derived>
[[nodiscard]] double inf_norm(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

[[nodiscard]] inline Matrix block_diagonal(const std::vector<Matrix>& blocks) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix out = Matrix::Zero(rows, cols);
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

/// Matrix exponential by scaling and squaring around a degree-13 Pade
/// approximant (Higham 2005 coefficients). The scaling exponent is chosen so
/// that the scaled 1-norm falls below theta_13.
[[nodiscard]] inline Matrix expm(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("expm: matrix must be square, got " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()));
    }
    require_finite(m, "expm input");
    const Eigen::Index n = m.rows();
    if (n == 0) return m;

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,  10559470521600.0,
                                   670442572800.0,      33522128640.0,      1323241920.0,
                                   40840800.0,          960960.0,           16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
    }
    const Matrix a = m / std::ldexp(1.0, squarings);
    const Matrix ident = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;

    const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                           b[3] * a2 + b[1] * ident;
    const Matrix u = a * u_inner;
    const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                     b[2] * a2 + b[0] * ident;

    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) {
        r = r * r;
    }
    require_finite(r, "expm result");
    return r;
}

// Singular values above tol * max(sigma_max, scale) count toward the rank.
// A positive scale keeps a matrix that is zero up to roundoff at rank 0.
[[nodiscard]] inline Eigen::Index numerical_rank(const Vector& singular_values, double tol, double scale = 0.0) {
    if (singular_values.size() == 0) return 0;
    const double smax = std::max(singular_values.maxCoeff(), scale);
    if (smax <= 0.0) return 0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
        if (singular_values[i] > tol * smax) ++rank;
    }
    return rank;
}

/// Orthonormal rows spanning {v : v M = 0}, using a full SVD with the
/// relative threshold tol * sigma_max. Returns a (rows(M) - rank) x rows(M)
/// matrix, possibly with zero rows.
[[nodiscard]] inline Matrix left_null_basis(const Matrix& m, double tol = kDefaultRankTol, double scale = 0.0) {
    if (tol < 0.0) {
        throw std::invalid_argument("left_null_basis: tol must be nonnegative");
    }
    const Eigen::Index n = m.rows();
    if (n == 0) return Matrix(0, 0);
    if (m.cols() == 0) return Matrix::Identity(n, n);

    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullU);
    const Eigen::Index rank = numerical_rank(svd.singularValues(), tol, scale);
    const Matrix& u = svd.matrixU();
    return u.rightCols(n - rank).transpose();
}

/// Oblique projector P = C (C' W C)^-1 C' W onto Im(C); W defaults to I.
/// `weights` holds the diagonal of W.
[[nodiscard]] inline Matrix weighted_range_projector(const Matrix& c,
                                                     const std::optional<Vector>& weights = std::nullopt) {
    const Eigen::Index n = c.rows();
    Vector sqrt_w = Vector::Ones(n);
    if (weights) {
        if (weights->size() != n) {
            throw DimensionError("weighted_range_projector: weight length " +
                                 std::to_string(weights->size()) + " does not match " + std::to_string(n) +
                                 " rows");
        }
        if ((weights->array() <= 0.0).any() || !weights->allFinite()) {
            throw ValidationError("weighted_range_projector: weights must be strictly positive");
        }
        sqrt_w = weights->cwiseSqrt();
    }
    const Matrix cw = sqrt_w.asDiagonal() * c;
    Eigen::ColPivHouseholderQR<Matrix> qr(cw);
    qr.setThreshold(kDefaultRankTol);
    if (qr.rank() < c.cols()) {
        const long deficient = static_cast<long>(c.cols() - qr.rank());
        throw SingularityError("weighted_range_projector: C is rank deficient by " + std::to_string(deficient) +
                                   " column(s)",
                               deficient);
    }
    const Matrix sqrt_w_diag = sqrt_w.asDiagonal();
    return c * qr.solve(sqrt_w_diag);
}

} // namespace fdi
