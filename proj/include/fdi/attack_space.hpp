#pragma once

// Stealthy attacks: injections f with D_f f in Im(C) leave the static
// bad-data residual untouched. Disruptive ones are f = F_b' alpha with alpha
// in the polytope {A alpha >= b}.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fdi/errors.hpp"
#include "fdi/numerics.hpp"

namespace fdi {

inline constexpr double kStealthTol = 1e-8;

struct AttackSpace {
    Matrix basis;   // d x n_f, one basis attack per row
    Matrix polytope_a;  // n_b x d
    Vector polytope_b;  // n_b
    std::vector<std::string> labels;

    [[nodiscard]] Eigen::Index dimension() const { return basis.rows(); }
};

[[nodiscard]] inline double stealth_residual(const Vector& f, const Matrix& c, const Matrix& df) {
    if (df.cols() != f.size() || df.rows() != c.rows()) {
        throw DimensionError("stealth_residual: f, C and D_f are not conformable");
    }
    const Vector injected = df * f;
    const Matrix p = weighted_range_projector(c);
    return max_abs(injected - p * injected);
}

/// Basis rows of {f : (I - P_C) D_f f = 0}, orthonormal.
[[nodiscard]] inline Matrix compute_basis(const Matrix& c, const Matrix& df, double tol = kDefaultRankTol) {
    const Matrix p = weighted_range_projector(c);
    const Matrix leak = (Matrix::Identity(c.rows(), c.rows()) - p) * df;
    // Right null space of `leak` is the left null space of its transpose.
    const double scale = std::max(1.0, df.norm());
    return left_null_basis(leak.transpose(), tol, scale);
}

// Rescales each row to infinity norm `magnitude` with a positive leading
// nonzero entry.
[[nodiscard]] inline Matrix normalize_basis(const Matrix& basis, double magnitude = 0.1) {
    Matrix out = basis;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = max_abs(out.row(i));
        if (norm == 0.0) continue;
        out.row(i) *= magnitude / norm;
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            if (std::abs(out(i, j)) > 1e-12 * magnitude) {
                if (out(i, j) < 0.0) out.row(i) *= -1.0;
                break;
            }
        }
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            if (std::abs(out(i, j)) <= 1e-14 * magnitude) out(i, j) = 0.0;
        }
    }
    return out;
}

// Throws unless every basis row is stealthy and the rows are independent.
inline void validate_attack_space(const AttackSpace& s, const Matrix& c, const Matrix& df) {
    if (s.basis.cols() != df.cols()) {
        throw DimensionError("attack basis rows must have one entry per attacked measurement");
    }
    if (s.polytope_a.cols() != s.basis.rows() || s.polytope_a.rows() != s.polytope_b.size()) {
        throw DimensionError("polytope (A, b) is not conformable with the basis size");
    }
    for (Eigen::Index i = 0; i < s.basis.rows(); ++i) {
        const double r = stealth_residual(s.basis.row(i).transpose(), c, df);
        if (r > kStealthTol) {
            throw ValidationError("attack basis row " + std::to_string(i + 1) + " is not stealthy (residual " +
                                  std::to_string(r) + ")");
        }
    }
    if (s.basis.rows() > 0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(s.basis.transpose());
        qr.setThreshold(kDefaultRankTol);
        if (qr.rank() < s.basis.rows()) throw ValidationError("attack basis rows are linearly dependent");
    }
}

// f = F_b' alpha = sum_i alpha_i f_i.
[[nodiscard]] inline Vector synthesize_attack(const AttackSpace& s, const Vector& alpha) {
    if (alpha.size() != s.basis.rows()) {
        throw DimensionError("alpha length " + std::to_string(alpha.size()) + " differs from basis size " +
                             std::to_string(s.basis.rows()));
    }
    return s.basis.transpose() * alpha;
}

[[nodiscard]] inline bool in_polytope(const AttackSpace& s, const Vector& alpha, double tol = 0.0) {
    if (alpha.size() != s.polytope_a.cols()) return false;
    return ((s.polytope_a * alpha - s.polytope_b).array() >= -tol).all();
}

} // namespace fdi
