#pragma once

// DAE form H(q) x + L(q) y + F(q) f = 0 of a sampled closed loop, with
// x = [X; d] and q the one-step advance, plus the stacked matrices used to
// turn polynomial conditions on N(q) into linear ones on its coefficients.

#include <cstddef>
#include <vector>

#include "fdi/discretization.hpp"
#include "fdi/errors.hpp"
#include "fdi/numerics.hpp"

namespace fdi {

// Matrix polynomial sum_k coeffs[k] q^k.
class PolynomialMatrix {
public:
    PolynomialMatrix() = default;
    explicit PolynomialMatrix(std::vector<Matrix> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) throw DimensionError("PolynomialMatrix needs at least one coefficient");
        for (const auto& c : coeffs_) {
            if (c.rows() != coeffs_.front().rows() || c.cols() != coeffs_.front().cols()) {
                throw DimensionError("PolynomialMatrix coefficients must share dimensions");
            }
        }
    }

    [[nodiscard]] std::size_t degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }
    [[nodiscard]] Eigen::Index rows() const { return coeffs_.empty() ? 0 : coeffs_.front().rows(); }
    [[nodiscard]] Eigen::Index cols() const { return coeffs_.empty() ? 0 : coeffs_.front().cols(); }
    [[nodiscard]] const Matrix& coeff(std::size_t k) const { return coeffs_.at(k); }
    [[nodiscard]] const std::vector<Matrix>& coeffs() const { return coeffs_; }

    [[nodiscard]] Matrix evaluate(double q) const {
        Matrix out = Matrix::Zero(rows(), cols());
        for (std::size_t k = coeffs_.size(); k-- > 0;) out = out * q + coeffs_[k];
        return out;
    }

private:
    std::vector<Matrix> coeffs_;
};

struct DaeSystem {
    PolynomialMatrix h; // n_r x n_x, degree 1
    PolynomialMatrix l; // n_r x n_y, degree 0
    PolynomialMatrix f; // n_r x n_f, degree 0
    Eigen::Index n_r = 0;
    Eigen::Index n_x = 0;
    Eigen::Index n_y = 0;
    Eigen::Index n_f = 0;
    Eigen::Index n_states = 0;
};

/// H(q) = [[-qI + A, B_d], [C, 0]], L(q) = [[0], [-I]], F(q) = [[B_f], [D_f]].
[[nodiscard]] inline DaeSystem build_dae(const DiscreteLtiModel& m) {
    m.validate();
    const Eigen::Index nX = m.num_states();
    const Eigen::Index nY = m.num_measurements();
    const Eigen::Index nd = m.num_disturbances();
    const Eigen::Index nf = m.num_attacks();
    const Eigen::Index nr = nX + nY;
    const Eigen::Index nx = nX + nd;

    Matrix h0 = Matrix::Zero(nr, nx);
    h0.topLeftCorner(nX, nX) = m.a;
    h0.topRightCorner(nX, nd) = m.bd;
    h0.bottomLeftCorner(nY, nX) = m.c;
    Matrix h1 = Matrix::Zero(nr, nx);
    h1.topLeftCorner(nX, nX) = -Matrix::Identity(nX, nX);

    Matrix l0 = Matrix::Zero(nr, nY);
    l0.bottomRows(nY) = -Matrix::Identity(nY, nY);

    Matrix f0(nr, nf);
    f0 << m.bf, m.df;

    DaeSystem d;
    d.h = PolynomialMatrix({h0, h1});
    d.l = PolynomialMatrix({l0});
    d.f = PolynomialMatrix({f0});
    d.n_r = nr;
    d.n_x = nx;
    d.n_y = nY;
    d.n_f = nf;
    d.n_states = nX;
    return d;
}

// F F_b with F_b stored as basis rows (d x n_f): an n_r x d matrix whose
// columns are the DAE images of the basis attacks.
[[nodiscard]] inline Matrix attack_signature(const DaeSystem& d, const Matrix& basis) {
    if (basis.cols() != d.n_f) {
        throw DimensionError("attack basis rows must have length n_f = " + std::to_string(d.n_f));
    }
    return d.f.coeff(0) * basis.transpose();
}

/// Banded ((d_N+1) n_r) x ((d_N+2) n_x) matrix with H_0, H_1 on each block
/// row, so that N(q) H(q) has coefficient blocks N_bar * H_bar.
[[nodiscard]] inline Matrix stack_hbar(const DaeSystem& d, std::size_t degree) {
    const auto blocks = static_cast<Eigen::Index>(degree + 1);
    Matrix out = Matrix::Zero(blocks * d.n_r, (blocks + 1) * d.n_x);
    for (Eigen::Index i = 0; i < blocks; ++i) {
        out.block(i * d.n_r, i * d.n_x, d.n_r, d.n_x) = d.h.coeff(0);
        out.block(i * d.n_r, (i + 1) * d.n_x, d.n_r, d.n_x) = d.h.coeff(1);
    }
    return out;
}

// Block diagonal with d_N+1 copies of the column F F_b alpha.
[[nodiscard]] inline Matrix build_v(const DaeSystem& d, const Matrix& basis, const Vector& alpha, std::size_t degree) {
    if (alpha.size() != basis.rows()) {
        throw DimensionError("alpha length " + std::to_string(alpha.size()) + " differs from basis size " +
                             std::to_string(basis.rows()));
    }
    const Vector column = attack_signature(d, basis) * alpha;
    const auto blocks = static_cast<Eigen::Index>(degree + 1);
    Matrix out = Matrix::Zero(blocks * d.n_r, blocks);
    for (Eigen::Index i = 0; i < blocks; ++i) out.block(i * d.n_r, i, d.n_r, 1) = column;
    return out;
}

// d_N+1 copies of F F_b stacked vertically; N_bar * F_bar = N(1) F F_b.
[[nodiscard]] inline Matrix build_fbar(const DaeSystem& d, const Matrix& basis, std::size_t degree) {
    const Matrix sig = attack_signature(d, basis);
    return sig.replicate(static_cast<Eigen::Index>(degree + 1), 1);
}

} // namespace fdi
