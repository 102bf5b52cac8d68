#pragma once

// Static bad-data residual and the realized dynamic diagnosis filter
//   a(q) r_D = N(q) L y,   a(q) = (q - p)^{d_N} / (1 - p)^{d_N}.

#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fdi/dae.hpp"
#include "fdi/errors.hpp"
#include "fdi/filter_design.hpp"
#include "fdi/numerics.hpp"

namespace fdi {

// r_S = (I - P) Y with P weighted by R_Y^{-1} when a covariance diagonal is given.
class StaticDetector {
public:
    explicit StaticDetector(const Matrix& c, const std::optional<Vector>& covariance = std::nullopt) {
        std::optional<Vector> weights;
        if (covariance) {
            if ((covariance->array() <= 0.0).any()) {
                throw ValidationError("static detector: measurement covariance must be positive");
            }
            weights = covariance->cwiseInverse();
        }
        annihilator_ = Matrix::Identity(c.rows(), c.rows()) - weighted_range_projector(c, weights);
    }

    [[nodiscard]] Vector residual(const Vector& y) const {
        if (y.size() != annihilator_.cols()) throw DimensionError("static detector: measurement length mismatch");
        return annihilator_ * y;
    }

    [[nodiscard]] double residual_norm(const Vector& y) const { return max_abs(residual(y)); }
    [[nodiscard]] const Matrix& annihilator() const { return annihilator_; }

private:
    Matrix annihilator_;
};

[[nodiscard]] inline Vector static_residual(const Vector& y, const Matrix& c,
                                            const std::optional<Vector>& covariance = std::nullopt) {
    return StaticDetector(c, covariance).residual(y);
}

// Coefficients a_0..a_{d_N} of (q - p)^{d_N} / (1 - p)^{d_N}, lowest power first.
[[nodiscard]] inline Vector denominator_coefficients(double pole, std::size_t degree) {
    const auto n = static_cast<Eigen::Index>(degree);
    Vector a = Vector::Zero(n + 1);
    a[0] = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        // multiply by (q - p)
        for (Eigen::Index j = k + 1; j > 0; --j) a[j] = a[j - 1] - pole * a[j];
        a[0] = -pole * a[0];
    }
    return a / std::pow(1.0 - pole, static_cast<double>(degree));
}

class RealizedFilter {
public:
    // numerator[i] = N_i L (a row over the measurement vector).
    RealizedFilter(std::vector<RowVector> numerator, double pole) : numerator_(std::move(numerator)), pole_(pole) {
        if (!(pole > 0.0 && pole < 1.0)) {
            throw std::domain_error("realized filter: pole must lie in (0, 1) for a stable a(q)");
        }
        if (numerator_.empty()) throw DimensionError("realized filter needs at least one numerator coefficient");
        const Eigen::Index ny = numerator_.front().size();
        for (const auto& n : numerator_) {
            if (n.size() != ny) throw DimensionError("realized filter numerator rows must share length");
        }
        denominator_ = denominator_coefficients(pole, degree());
        gain_ = std::pow(1.0 - pole, static_cast<double>(degree()));
        reset();
    }

    [[nodiscard]] std::size_t degree() const { return numerator_.size() - 1; }
    [[nodiscard]] double pole() const { return pole_; }
    [[nodiscard]] Eigen::Index num_measurements() const { return numerator_.front().size(); }
    [[nodiscard]] const Vector& denominator() const { return denominator_; }
    [[nodiscard]] const std::vector<RowVector>& numerator() const { return numerator_; }

    void reset() {
        past_y_.assign(degree(), Vector::Zero(num_measurements()));
        past_r_.assign(degree(), 0.0);
    }

    // (1-p)^{-d_N} r[k] = sum_i N_i L y[k-d_N+i] - sum_{j<d_N} a_j r[k-d_N+j]
    double step(const Vector& y) {
        if (y.size() != num_measurements()) {
            throw DimensionError("realized filter: measurement length " + std::to_string(y.size()) + ", expected " +
                                 std::to_string(num_measurements()));
        }
        const std::size_t n = degree();
        double acc = numerator_[n].dot(y);
        for (std::size_t i = 0; i < n; ++i) {
            acc += numerator_[i].dot(past_y_[i]) - denominator_[static_cast<Eigen::Index>(i)] * past_r_[i];
        }
        const double r = gain_ * acc;
        if (n > 0) {
            past_y_.pop_front();
            past_y_.push_back(y);
            past_r_.pop_front();
            past_r_.push_back(r);
        }
        return r;
    }

private:
    std::vector<RowVector> numerator_;
    double pole_;
    Vector denominator_;
    double gain_ = 1.0;
    std::deque<Vector> past_y_; // y[k-d_N] .. y[k-1]
    std::deque<double> past_r_; // r[k-d_N] .. r[k-1]
};

/// Builds the recursion from a design and L(q), which must be constant.
[[nodiscard]] inline RealizedFilter realize_filter(const FilterDesign& design, const PolynomialMatrix& l) {
    if (l.degree() != 0) throw DimensionError("realize_filter: L(q) must have degree 0");
    const Matrix& l0 = l.coeff(0);
    if (design.nbar.size() != static_cast<Eigen::Index>(design.degree + 1) * l0.rows()) {
        throw DimensionError("realize_filter: N_bar length does not match (d_N+1) n_r");
    }
    std::vector<RowVector> numerator;
    for (std::size_t i = 0; i <= design.degree; ++i) numerator.push_back(design.block(i) * l0);
    return RealizedFilter(std::move(numerator), design.pole);
}

// -N(1) F F_b alpha = -N_bar F_bar alpha; a(1) = 1 by normalization.
[[nodiscard]] inline double steady_state_gain(const FilterDesign& design, const Matrix& signature,
                                              const Vector& alpha) {
    if (signature.rows() != design.n_r) throw DimensionError("steady_state_gain: signature rows must equal n_r");
    const Vector column = signature * alpha;
    double sum = 0.0;
    for (std::size_t j = 0; j <= design.degree; ++j) sum += design.block(j).dot(column);
    return -sum;
}

} // namespace fdi
