#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fdi/agc_model.hpp"
#include "fdi/errors.hpp"
#include "fdi/numerics.hpp"

namespace fdi {

/// Sampled closed-loop dynamics X[k+1] = A X[k] + B_d d[k] + B_f f[k],
/// Y[k] = C X[k] + D_f f[k].
struct DiscreteLtiModel {
    Matrix a;
    Matrix bd;
    Matrix bf;
    Matrix c;
    Matrix df;
    double sample_time = 0.0;
    std::vector<std::string> state_labels;
    std::vector<std::string> measurement_labels;
    std::vector<std::string> attack_labels;
    std::vector<std::string> disturbance_labels;

    [[nodiscard]] Eigen::Index num_states() const { return a.rows(); }
    [[nodiscard]] Eigen::Index num_measurements() const { return c.rows(); }
    [[nodiscard]] Eigen::Index num_disturbances() const { return bd.cols(); }
    [[nodiscard]] Eigen::Index num_attacks() const { return df.cols(); }

    void validate() const {
        const Eigen::Index n = a.rows();
        if (a.cols() != n) throw DimensionError("DiscreteLtiModel: A must be square");
        if (bd.rows() != n || bf.rows() != n || c.cols() != n) {
            throw DimensionError("DiscreteLtiModel: B_d, B_f rows and C columns must equal the state count");
        }
        if (df.rows() != c.rows()) throw DimensionError("DiscreteLtiModel: D_f rows must equal C rows");
        if (df.cols() != bf.cols()) throw DimensionError("DiscreteLtiModel: B_f and D_f must share attack columns");
    }

    // Generic model without labels; numbered labels are generated.
    [[nodiscard]] static DiscreteLtiModel from_matrices(const ClosedLoopMatrices& m, double sample_time) {
        DiscreteLtiModel out{m.a, m.bd, m.bf, m.c, m.df, sample_time, {}, {}, {}, {}};
        out.validate();
        auto numbered = [](const char* prefix, Eigen::Index n) {
            std::vector<std::string> v;
            for (Eigen::Index i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i + 1));
            return v;
        };
        out.state_labels = numbered("x", out.num_states());
        out.measurement_labels = numbered("y", out.num_measurements());
        out.attack_labels = numbered("f", out.num_attacks());
        out.disturbance_labels = numbered("d", out.num_disturbances());
        return out;
    }
};

/// Zero-order-hold pair (e^{A T}, int_0^T e^{A s} ds B) from the exponential
/// of the block matrix [[A, B], [0, 0]] T.
[[nodiscard]] inline std::pair<Matrix, Matrix> zoh(const Matrix& a, const Matrix& b, double sample_time) {
    if (!(sample_time > 0.0)) throw std::invalid_argument("zoh: sample time must be positive");
    if (a.rows() != a.cols() || b.rows() != a.rows()) throw DimensionError("zoh: A square and B conformable");
    const Eigen::Index n = a.rows();
    const Eigen::Index m = b.cols();
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = a * sample_time;
    aug.topRightCorner(n, m) = b * sample_time;
    const Matrix e = expm(aug);
    require_finite(e, "zoh exponential");
    return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

/// B_d and B_f go through the same integral transform in one exponential;
/// C and D_f pass through.
[[nodiscard]] inline DiscreteLtiModel zoh_discretize(const ContinuousModel& m, double sample_time) {
    const Eigen::Index nd = m.bd.cols();
    Matrix inputs(m.a.rows(), nd + m.bf.cols());
    inputs << m.bd, m.bf;
    auto [ad, bin] = zoh(m.a, inputs, sample_time);
    DiscreteLtiModel out;
    out.a = std::move(ad);
    out.bd = bin.leftCols(nd);
    out.bf = bin.rightCols(m.bf.cols());
    out.c = m.c;
    out.df = m.df;
    out.sample_time = sample_time;
    out.state_labels = m.state_labels;
    out.measurement_labels = m.measurement_labels;
    out.attack_labels = m.attack_labels;
    out.disturbance_labels = m.disturbance_labels;
    out.validate();
    return out;
}

} // namespace fdi
