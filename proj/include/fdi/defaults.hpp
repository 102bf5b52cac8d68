#pragma once

// Shipped default scenario: three areas with (3, 2, 2) generators, the five
// tie-line measurements as attack channels, and the three-vector basis with
// A = 1', b = 1.5. config/default.yaml carries the same values.

#include <string>
#include <vector>

#include "fdi/agc_model.hpp"
#include "fdi/attack_space.hpp"

namespace fdi::defaults {

inline constexpr double kSampleTime = 0.5;
inline constexpr double kHorizon = 60.0;
inline constexpr double kAttackOnset = 30.0;
inline constexpr std::size_t kDegree = 3;
inline constexpr double kPole = 0.8;
inline constexpr double kEta = 10.0;
inline constexpr double kLoadStd = 0.03;

namespace detail {
inline std::vector<Generator> equal_share(std::vector<double> t_ch, double droop = 0.05) {
    std::vector<Generator> out;
    for (double t : t_ch) out.push_back({t, droop, 1.0 / static_cast<double>(t_ch.size())});
    return out;
}
} // namespace detail

[[nodiscard]] inline std::vector<AreaParams> areas() {
    AreaParams a1{"1", 5.0, 1.6, 21.0, 0.4, {{"2", 0.20}, {"3", 0.25}}, detail::equal_share({0.40, 0.36, 0.42})};
    AreaParams a2{"2", 4.2, 1.2, 22.0, 0.3, {{"1", 0.20}, {"3", 0.12}}, detail::equal_share({0.44, 0.32})};
    AreaParams a3{"3", 4.6, 1.4, 20.5, 0.35, {{"1", 0.25}, {"2", 0.12}}, detail::equal_share({0.38, 0.30})};
    return {a1, a2, a3};
}

[[nodiscard]] inline std::vector<std::string> attacked_labels() {
    return {"tie_1_2", "tie_1_3", "tie_1", "tie_2_3", "tie_2"};
}

// Rows f_1, f_2, f_3 over attacked_labels().
[[nodiscard]] inline Matrix attack_basis() {
    Matrix b(3, 5);
    b << 0.1, 0.0, 0.1, 0.0, 0.0,
         0.1, 0.15, 0.25, 0.0, 0.0,
         0.0, 0.0, 0.0, 0.1, 0.1;
    return b;
}

[[nodiscard]] inline AttackSpace attack_space() {
    AttackSpace s;
    s.basis = attack_basis();
    s.polytope_a = Matrix::Ones(1, 3);
    s.polytope_b = Vector::Constant(1, 1.5);
    s.labels = attacked_labels();
    return s;
}

} // namespace fdi::defaults
