#pragma once

// build -> discretize -> DAE -> design -> attack, shared by the CLI and the
// acceptance suite.

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdi/agc_model.hpp"
#include "fdi/attack_space.hpp"
#include "fdi/dae.hpp"
#include "fdi/discretization.hpp"
#include "fdi/errors.hpp"
#include "fdi/filter_design.hpp"
#include "fdi/residual.hpp"
#include "fdi/simulator.hpp"

namespace fdi {

// Zero measurement variances are raised to this value before weighting the
// static projector by R_Y^{-1}.
inline constexpr double kCovarianceFloor = 1e-6;

struct ModelBundle {
    std::vector<AreaParams> areas;
    ContinuousModel continuous;
    DiscreteLtiModel discrete;
    DaeSystem dae;
};

[[nodiscard]] inline ModelBundle build_model(const std::vector<AreaParams>& areas,
                                             const std::vector<std::string>& attacked, double sample_time) {
    ModelBundle b;
    b.areas = areas;
    b.continuous = assemble_system(areas, attacked);
    b.discrete = zoh_discretize(b.continuous, sample_time);
    b.dae = build_dae(b.discrete);
    return b;
}

// Uses `basis` when given (validated), otherwise the computed null-space
// basis normalized to 0.1 p.u. rows.
[[nodiscard]] inline AttackSpace make_attack_space(const ModelBundle& m, const std::optional<Matrix>& basis,
                                                   const Matrix& a, const Vector& b,
                                                   double rank_tol = kDefaultRankTol) {
    AttackSpace s;
    s.basis = basis ? *basis : normalize_basis(compute_basis(m.discrete.c, m.discrete.df, rank_tol));
    s.polytope_a = a;
    s.polytope_b = b;
    s.labels = m.discrete.attack_labels;
    validate_attack_space(s, m.discrete.c, m.discrete.df);
    return s;
}

struct DesignSettings {
    std::size_t degree = 3;
    double eta = 10.0;
    double pole = 0.8;
    DesignKind kind = DesignKind::Robust;
    double rank_tol = kDefaultRankTol;
    bool parallel = true;
};

struct DesignBundle {
    Matrix hbar;
    FeasibleSetBasis basis;
    Matrix signature;
    Matrix fbar;
    FilterDesign design;
    double wall_ms = 0.0;
};

[[nodiscard]] inline DesignBundle run_design(const ModelBundle& m, const AttackSpace& s, const DesignSettings& cfg) {
    if (!(cfg.pole > 0.0 && cfg.pole < 1.0)) throw std::domain_error("design: pole must lie in (0, 1)");
    const auto start = std::chrono::steady_clock::now();
    DesignBundle out;
    out.hbar = stack_hbar(m.dae, cfg.degree);
    out.basis = feasible_basis(out.hbar, cfg.eta, cfg.degree, cfg.rank_tol);
    out.signature = attack_signature(m.dae, s.basis);
    out.fbar = build_fbar(m.dae, s.basis, cfg.degree);
    out.design = cfg.kind == DesignKind::Robust
                     ? design_robust(out.basis, out.signature, s.polytope_a, s.polytope_b, cfg.parallel)
                     : design_steady_state(out.basis, out.fbar, s.polytope_a, s.polytope_b);
    out.design.pole = cfg.pole;
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// How the injected vector is chosen: explicit f, explicit alpha, or the
// attacker's best response to the design. Labels in `zero` are cleared
// afterwards (an uncoordinated, "basic" attack).
struct AttackChoice {
    std::optional<Vector> f;
    std::optional<Vector> alpha; // nullopt with no f means worst case
    std::vector<std::string> zero;
};

struct ResolvedAttack {
    Vector alpha;   // empty when f was given directly
    Vector f;
    bool worst_case = false;
    double payoff = 0.0; // J(N_bar, alpha) when alpha is known
};

[[nodiscard]] inline ResolvedAttack resolve_attack(const AttackSpace& s, const DesignBundle& d,
                                                   const AttackChoice& choice) {
    ResolvedAttack r;
    if (choice.f) {
        if (choice.f->size() != s.basis.cols()) {
            throw DimensionError("attack f has " + std::to_string(choice.f->size()) + " entries, expected " +
                                 std::to_string(s.basis.cols()));
        }
        r.f = *choice.f;
    } else {
        if (choice.alpha) {
            r.alpha = *choice.alpha;
        } else {
            r.alpha = worst_case_alpha(d.design.nbar, d.signature, d.design.degree, s.polytope_a, s.polytope_b).alpha;
            r.worst_case = true;
        }
        r.f = synthesize_attack(s, r.alpha);
        r.payoff = evaluate_payoff(d.design.nbar, d.signature, r.alpha, d.design.degree);
    }
    for (const auto& label : choice.zero) {
        auto it = std::find(s.labels.begin(), s.labels.end(), label);
        if (it == s.labels.end()) throw ValidationError("cannot zero unknown attack channel '" + label + "'");
        r.f[it - s.labels.begin()] = 0.0;
    }
    return r;
}

// Area index of every state and measurement, from the per-area block sizes.
struct LabelAreas {
    std::vector<std::size_t> states;
    std::vector<std::size_t> measurements;
};

[[nodiscard]] inline LabelAreas label_areas(const ModelBundle& m) {
    LabelAreas out;
    for (std::size_t i = 0; i < m.areas.size(); ++i) {
        out.states.insert(out.states.end(), m.areas[i].num_states(), i);
        out.measurements.insert(out.measurements.end(), m.areas[i].num_measurements(), i);
    }
    return out;
}

// Diagonal from a label map. Keys are labels or "area_<name>" (every entry of
// that area); exact labels win over area keys.
[[nodiscard]] inline Vector diagonal_by_label(const std::map<std::string, double>& spec,
                                              const std::vector<std::string>& labels,
                                              const std::vector<std::size_t>& areas_of,
                                              const std::vector<std::string>& area_names, const std::string& what) {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(labels.size()));
    std::vector<bool> exact(labels.size(), false);
    for (const auto& [key, value] : spec) {
        bool matched = false;
        if (key.rfind("area_", 0) == 0) {
            const std::string name = key.substr(5);
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (area_names[areas_of[i]] == name) {
                    if (!exact[i]) out[static_cast<Eigen::Index>(i)] = value;
                    matched = true;
                }
            }
        }
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == key) {
                out[static_cast<Eigen::Index>(i)] = value;
                exact[i] = true;
                matched = true;
            }
        }
        if (!matched) throw ValidationError(what + ": unknown label '" + key + "'");
    }
    return out;
}

[[nodiscard]] inline StaticDetector make_static_detector(const ModelBundle& m, const Vector& measurement_covariance) {
    if (measurement_covariance.size() == 0 || measurement_covariance.isZero(0.0)) {
        return StaticDetector(m.discrete.c);
    }
    return StaticDetector(m.discrete.c, measurement_covariance.cwiseMax(kCovarianceFloor));
}

} // namespace fdi
