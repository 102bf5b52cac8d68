#pragma once

// A configured experiment: model, attack space and filter design built once,
// then any number of simulations.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fdi/config.hpp"
#include "fdi/pipeline.hpp"
#include "fdi/simulator.hpp"
#include "fdi/trace_io.hpp"

namespace fdi {

struct Session {
    RunConfig config;
    ModelBundle model;
    AttackSpace space;
    DesignBundle design;
};

[[nodiscard]] inline Session prepare_session(const RunConfig& cfg) {
    Session s;
    s.config = cfg;
    s.model = build_model(cfg.areas, cfg.attacked, cfg.sample_time);
    s.space = make_attack_space(s.model, cfg.basis, cfg.polytope_a, cfg.polytope_b, cfg.design.rank_tol);
    s.design = run_design(s.model, s.space, cfg.design);
    return s;
}

[[nodiscard]] inline Vector load_std_vector(const Session& s) {
    const auto& m = s.model;
    std::vector<std::size_t> areas_of(m.areas.size());
    for (std::size_t i = 0; i < areas_of.size(); ++i) areas_of[i] = i;
    return diagonal_by_label(s.config.load_std, m.discrete.disturbance_labels, areas_of, m.continuous.area_names,
                             "scenario.loads");
}

[[nodiscard]] inline Vector process_covariance(const Session& s) {
    return diagonal_by_label(s.config.noise.process, s.model.discrete.state_labels, label_areas(s.model).states,
                             s.model.continuous.area_names, "noise.process");
}

[[nodiscard]] inline Vector measurement_covariance(const Session& s) {
    return diagonal_by_label(s.config.noise.measurement, s.model.discrete.measurement_labels,
                             label_areas(s.model).measurements, s.model.continuous.area_names, "noise.measurement");
}

[[nodiscard]] inline Scenario make_scenario(const Session& s, const std::optional<Vector>& f, bool noisy) {
    Scenario sc;
    sc.horizon = s.config.horizon;
    sc.sample_time = s.config.sample_time;
    sc.onset = s.config.onset;
    sc.attack = f;
    sc.load_std = load_std_vector(s);
    sc.load_series = s.config.load_series;
    sc.seed = s.config.seed;
    if (noisy) {
        sc.process_covariance = process_covariance(s);
        sc.measurement_covariance = measurement_covariance(s);
    }
    return sc;
}

// Runs one scenario with the session's filter at `pole`.
[[nodiscard]] inline SimulationTrace run_scenario(const Session& s, const Scenario& sc, std::optional<double> pole = {}) {
    FilterDesign d = s.design.design;
    if (pole) d.pole = *pole;
    const StaticDetector detector = make_static_detector(s.model, sc.measurement_covariance);
    return simulate(s.model.discrete, sc, detector, realize_filter(d, s.model.dae.l));
}

// Before/after-onset summary; warm-up samples are skipped.
struct PhaseStats {
    double pre_rs_mean = 0.0;
    double post_rs_mean = 0.0;
    double pre_rd_rms = 0.0;
    double post_rd_mean = 0.0;
    std::size_t pre_samples = 0;
    std::size_t post_samples = 0;
};

[[nodiscard]] inline PhaseStats phase_stats(const SimulationTrace& t, std::size_t onset_step) {
    PhaseStats p;
    for (const auto& r : t.records) {
        if (r.k < t.warmup_samples) continue;
        if (r.k <= onset_step) {
            p.pre_rs_mean += r.rs_inf;
            p.pre_rd_rms += r.r_d * r.r_d;
            ++p.pre_samples;
        } else {
            p.post_rs_mean += r.rs_inf;
            p.post_rd_mean += std::abs(r.r_d);
            ++p.post_samples;
        }
    }
    if (p.pre_samples > 0) {
        p.pre_rs_mean /= static_cast<double>(p.pre_samples);
        p.pre_rd_rms = std::sqrt(p.pre_rd_rms / static_cast<double>(p.pre_samples));
    }
    if (p.post_samples > 0) {
        p.post_rs_mean /= static_cast<double>(p.post_samples);
        p.post_rd_mean /= static_cast<double>(p.post_samples);
    }
    return p;
}

[[nodiscard]] inline std::vector<std::pair<std::string, std::string>> trace_metadata(const Session& s,
                                                                                     const std::string& extra = {},
                                                                                     std::optional<double> pole = {}) {
    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("sample_time", format_number(s.config.sample_time));
    meta.emplace_back("onset_step", std::to_string(static_cast<long long>(std::llround(s.config.onset / s.config.sample_time))));
    meta.emplace_back("pole", format_number(pole.value_or(s.design.design.pole)));
    std::string joined;
    for (const auto& o : s.config.overrides) joined += (joined.empty() ? "" : ";") + o;
    meta.emplace_back("overrides", joined);
    if (!extra.empty()) meta.emplace_back("case", extra);
    return meta;
}

} // namespace fdi
