#pragma once

// Closed-loop simulation of the sampled, attacked system with Gaussian loads
// and optional process / measurement noise, feeding both detectors.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fdi/discretization.hpp"
#include "fdi/errors.hpp"
#include "fdi/residual.hpp"

namespace fdi {

// mt19937_64 words -> doubles in [0,1) with 53 random bits; Gaussian pairs by
// the basic Box-Muller transform, the second value of each pair kept for the
// next call.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return z;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

struct Scenario {
    double horizon = 60.0;
    double sample_time = 0.5;
    double onset = 30.0;
    std::optional<Vector> attack;          // constant f applied after onset
    Vector load_std;                       // per disturbance channel; empty = no load
    std::vector<Vector> load_series;       // replaces the Gaussian loads when non-empty
    Vector process_covariance;             // diagonal of R_X; empty = none
    Vector measurement_covariance;         // diagonal of R_Y; empty = none
    std::uint64_t seed = 1;

    [[nodiscard]] std::size_t num_steps() const {
        return static_cast<std::size_t>(std::floor(horizon / sample_time + 1e-9));
    }
    [[nodiscard]] std::size_t onset_step() const {
        return static_cast<std::size_t>(std::llround(onset / sample_time));
    }

    void validate(const DiscreteLtiModel& m) const {
        if (!(horizon > 0.0)) throw ValidationError("scenario: horizon must be positive");
        if (!(sample_time > 0.0)) throw ValidationError("scenario: sample time must be positive");
        if (!(onset >= 0.0 && onset <= horizon)) throw ValidationError("scenario: onset must lie in [0, horizon]");
        if (std::abs(sample_time - m.sample_time) > 1e-12 * std::max(1.0, m.sample_time)) {
            throw ValidationError("scenario: sample time differs from the model's");
        }
        if (attack && attack->size() != m.num_attacks()) {
            throw DimensionError("scenario: attack vector has " + std::to_string(attack->size()) +
                                 " entries, model has " + std::to_string(m.num_attacks()) + " attack channels");
        }
        auto check_diag = [](const Vector& v, Eigen::Index n, const char* what) {
            if (v.size() == 0) return;
            if (v.size() != n) throw DimensionError(std::string("scenario: ") + what + " length mismatch");
            if ((v.array() < 0.0).any() || !v.allFinite()) {
                throw ValidationError(std::string("scenario: ") + what + " entries must be nonnegative");
            }
        };
        check_diag(load_std, m.num_disturbances(), "load std");
        check_diag(process_covariance, m.num_states(), "process covariance");
        check_diag(measurement_covariance, m.num_measurements(), "measurement covariance");
        if (!load_series.empty()) {
            if (load_series.size() < num_steps() + 1) {
                throw DimensionError("scenario: load series shorter than the horizon");
            }
            for (const auto& d : load_series) {
                if (d.size() != m.num_disturbances()) throw DimensionError("scenario: load series width mismatch");
            }
        }
    }
};

// Loads for step k; draws one normal per channel whether or not its std is 0.
[[nodiscard]] inline Vector gen_disturbance(const Scenario& s, GaussianRng& rng, Eigen::Index channels,
                                            std::size_t k = 0) {
    if (!s.load_series.empty()) return s.load_series.at(k);
    Vector d = Vector::Zero(channels);
    if (s.load_std.size() == 0) return d;
    for (Eigen::Index i = 0; i < channels; ++i) d[i] = s.load_std[i] * rng.normal();
    return d;
}

struct TraceRecord {
    std::size_t k = 0;
    double t = 0.0;
    Vector d;
    Vector f;
    Vector x;
    Vector y;
    double rs_inf = 0.0;
    double r_d = std::numeric_limits<double>::quiet_NaN();
};

struct SimulationTrace {
    std::vector<TraceRecord> records;
    std::uint64_t seed = 0;
    std::uint64_t scenario_hash = 0;
    std::size_t warmup_samples = 0;
    std::vector<std::string> disturbance_labels;
    std::vector<std::string> attack_labels;
    std::vector<std::string> state_labels;
    std::vector<std::string> measurement_labels;
};

// 64-bit FNV-1a.
[[nodiscard]] inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[nodiscard]] inline std::uint64_t scenario_hash(const Scenario& s) {
    std::string text;
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g,", v);
        text += buf;
    };
    auto put_vec = [&](const char* tag, const Vector& v) {
        text += tag;
        for (Eigen::Index i = 0; i < v.size(); ++i) put(v[i]);
        text += ';';
    };
    put(s.horizon);
    put(s.sample_time);
    put(s.onset);
    text += std::to_string(s.seed) + ';';
    put_vec("f", s.attack ? *s.attack : Vector());
    put_vec("l", s.load_std);
    put_vec("rx", s.process_covariance);
    put_vec("ry", s.measurement_covariance);
    for (const auto& d : s.load_series) put_vec("d", d);
    return fnv1a(text);
}

inline constexpr double kDivergenceBound = 1e6;

/// X[0] = 0. Per step: draw loads, then process noise, then measurement
/// noise; Y = C X + D_f f + v; record residuals; X+ = A X + B_d d + B_f f + w.
/// f[k] is the scenario attack for k > onset step and 0 otherwise.
[[nodiscard]] inline SimulationTrace simulate(const DiscreteLtiModel& m, const Scenario& s,
                                              const StaticDetector& detector,
                                              std::optional<RealizedFilter> filter = std::nullopt) {
    m.validate();
    s.validate(m);
    if (filter) {
        filter->reset();
        if (filter->num_measurements() != m.num_measurements()) {
            throw DimensionError("simulate: filter measurement length differs from the model");
        }
    }
    const Eigen::Index nX = m.num_states();
    const Eigen::Index nY = m.num_measurements();
    const Eigen::Index nf = m.num_attacks();
    const std::size_t steps = s.num_steps();
    const std::size_t onset = s.onset_step();
    const Vector process_std = s.process_covariance.cwiseSqrt();
    const Vector measurement_std = s.measurement_covariance.cwiseSqrt();

    SimulationTrace trace;
    trace.seed = s.seed;
    trace.scenario_hash = scenario_hash(s);
    trace.warmup_samples = filter ? filter->degree() : 0;
    trace.disturbance_labels = m.disturbance_labels;
    trace.attack_labels = m.attack_labels;
    trace.state_labels = m.state_labels;
    trace.measurement_labels = m.measurement_labels;
    trace.records.reserve(steps + 1);

    GaussianRng rng(s.seed);
    Vector x = Vector::Zero(nX);
    const Vector no_attack = Vector::Zero(nf);
    for (std::size_t k = 0; k <= steps; ++k) {
        TraceRecord rec;
        rec.k = k;
        rec.t = static_cast<double>(k) * s.sample_time;
        rec.d = gen_disturbance(s, rng, m.num_disturbances(), k);
        Vector w = Vector::Zero(nX);
        for (Eigen::Index i = 0; i < process_std.size(); ++i) w[i] = process_std[i] * rng.normal();
        Vector v = Vector::Zero(nY);
        for (Eigen::Index i = 0; i < measurement_std.size(); ++i) v[i] = measurement_std[i] * rng.normal();

        rec.f = (s.attack && k > onset) ? *s.attack : no_attack;
        rec.x = x;
        rec.y = m.c * x + m.df * rec.f + v;
        rec.rs_inf = detector.residual_norm(rec.y);
        if (filter) rec.r_d = filter->step(rec.y);

        x = m.a * x + m.bd * rec.d + m.bf * rec.f + w;
        if (!x.allFinite() || max_abs(x) > kDivergenceBound) {
            throw NumericError("simulation diverged at step " + std::to_string(k + 1) + " (|X| > 1e6)");
        }
        trace.records.push_back(std::move(rec));
    }
    return trace;
}

} // namespace fdi
