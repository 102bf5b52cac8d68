#pragma once

// Run configuration: one YAML file with sections model / attack / design /
// scenario / noise / output / report / sweep. Missing sections and keys take
// the shipped defaults. Overrides "a.b.c=value" are applied to the parsed
// tree before interpretation; the value is read as YAML.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdi/defaults.hpp"
#include "fdi/pipeline.hpp"

namespace fdi {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)), message_(message) {}
    [[nodiscard]] const std::string& field() const { return field_; }
    [[nodiscard]] const std::string& message() const { return message_; }

private:
    std::string field_;
    std::string message_;
};

struct NoiseSpec {
    std::map<std::string, double> process;     // label or area_<name> -> variance
    std::map<std::string, double> measurement; // label or area_<name> -> variance
};

struct RunConfig {
    // model
    std::vector<AreaParams> areas = defaults::areas();
    std::vector<std::string> attacked = defaults::attacked_labels();
    double sample_time = defaults::kSampleTime;
    // attack
    std::optional<Matrix> basis = defaults::attack_basis(); // nullopt = computed
    Matrix polytope_a = Matrix::Ones(1, 3);
    Vector polytope_b = Vector::Constant(1, 1.5);
    AttackChoice attack;
    // design
    DesignSettings design;
    // scenario
    double horizon = defaults::kHorizon;
    double onset = defaults::kAttackOnset;
    std::uint64_t seed = 1;
    bool inject = true;
    bool noisy = false;
    std::map<std::string, double> load_std{{"area_1", defaults::kLoadStd}};
    std::vector<Vector> load_series;
    NoiseSpec noise{{{"area_1", 0.03}, {"omega_1", 0.0009}}, {{"area_1", 0.03}, {"omega_1", 0.0009}}};
    // output
    std::string output_dir;
    bool include_states = false;
    // report
    AttackChoice report_basic{std::nullopt, Vector((Vector(3) << 2.8, 1.0, -2.3).finished()), {"tie_1_3"}};
    AttackChoice report_stealthy;
    // sweep
    std::vector<double> sweep_poles{0.1, 0.2, 0.4, 0.6, 0.98};

    std::vector<std::string> overrides;
};

namespace config_detail {

inline std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }
inline std::string index(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

// Throws on any key outside `allowed`.
inline void check_keys(const YAML::Node& n, const std::string& field, std::initializer_list<const char*> allowed) {
    if (!n || !n.IsMap()) return;
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError(join(field, key), "unknown key");
        }
    }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) throw ConfigError(field, "expected a scalar");
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(field, "cannot read '" + n.Scalar() + "' as the expected type");
    }
}

inline double number(const YAML::Node& n, const std::string& field) { return scalar<double>(n, field); }

template <class T>
void read(const YAML::Node& parent, const std::string& key, const std::string& base, T& out) {
    const YAML::Node n = parent[key];
    if (n && !n.IsNull()) out = scalar<T>(n, join(base, key));
}

inline Vector vector(const YAML::Node& n, const std::string& field) {
    if (!n.IsSequence()) throw ConfigError(field, "expected a list of numbers");
    Vector v(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(n[i], index(field, i));
    return v;
}

inline Matrix matrix(const YAML::Node& n, const std::string& field) {
    if (!n.IsSequence() || n.size() == 0) throw ConfigError(field, "expected a non-empty list of rows");
    Matrix m;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const Vector row = vector(n[i], index(field, i));
        if (i == 0) m.resize(static_cast<Eigen::Index>(n.size()), row.size());
        if (row.size() != m.cols()) throw ConfigError(index(field, i), "row length differs from the first row");
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

inline std::vector<std::string> strings(const YAML::Node& n, const std::string& field) {
    if (!n.IsSequence()) throw ConfigError(field, "expected a list of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(scalar<std::string>(n[i], index(field, i)));
    return out;
}

inline std::map<std::string, double> number_map(const YAML::Node& n, const std::string& field) {
    if (n.IsNull()) return {};
    if (!n.IsMap()) throw ConfigError(field, "expected a map of label: value");
    std::map<std::string, double> out;
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        const double v = number(kv.second, join(field, key));
        if (v < 0.0) throw ConfigError(join(field, key), "must be nonnegative");
        out[key] = v;
    }
    return out;
}

inline AreaParams area(const YAML::Node& n, const std::string& field) {
    if (!n.IsMap()) throw ConfigError(field, "expected a map");
    check_keys(n, field, {"name", "inertia", "damping", "frequency_bias", "integral_gain", "ties", "generators"});
    AreaParams a;
    if (!n["name"]) throw ConfigError(join(field, "name"), "missing");
    a.name = scalar<std::string>(n["name"], join(field, "name"));
    auto required = [&](const char* key) {
        if (!n[key]) throw ConfigError(join(field, key), "missing");
        return number(n[key], join(field, key));
    };
    a.inertia = required("inertia");
    a.damping = required("damping");
    a.frequency_bias = required("frequency_bias");
    a.integral_gain = required("integral_gain");
    if (const auto ties = n["ties"]) {
        if (!ties.IsSequence()) throw ConfigError(join(field, "ties"), "expected a list");
        for (std::size_t i = 0; i < ties.size(); ++i) {
            const std::string f = index(join(field, "ties"), i);
            check_keys(ties[i], f, {"neighbor", "synchronizing"});
            if (!ties[i]["neighbor"] || !ties[i]["synchronizing"]) {
                throw ConfigError(f, "needs neighbor and synchronizing");
            }
            a.ties.push_back({scalar<std::string>(ties[i]["neighbor"], join(f, "neighbor")),
                              number(ties[i]["synchronizing"], join(f, "synchronizing"))});
        }
    }
    const auto gens = n["generators"];
    if (!gens || !gens.IsSequence() || gens.size() == 0) {
        throw ConfigError(join(field, "generators"), "expected a non-empty list");
    }
    bool any_phi = false;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        const std::string f = index(join(field, "generators"), i);
        check_keys(gens[i], f, {"turbine_time_constant", "droop", "participation"});
        Generator g;
        if (!gens[i]["turbine_time_constant"]) throw ConfigError(join(f, "turbine_time_constant"), "missing");
        g.turbine_time_constant = number(gens[i]["turbine_time_constant"], join(f, "turbine_time_constant"));
        g.droop = gens[i]["droop"] ? number(gens[i]["droop"], join(f, "droop")) : 0.05;
        if (gens[i]["participation"]) {
            g.participation = number(gens[i]["participation"], join(f, "participation"));
            any_phi = true;
        }
        a.generators.push_back(g);
    }
    if (!any_phi) {
        for (auto& g : a.generators) g.participation = 1.0 / static_cast<double>(a.generators.size());
    }
    try {
        a.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(field, e.what());
    }
    return a;
}

// alpha: worst-case | [numbers];  f: [numbers];  zero: [labels]
inline AttackChoice attack_choice(const YAML::Node& n, const std::string& field, AttackChoice out) {
    if (!n || n.IsNull()) return out;
    if (!n.IsMap()) throw ConfigError(field, "expected a map");
    if (const auto a = n["alpha"]) {
        if (a.IsScalar() && a.Scalar() == "worst-case") {
            out.alpha.reset();
        } else {
            out.alpha = vector(a, join(field, "alpha"));
        }
    }
    if (const auto f = n["f"]) {
        if (f.IsNull()) {
            out.f.reset();
        } else {
            out.f = vector(f, join(field, "f"));
        }
    }
    if (const auto z = n["zero"]) out.zero = z.IsNull() ? std::vector<std::string>{} : strings(z, join(field, "zero"));
    return out;
}

inline std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
        if (c == '.') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    for (const auto& p : parts) {
        if (p.empty()) throw ConfigError(path, "empty path component in override");
    }
    return parts;
}

inline bool is_index(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

} // namespace config_detail

// Applies "section.key=value"; numeric components index into lists.
inline void apply_override(YAML::Node& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like section.key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    const auto parts = config_detail::split_path(path);
    YAML::Node value;
    try {
        value = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(path, std::string("cannot parse override value: ") + e.what());
    }
    YAML::Node cur = root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node next;
        if (cur.IsSequence()) {
            if (!config_detail::is_index(parts[i]) || std::stoul(parts[i]) >= cur.size()) {
                throw ConfigError(path, "'" + parts[i] + "' is not a valid list index");
            }
            next = cur[std::stoul(parts[i])];
        } else {
            if (!cur[parts[i]] || cur[parts[i]].IsNull()) cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
            next = cur[parts[i]];
        }
        cur.reset(next);
    }
    const std::string& last = parts.back();
    if (cur.IsSequence()) {
        if (!config_detail::is_index(last) || std::stoul(last) >= cur.size()) {
            throw ConfigError(path, "'" + last + "' is not a valid list index");
        }
        cur[std::stoul(last)] = value;
    } else {
        cur[last] = value;
    }
}

[[nodiscard]] inline RunConfig parse_config(const YAML::Node& root) {
    using namespace config_detail;
    RunConfig c;
    if (root && !root.IsNull() && !root.IsMap()) throw ConfigError("<root>", "expected a map of sections");
    auto section = [&](const char* name) -> YAML::Node {
        const YAML::Node n = root[name];
        if (n && !n.IsNull() && !n.IsMap()) throw ConfigError(name, "expected a map");
        return n;
    };
    check_keys(root, "", {"model", "attack", "design", "scenario", "noise", "output", "report", "sweep"});

    if (const auto m = section("model")) {
        check_keys(m, "model", {"sample_time", "areas", "attacked"});
        read(m, "sample_time", "model", c.sample_time);
        if (!(c.sample_time > 0.0)) throw ConfigError("model.sample_time", "must be positive");
        if (const auto areas = m["areas"]) {
            if (!areas.IsSequence() || areas.size() == 0) throw ConfigError("model.areas", "expected a non-empty list");
            c.areas.clear();
            for (std::size_t i = 0; i < areas.size(); ++i) c.areas.push_back(area(areas[i], index("model.areas", i)));
        }
        if (const auto att = m["attacked"]) c.attacked = strings(att, "model.attacked");
    }

    if (const auto a = section("attack")) {
        check_keys(a, "attack", {"basis", "polytope", "alpha", "f", "zero"});
        if (const auto b = a["basis"]) {
            if (b.IsScalar() && b.Scalar() == "auto") {
                c.basis.reset();
            } else {
                c.basis = matrix(b, "attack.basis");
            }
        }
        if (const auto p = a["polytope"]) {
            if (!p.IsMap() || !p["A"] || !p["b"]) throw ConfigError("attack.polytope", "needs A and b");
            check_keys(p, "attack.polytope", {"A", "b"});
            c.polytope_a = matrix(p["A"], "attack.polytope.A");
            c.polytope_b = vector(p["b"], "attack.polytope.b");
            if (c.polytope_a.rows() != c.polytope_b.size()) {
                throw ConfigError("attack.polytope.b", "length must equal the row count of A");
            }
        }
        c.attack = attack_choice(a, "attack", c.attack);
    }

    if (const auto d = section("design")) {
        check_keys(d, "design", {"kind", "degree", "eta", "pole", "rank_tol"});
        read(d, "degree", "design", c.design.degree);
        read(d, "eta", "design", c.design.eta);
        read(d, "pole", "design", c.design.pole);
        read(d, "rank_tol", "design", c.design.rank_tol);
        if (const auto k = d["kind"]) {
            const auto kind = scalar<std::string>(k, "design.kind");
            if (kind == "robust") {
                c.design.kind = DesignKind::Robust;
            } else if (kind == "steady-state") {
                c.design.kind = DesignKind::SteadyState;
            } else {
                throw ConfigError("design.kind", "expected robust or steady-state, got '" + kind + "'");
            }
        }
        if (!(c.design.eta > 0.0)) throw ConfigError("design.eta", "must be positive");
        if (!(c.design.pole > 0.0 && c.design.pole < 1.0)) throw ConfigError("design.pole", "must lie in (0, 1)");
    }

    if (const auto s = section("scenario")) {
        check_keys(s, "scenario", {"horizon", "onset", "seed", "inject", "noise", "loads", "load_series"});
        read(s, "horizon", "scenario", c.horizon);
        read(s, "onset", "scenario", c.onset);
        read(s, "seed", "scenario", c.seed);
        read(s, "inject", "scenario", c.inject);
        read(s, "noise", "scenario", c.noisy);
        if (const auto l = s["loads"]) c.load_std = number_map(l, "scenario.loads");
        if (const auto ls = s["load_series"]) {
            if (!ls.IsSequence()) throw ConfigError("scenario.load_series", "expected a list of rows");
            for (std::size_t i = 0; i < ls.size(); ++i) {
                c.load_series.push_back(vector(ls[i], index("scenario.load_series", i)));
            }
        }
        if (!(c.horizon > 0.0)) throw ConfigError("scenario.horizon", "must be positive");
        if (!(c.onset >= 0.0 && c.onset <= c.horizon)) throw ConfigError("scenario.onset", "must lie in [0, horizon]");
    }

    if (const auto n = section("noise")) {
        check_keys(n, "noise", {"process", "measurement"});
        if (const auto p = n["process"]) c.noise.process = number_map(p, "noise.process");
        if (const auto m = n["measurement"]) c.noise.measurement = number_map(m, "noise.measurement");
    }

    if (const auto o = section("output")) {
        check_keys(o, "output", {"dir", "include_states"});
        read(o, "dir", "output", c.output_dir);
        read(o, "include_states", "output", c.include_states);
    }

    if (const auto r = section("report")) {
        check_keys(r, "report", {"basic", "stealthy"});
        check_keys(r["basic"], "report.basic", {"alpha", "f", "zero"});
        check_keys(r["stealthy"], "report.stealthy", {"alpha", "f", "zero"});
        c.report_basic = attack_choice(r["basic"], "report.basic", c.report_basic);
        c.report_stealthy = attack_choice(r["stealthy"], "report.stealthy", c.report_stealthy);
    }

    if (const auto s = section("sweep")) {
        check_keys(s, "sweep", {"poles"});
        if (const auto p = s["poles"]) {
            const Vector poles = vector(p, "sweep.poles");
            c.sweep_poles.assign(poles.data(), poles.data() + poles.size());
            for (std::size_t i = 0; i < c.sweep_poles.size(); ++i) {
                if (!(c.sweep_poles[i] > 0.0 && c.sweep_poles[i] < 1.0)) {
                    throw ConfigError(index("sweep.poles", i), "must lie in (0, 1)");
                }
            }
        }
    }
    return c;
}

[[nodiscard]] inline RunConfig load_config_text(const std::string& text, const std::vector<std::string>& overrides = {}) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("<file>", std::string("YAML syntax error: ") + e.what());
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    for (const auto& o : overrides) apply_override(root, o);
    RunConfig c = parse_config(root);
    c.overrides = overrides;
    return c;
}

[[nodiscard]] inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        throw ConfigError("<file>", "cannot read config file '" + path + "'");
    } catch (const YAML::Exception& e) {
        throw ConfigError("<file>", std::string("YAML syntax error: ") + e.what());
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    for (const auto& o : overrides) apply_override(root, o);
    RunConfig c = parse_config(root);
    c.overrides = overrides;
    return c;
}

} // namespace fdi
