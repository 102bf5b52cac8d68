#pragma once

// Linearized multi-area automatic generation control (AGC) model.
//
// Per-area state order:       [tie_i_j..., omega_i, Pm_i_g..., agc_i]
// Per-area measurement order: [tie_i_j..., omega_i, Pm_i_g..., agc_i, tie_i, Pm_i]
// where tie_i and Pm_i are the measured tie-line and generation totals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "fdi/errors.hpp"
#include "fdi/numerics.hpp"

namespace fdi {

struct Generator {
    double turbine_time_constant = 0.0; // T_ch (s)
    double droop = 0.0;                 // S (p.u.)
    double participation = 0.0;         // phi
};

struct TieLine {
    std::string neighbor;       // name of the connected area
    double synchronizing = 0.0; // T_ij (p.u./rad)
};

struct AreaParams {
    std::string name;
    double inertia = 0.0;        // H_i (s)
    double damping = 0.0;        // D_i (p.u./Hz)
    double frequency_bias = 0.0; // B_i (p.u./Hz)
    double integral_gain = 0.0;  // K_I (1/s)
    std::vector<TieLine> ties;
    std::vector<Generator> generators;

    [[nodiscard]] std::size_t num_states() const { return ties.size() + 2 + generators.size(); }
    [[nodiscard]] std::size_t num_measurements() const { return num_states() + 2; }

    void validate() const {
        const std::string where = "area '" + name + "': ";
        if (!(inertia > 0.0)) throw ValidationError(where + "inertia H must be positive");
        if (!generators.empty()) {
            double sum = 0.0;
            for (const auto& g : generators) {
                if (!(g.turbine_time_constant > 0.0)) throw ValidationError(where + "turbine time constant must be positive");
                if (!(g.droop > 0.0)) throw ValidationError(where + "droop must be positive");
                sum += g.participation;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                throw ValidationError(where + "participation factors sum to " + std::to_string(sum) + ", expected 1");
            }
        }
        for (const auto& t : ties) {
            if (t.neighbor == name) throw ValidationError(where + "tie line to itself");
        }
    }
};

namespace labels {
inline std::string tie(const std::string& i, const std::string& j) { return "tie_" + i + "_" + j; }
inline std::string tie_total(const std::string& i) { return "tie_" + i; }
inline std::string omega(const std::string& i) { return "omega_" + i; }
inline std::string generator(const std::string& i, std::size_t g) { return "Pm_" + i + "_" + std::to_string(g + 1); }
inline std::string generation_total(const std::string& i) { return "Pm_" + i; }
inline std::string agc(const std::string& i) { return "agc_" + i; }
inline std::string load(const std::string& i) { return "load_" + i; }
} // namespace labels

// One entry of an off-diagonal block A_ij: -T_ij placed in the given local
// tie row at the neighbor's frequency column.
struct Coupling {
    std::string neighbor;
    Eigen::Index row = 0;
    double value = 0.0;
};

struct AreaBlocks {
    Matrix a;   // A_ii
    Matrix bd;  // B_{i,d}, one column (the area load)
    Matrix c;   // C_i
    Matrix df;  // D_{i,f}
    Matrix bf;  // B_{i,f}
    std::vector<Coupling> couplings;
    std::vector<std::string> state_labels;
    std::vector<std::string> measurement_labels;
    std::vector<std::string> attack_labels;
    Eigen::Index omega_index = 0;
};

/// Builds the per-area blocks. `attacked` lists measurement labels from any
/// area; only those owned by this area become columns of D_{i,f}/B_{i,f}, in
/// the order given. An attacked per-tie measurement feeds ACE with -K_I, an
/// attacked frequency measurement with -K_I*B_i; totals feed nothing.
[[nodiscard]] inline AreaBlocks build_area(const AreaParams& p, const std::vector<std::string>& attacked = {}) {
    p.validate();
    const auto nt = static_cast<Eigen::Index>(p.ties.size());
    const auto ng = static_cast<Eigen::Index>(p.generators.size());
    const Eigen::Index n = nt + 2 + ng;
    const Eigen::Index w = nt;          // frequency
    const Eigen::Index agc = nt + 1 + ng;
    const double h2 = 2.0 * p.inertia;

    AreaBlocks out;
    out.omega_index = w;
    out.a = Matrix::Zero(n, n);
    for (Eigen::Index t = 0; t < nt; ++t) {
        const auto& tie = p.ties[static_cast<std::size_t>(t)];
        out.a(t, w) = tie.synchronizing;
        out.couplings.push_back({tie.neighbor, t, -tie.synchronizing});
        out.a(w, t) = -1.0 / h2;
        out.a(agc, t) = -p.integral_gain;
    }
    out.a(w, w) = -p.damping / h2;
    out.a(agc, w) = -p.integral_gain * p.frequency_bias;
    for (Eigen::Index g = 0; g < ng; ++g) {
        const auto& gen = p.generators[static_cast<std::size_t>(g)];
        const Eigen::Index r = nt + 1 + g;
        out.a(w, r) = 1.0 / h2;
        out.a(r, w) = -1.0 / (gen.turbine_time_constant * gen.droop);
        out.a(r, r) = -1.0 / gen.turbine_time_constant;
        out.a(r, agc) = gen.participation / gen.turbine_time_constant;
    }

    out.bd = Matrix::Zero(n, 1);
    out.bd(w, 0) = -1.0 / h2;

    out.c = Matrix::Zero(n + 2, n);
    out.c.topRows(n).setIdentity();
    for (Eigen::Index t = 0; t < nt; ++t) out.c(n, t) = 1.0;
    for (Eigen::Index g = 0; g < ng; ++g) out.c(n + 1, nt + 1 + g) = 1.0;

    for (const auto& tie : p.ties) out.state_labels.push_back(labels::tie(p.name, tie.neighbor));
    out.state_labels.push_back(labels::omega(p.name));
    for (std::size_t g = 0; g < p.generators.size(); ++g) out.state_labels.push_back(labels::generator(p.name, g));
    out.state_labels.push_back(labels::agc(p.name));
    out.measurement_labels = out.state_labels;
    out.measurement_labels.push_back(labels::tie_total(p.name));
    out.measurement_labels.push_back(labels::generation_total(p.name));

    std::vector<Eigen::Index> attacked_rows;
    for (const auto& label : attacked) {
        auto it = std::find(out.measurement_labels.begin(), out.measurement_labels.end(), label);
        if (it == out.measurement_labels.end()) continue;
        attacked_rows.push_back(static_cast<Eigen::Index>(it - out.measurement_labels.begin()));
        out.attack_labels.push_back(label);
    }
    const auto nf = static_cast<Eigen::Index>(attacked_rows.size());
    out.df = Matrix::Zero(n + 2, nf);
    out.bf = Matrix::Zero(n, nf);
    for (Eigen::Index k = 0; k < nf; ++k) {
        const Eigen::Index row = attacked_rows[static_cast<std::size_t>(k)];
        out.df(row, k) = 1.0;
        if (row < nt) {
            out.bf(agc, k) = -p.integral_gain;
        } else if (row == w) {
            out.bf(agc, k) = -p.integral_gain * p.frequency_bias;
        }
    }
    return out;
}

/// Continuous closed-loop model dX/dt = A X + B_d d + B_f f, Y = C X + D_f f.
struct ContinuousModel {
    Matrix a;
    Matrix bd;
    Matrix bf;
    Matrix c;
    Matrix df;
    std::vector<std::string> state_labels;
    std::vector<std::string> measurement_labels;
    std::vector<std::string> attack_labels;
    std::vector<std::string> disturbance_labels;
    std::vector<std::string> area_names;
    std::vector<Eigen::Index> state_offsets; // first state of each area

    [[nodiscard]] Eigen::Index num_states() const { return a.rows(); }
    [[nodiscard]] Eigen::Index num_measurements() const { return c.rows(); }
};

/// Assembles the interconnected model. Every attacked label must name a
/// measurement of some area; neighbor sets must be symmetric with T_ij = T_ji.
[[nodiscard]] inline ContinuousModel assemble_system(const std::vector<AreaParams>& areas,
                                                     const std::vector<std::string>& attacked = {}) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < areas.size(); ++i) {
        if (!index.emplace(areas[i].name, i).second) {
            throw ValidationError("duplicate area name '" + areas[i].name + "'");
        }
    }
    for (const auto& area : areas) {
        std::map<std::string, int> seen;
        for (const auto& tie : area.ties) {
            if (++seen[tie.neighbor] > 1) {
                throw ValidationError("area '" + area.name + "' lists neighbor '" + tie.neighbor + "' twice");
            }
            auto it = index.find(tie.neighbor);
            if (it == index.end()) {
                throw ValidationError("area '" + area.name + "' references unknown neighbor '" + tie.neighbor + "'");
            }
            const auto& other = areas[it->second];
            auto back = std::find_if(other.ties.begin(), other.ties.end(),
                                     [&](const TieLine& t) { return t.neighbor == area.name; });
            if (back == other.ties.end()) {
                throw ValidationError("asymmetric topology: '" + area.name + "' lists '" + other.name +
                                      "' but not vice versa");
            }
            if (back->synchronizing != tie.synchronizing) {
                throw ValidationError("asymmetric topology: T_" + area.name + "_" + other.name + " != T_" +
                                      other.name + "_" + area.name);
            }
        }
    }

    std::vector<AreaBlocks> blocks;
    blocks.reserve(areas.size());
    for (const auto& area : areas) blocks.push_back(build_area(area, attacked));

    ContinuousModel m;
    std::vector<Matrix> a_diag, bd, bf, c, df;
    Eigen::Index offset = 0;
    for (std::size_t i = 0; i < areas.size(); ++i) {
        const auto& b = blocks[i];
        a_diag.push_back(b.a);
        bd.push_back(b.bd);
        bf.push_back(b.bf);
        c.push_back(b.c);
        df.push_back(b.df);
        m.state_offsets.push_back(offset);
        offset += b.a.rows();
        m.state_labels.insert(m.state_labels.end(), b.state_labels.begin(), b.state_labels.end());
        m.measurement_labels.insert(m.measurement_labels.end(), b.measurement_labels.begin(),
                                    b.measurement_labels.end());
        m.attack_labels.insert(m.attack_labels.end(), b.attack_labels.begin(), b.attack_labels.end());
        m.disturbance_labels.push_back(labels::load(areas[i].name));
        m.area_names.push_back(areas[i].name);
    }
    for (const auto& label : attacked) {
        if (std::find(m.attack_labels.begin(), m.attack_labels.end(), label) == m.attack_labels.end()) {
            throw ValidationError("attacked measurement '" + label + "' does not exist in the model");
        }
    }
    m.a = block_diagonal(a_diag);
    for (std::size_t i = 0; i < areas.size(); ++i) {
        for (const auto& cp : blocks[i].couplings) {
            const std::size_t j = index.at(cp.neighbor);
            m.a(m.state_offsets[i] + cp.row, m.state_offsets[j] + blocks[j].omega_index) = cp.value;
        }
    }
    m.bd = block_diagonal(bd);
    m.bf = block_diagonal(bf);
    m.c = block_diagonal(c);
    m.df = block_diagonal(df);

    // D_f/B_f columns follow area order; reorder them to the caller's list.
    if (!attacked.empty()) {
        Matrix bf_sorted(m.bf.rows(), m.bf.cols());
        Matrix df_sorted(m.df.rows(), m.df.cols());
        for (std::size_t k = 0; k < attacked.size(); ++k) {
            const auto pos = std::find(m.attack_labels.begin(), m.attack_labels.end(), attacked[k]) -
                             m.attack_labels.begin();
            bf_sorted.col(static_cast<Eigen::Index>(k)) = m.bf.col(pos);
            df_sorted.col(static_cast<Eigen::Index>(k)) = m.df.col(pos);
        }
        m.bf = std::move(bf_sorted);
        m.df = std::move(df_sorted);
        m.attack_labels = attacked;
    }
    return m;
}

// Coupling block A_ij of an assembled model (states of area i by states of area j).
[[nodiscard]] inline Matrix coupling_block(const ContinuousModel& m, std::size_t i, std::size_t j) {
    const Eigen::Index ri = m.state_offsets[i];
    const Eigen::Index rj = m.state_offsets[j];
    const Eigen::Index ni = (i + 1 < m.state_offsets.size() ? m.state_offsets[i + 1] : m.num_states()) - ri;
    const Eigen::Index nj = (j + 1 < m.state_offsets.size() ? m.state_offsets[j + 1] : m.num_states()) - rj;
    return m.a.block(ri, rj, ni, nj);
}

// Matrices of the closed-loop form X+ = A X + B_d d + B_f f, Y = C X + D_f f.
struct ClosedLoopMatrices {
    Matrix a;
    Matrix bd;
    Matrix bf;
    Matrix c;
    Matrix df;
};

struct OpenLoopPlant {
    Matrix a;  // A_x
    Matrix bd; // B_d
    Matrix bu; // B_u
    Matrix c;  // C
    Matrix df; // D_f
};

// Xc+ = A Xc + B Y, u = C Xc + D Y.
struct DynamicController {
    Matrix a;
    Matrix b;
    Matrix c;
    Matrix d;
};

namespace detail {
inline void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw DimensionError(std::string(name) + " must be " + std::to_string(rows) + "x" + std::to_string(cols) +
                             ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

inline void check_plant(const OpenLoopPlant& p) {
    const Eigen::Index nx = p.a.rows();
    require_shape(p.a, nx, nx, "A_x");
    if (p.bd.rows() != nx) throw DimensionError("B_d row count must equal state count");
    if (p.bu.rows() != nx) throw DimensionError("B_u row count must equal state count");
    if (p.c.cols() != nx) throw DimensionError("C column count must equal state count");
    if (p.df.rows() != p.c.rows()) throw DimensionError("D_f row count must equal measurement count");
}
} // namespace detail

/// Closes the loop through a dynamic controller; the augmented measurement
/// is [Y; u] and the augmented state [X; Xc].
[[nodiscard]] inline ClosedLoopMatrices augment_dynamic_controller(const OpenLoopPlant& p,
                                                                   const DynamicController& k) {
    detail::check_plant(p);
    const Eigen::Index nx = p.a.rows();
    const Eigen::Index nu = p.bu.cols();
    const Eigen::Index ny = p.c.rows();
    const Eigen::Index nc = k.a.rows();
    const Eigen::Index nf = p.df.cols();
    const Eigen::Index nd = p.bd.cols();
    detail::require_shape(k.a, nc, nc, "A_c");
    detail::require_shape(k.b, nc, ny, "B_c");
    detail::require_shape(k.c, nu, nc, "C_c");
    detail::require_shape(k.d, nu, ny, "D_c");

    ClosedLoopMatrices out;
    out.a.resize(nx + nc, nx + nc);
    out.a << p.a + p.bu * k.d * p.c, p.bu * k.c, k.b * p.c, k.a;
    out.bd = Matrix::Zero(nx + nc, nd);
    out.bd.topRows(nx) = p.bd;
    out.bf.resize(nx + nc, nf);
    out.bf << p.bu * k.d * p.df, k.b * p.df;
    out.c.resize(ny + nu, nx + nc);
    out.c << p.c, Matrix::Zero(ny, nc), k.d * p.c, k.c;
    out.df.resize(ny + nu, nf);
    out.df << p.df, k.d * p.df;
    return out;
}

/// Static output feedback u = G Y.
[[nodiscard]] inline ClosedLoopMatrices close_loop_static(const OpenLoopPlant& p, const Matrix& g) {
    detail::check_plant(p);
    detail::require_shape(g, p.bu.cols(), p.c.rows(), "G");
    return {p.a + p.bu * g * p.c, p.bd, p.bu * g * p.df, p.c, p.df};
}

} // namespace fdi
