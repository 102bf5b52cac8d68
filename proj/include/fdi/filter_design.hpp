#pragma once

// Robust residual-generator design.
//
// Design variable: N_bar = [N_0 ... N_{d_N}], one row of length (d_N+1) n_r.
// Feasible set:    N_bar H_bar = 0 and ||N_bar||_inf <= eta, parameterized as
//                  N_bar = theta Z with Z an orthonormal left null basis.
// Payoff:          J(N_bar, alpha) = max_j |N_j F F_b alpha|.
//
// The exact maximin problem is bilinear. Fixing the auxiliary simplex
// variable to a vertex (block j, sign s) gives one LP per pair:
//     max b'lambda  s.t.  s N_j F F_b = lambda' A,  N_bar feasible, lambda >= 0
// whose value b'lambda lower-bounds min_alpha J for the returned N_bar.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "fdi/errors.hpp"
#include "fdi/lp.hpp"
#include "fdi/numerics.hpp"

namespace fdi {

struct FeasibleSetBasis {
    Matrix z;              // rows span {N_bar : N_bar H_bar = 0}
    double eta = 0.0;
    std::size_t degree = 0;
    Eigen::Index n_r = 0;

    [[nodiscard]] Eigen::Index free_parameters() const { return z.rows(); }
};

[[nodiscard]] inline FeasibleSetBasis feasible_basis(const Matrix& hbar, double eta, std::size_t degree,
                                                     double rank_tol = kDefaultRankTol) {
    if (!(eta > 0.0)) throw std::invalid_argument("feasible_basis: eta must be positive");
    const auto blocks = static_cast<Eigen::Index>(degree + 1);
    if (hbar.rows() % blocks != 0) {
        throw DimensionError("feasible_basis: H_bar row count is not a multiple of d_N + 1");
    }
    return {left_null_basis(hbar, rank_tol), eta, degree, hbar.rows() / blocks};
}

// (block j, sign s) pair of the relaxation; index i = 2j for s = +1, 2j+1 for s = -1.
struct LpIndex {
    std::size_t index = 0;
    std::size_t block = 0;
    int sign = 1;
};

[[nodiscard]] inline LpIndex lp_index(std::size_t i) {
    return {i, i / 2, i % 2 == 0 ? 1 : -1};
}

struct LpIndexResult {
    LpIndex slot;
    LpStatus status = LpStatus::Infeasible;
    double gamma = 0.0;
    Vector nbar;
    Vector multiplier;
    double wall_ms = 0.0;
    std::size_t iterations = 0;
};

enum class DesignKind { Robust, SteadyState };

[[nodiscard]] inline const char* to_string(DesignKind k) {
    return k == DesignKind::Robust ? "robust" : "steady-state";
}

struct FilterDesign {
    Vector nbar;
    std::size_t degree = 0;
    Eigen::Index n_r = 0;
    double pole = 0.8;
    double gamma = 0.0;
    DesignKind kind = DesignKind::Robust;
    std::optional<LpIndex> winner;
    Vector multiplier; // lambda (robust) or z (steady state)
    std::vector<LpIndexResult> lps;
    std::string diagnostic;

    [[nodiscard]] RowVector block(std::size_t j) const {
        return nbar.segment(static_cast<Eigen::Index>(j) * n_r, n_r).transpose();
    }
};

namespace detail {

inline void check_polytope(const Matrix& signature, const Matrix& a, const Vector& b) {
    if (a.cols() != signature.cols()) {
        throw DimensionError("polytope A has " + std::to_string(a.cols()) + " columns, basis size is " +
                             std::to_string(signature.cols()));
    }
    if (a.rows() != b.size()) throw DimensionError("polytope A and b row counts differ");
}

// Rows  Z' theta >= -eta  and  -Z' theta >= -eta  over [theta, extra...].
inline void add_norm_rows(LpProblem& p, const Matrix& z, double eta) {
    const Eigen::Index m = z.rows();
    const Eigen::Index cols = z.cols();
    p.ge_matrix = Matrix::Zero(2 * cols, p.num_variables());
    p.ge_matrix.topLeftCorner(cols, m) = z.transpose();
    p.ge_matrix.bottomLeftCorner(cols, m) = -z.transpose();
    p.ge_rhs = Vector::Constant(2 * cols, -eta);
}

// Shared shape of the robust and steady-state LPs:
//   max b'mu  s.t.  theta * coupling = mu' A,  ||theta Z|| <= eta,  mu >= 0
// where coupling is m x d.
inline LpProblem certificate_lp(const FeasibleSetBasis& basis, const Matrix& coupling, const Matrix& a,
                                const Vector& b) {
    const Eigen::Index m = basis.z.rows();
    const Eigen::Index nb = a.rows();
    const Eigen::Index d = a.cols();
    LpProblem p = LpProblem::with_variables(m + nb, Sense::Maximize);
    p.lower.head(m).setConstant(-kInfinity);
    p.cost.tail(nb) = b;
    p.eq_matrix = Matrix::Zero(d, m + nb);
    p.eq_matrix.leftCols(m) = coupling.transpose();
    p.eq_matrix.rightCols(nb) = -a.transpose();
    p.eq_rhs = Vector::Zero(d);
    add_norm_rows(p, basis.z, basis.eta);
    return p;
}

} // namespace detail

/// Solves the relaxation for one (block, sign) slot. An LP that cannot be
/// solved to optimality yields gamma = 0 and an empty design.
[[nodiscard]] inline LpIndexResult solve_lp_i(std::size_t i, const FeasibleSetBasis& basis, const Matrix& signature,
                                              const Matrix& a, const Vector& b) {
    detail::check_polytope(signature, a, b);
    const LpIndex slot = lp_index(i);
    if (slot.block > basis.degree) {
        throw std::out_of_range("solve_lp_i: index " + std::to_string(i) + " exceeds 2(d_N+1)");
    }
    if (signature.rows() != basis.n_r) throw DimensionError("solve_lp_i: signature rows must equal n_r");

    const auto start = std::chrono::steady_clock::now();
    const Eigen::Index m = basis.z.rows();
    const Matrix coupling =
        slot.sign * basis.z.middleCols(static_cast<Eigen::Index>(slot.block) * basis.n_r, basis.n_r) * signature;
    const LpProblem p = detail::certificate_lp(basis, coupling, a, b);
    const LpSolution sol = solve_lp(p);

    LpIndexResult out;
    out.slot = slot;
    out.status = sol.status;
    out.iterations = sol.iterations;
    if (sol.status == LpStatus::Unbounded) throw EmptyAttackSetError();
    if (sol.status == LpStatus::Optimal) {
        out.gamma = std::max(0.0, sol.objective);
        out.nbar = basis.z.transpose() * sol.x.head(m);
        out.multiplier = sol.x.tail(a.rows());
    } else {
        out.nbar = Vector::Zero(basis.z.cols());
        out.multiplier = Vector::Zero(a.rows());
    }
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// Runs all 2(d_N+1) relaxations and keeps the largest certificate. Ties go
/// to the smallest block, then to sign +1 (i.e. the smallest index).
[[nodiscard]] inline FilterDesign design_robust(const FeasibleSetBasis& basis, const Matrix& signature,
                                                const Matrix& a, const Vector& b, bool parallel = true) {
    const std::size_t count = 2 * (basis.degree + 1);
    std::vector<LpIndexResult> results(count);
    if (parallel) {
        std::vector<std::future<LpIndexResult>> jobs;
        jobs.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            jobs.push_back(std::async(std::launch::async, [&, i] { return solve_lp_i(i, basis, signature, a, b); }));
        }
        for (std::size_t i = 0; i < count; ++i) results[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < count; ++i) results[i] = solve_lp_i(i, basis, signature, a, b);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < count; ++i) {
        const double margin = 1e-9 * std::max(1.0, results[best].gamma);
        if (results[i].gamma > results[best].gamma + margin) best = i;
    }

    FilterDesign d;
    d.kind = DesignKind::Robust;
    d.degree = basis.degree;
    d.n_r = basis.n_r;
    d.winner = results[best].slot;
    d.gamma = results[best].gamma;
    d.nbar = results[best].nbar;
    d.multiplier = results[best].multiplier;
    d.lps = std::move(results);
    if (!(d.gamma > 0.0)) {
        d.gamma = 0.0;
        d.diagnostic = "no relaxation attained a positive certificate; detection of every admissible attack is "
                       "not guaranteed";
    }
    return d;
}

// max_j |N_j F F_b alpha|
[[nodiscard]] inline double evaluate_payoff(const Vector& nbar, const Matrix& signature, const Vector& alpha,
                                            std::size_t degree) {
    const Eigen::Index nr = signature.rows();
    if (nbar.size() != static_cast<Eigen::Index>(degree + 1) * nr) {
        throw DimensionError("evaluate_payoff: N_bar length must be (d_N+1) n_r");
    }
    const Vector column = signature * alpha;
    double worst = 0.0;
    for (std::size_t j = 0; j <= degree; ++j) {
        worst = std::max(worst, std::abs(nbar.segment(static_cast<Eigen::Index>(j) * nr, nr).dot(column)));
    }
    return worst;
}

struct WorstCaseAttack {
    Vector alpha;
    double payoff = 0.0;
};

/// The attacker's best response: min_{A alpha >= b} J(N_bar, alpha), solved
/// in epigraph form over (alpha, t).
[[nodiscard]] inline WorstCaseAttack worst_case_alpha(const Vector& nbar, const Matrix& signature, std::size_t degree,
                                                      const Matrix& a, const Vector& b) {
    detail::check_polytope(signature, a, b);
    const Eigen::Index nr = signature.rows();
    const Eigen::Index d = signature.cols();
    const auto blocks = static_cast<Eigen::Index>(degree + 1);
    if (nbar.size() != blocks * nr) throw DimensionError("worst_case_alpha: N_bar length must be (d_N+1) n_r");

    LpProblem p = LpProblem::with_variables(d + 1, Sense::Minimize);
    p.lower.head(d).setConstant(-kInfinity);
    p.cost[d] = 1.0;
    const Eigen::Index nb = a.rows();
    p.ge_matrix = Matrix::Zero(2 * blocks + nb, d + 1);
    p.ge_rhs = Vector::Zero(2 * blocks + nb);
    for (Eigen::Index j = 0; j < blocks; ++j) {
        const RowVector g = nbar.segment(j * nr, nr).transpose() * signature;
        p.ge_matrix.block(2 * j, 0, 1, d) = -g;
        p.ge_matrix(2 * j, d) = 1.0;
        p.ge_matrix.block(2 * j + 1, 0, 1, d) = g;
        p.ge_matrix(2 * j + 1, d) = 1.0;
    }
    p.ge_matrix.bottomLeftCorner(nb, d) = a;
    p.ge_rhs.tail(nb) = b;

    const LpSolution sol = solve_lp(p);
    if (sol.status == LpStatus::Infeasible) throw EmptyAttackSetError();
    if (sol.status != LpStatus::Optimal) throw NumericError("worst_case_alpha: epigraph LP is unbounded");
    WorstCaseAttack out;
    out.alpha = sol.x.head(d);
    out.payoff = evaluate_payoff(nbar, signature, out.alpha, degree);
    return out;
}

/// Steady-state design: max b'z  s.t.  N_bar F_bar = z' A,  N_bar feasible,
/// z >= 0. A positive value certifies |N(1) F F_b alpha| >= b'z on the
/// whole polytope, i.e. a nonzero residual after transients die out.
[[nodiscard]] inline FilterDesign design_steady_state(const FeasibleSetBasis& basis, const Matrix& fbar,
                                                      const Matrix& a, const Vector& b) {
    if (fbar.rows() != basis.z.cols()) throw DimensionError("design_steady_state: F_bar rows must equal N_bar length");
    detail::check_polytope(fbar, a, b);
    const Eigen::Index m = basis.z.rows();
    const LpProblem p = detail::certificate_lp(basis, basis.z * fbar, a, b);
    const LpSolution sol = solve_lp(p);
    if (sol.status == LpStatus::Unbounded) throw EmptyAttackSetError();

    FilterDesign d;
    d.kind = DesignKind::SteadyState;
    d.degree = basis.degree;
    d.n_r = basis.n_r;
    if (sol.status == LpStatus::Optimal) {
        d.gamma = std::max(0.0, sol.objective);
        d.nbar = basis.z.transpose() * sol.x.head(m);
        d.multiplier = sol.x.tail(a.rows());
    } else {
        d.nbar = Vector::Zero(basis.z.cols());
        d.multiplier = Vector::Zero(a.rows());
    }
    if (!(d.gamma > 0.0)) {
        d.gamma = 0.0;
        d.diagnostic = "steady-state certificate is zero; some admissible attack has zero steady-state residual";
    }
    return d;
}

/// Checks the constraints of the exact (bilinear) reformulation:
///   sum_i (beta_{2i} - beta_{2i+1}) N_i F F_b = lambda' A,
///   1'beta = 1, beta >= 0, lambda >= 0.
[[nodiscard]] inline bool check_theorem_feasible(const Vector& nbar, const Vector& beta, const Vector& lambda,
                                                 const Matrix& signature, const Matrix& a, double tol = 1e-8) {
    const Eigen::Index nr = signature.rows();
    if (nr == 0 || nbar.size() % nr != 0) return false;
    const Eigen::Index blocks = nbar.size() / nr;
    if (beta.size() != 2 * blocks || lambda.size() != a.rows() || a.cols() != signature.cols()) return false;
    if (std::abs(beta.sum() - 1.0) > tol) return false;
    if (beta.size() > 0 && beta.minCoeff() < -tol) return false;
    if (lambda.size() > 0 && lambda.minCoeff() < -tol) return false;
    RowVector lhs = RowVector::Zero(signature.cols());
    for (Eigen::Index i = 0; i < blocks; ++i) {
        lhs += (beta[2 * i] - beta[2 * i + 1]) * (nbar.segment(i * nr, nr).transpose() * signature);
    }
    const RowVector rhs = lambda.transpose() * a;
    const double scale = std::max({1.0, max_abs(lhs), max_abs(rhs)});
    return max_abs(lhs - rhs) <= tol * scale;
}

// Same, additionally requiring N_bar H_bar = 0 and ||N_bar||_inf <= eta.
[[nodiscard]] inline bool check_theorem_feasible(const Vector& nbar, const Vector& beta, const Vector& lambda,
                                                 const Matrix& signature, const Matrix& a, const Matrix& hbar,
                                                 double eta, double tol = 1e-8) {
    if (hbar.rows() != nbar.size()) return false;
    if (max_abs(nbar.transpose() * hbar) > tol) return false;
    if (max_abs(nbar) > eta + 1e-10) return false;
    return check_theorem_feasible(nbar, beta, lambda, signature, a, tol);
}

// The unit beta picked by a relaxation slot.
[[nodiscard]] inline Vector beta_for(const LpIndex& slot, std::size_t degree) {
    Vector beta = Vector::Zero(static_cast<Eigen::Index>(2 * (degree + 1)));
    beta[static_cast<Eigen::Index>(slot.index)] = 1.0;
    return beta;
}


// ---------------------------------------------------------------------------
// Brute-force maximin oracle for tiny instances.
//
// theta is gridded over [-max theta_k, max theta_k] per axis (an LP each) and
// points with ||theta Z||_inf > eta are skipped. For each theta the inner minimum is
// exact: J is linear on every cell of the arrangement {g_j a = 0,
// (g_j -/+ g_k) a = 0} intersected with the polytope, so it is attained at a
// point where d independent constraints from that family are active.
// The estimate is a lower bound on the true maximin value up to `tolerance`.

struct BruteForceResult {
    double gamma = 0.0;
    Vector nbar;
    double grid_step = 0.0;  // widest axis spacing
    double tolerance = 0.0;  // propagated grid error
    std::vector<Vector> polytope_vertices;
};

namespace detail {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

struct Hyperplane {
    RowVector normal;
    double offset = 0.0; // normal * alpha = offset
};

// Calls fn(index list) for every k-subset of {0..n-1}.
template <class Fn>
void for_each_subset(int n, int k, Fn&& fn) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    if (k > n) return;
    while (true) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

inline bool satisfies(const Matrix& a, const Vector& b, const Vector& alpha) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (a.row(i).dot(alpha) < b[i] - 1e-9 * (1.0 + std::abs(b[i]))) return false;
    }
    return true;
}

// Points where d of the hyperplanes meet, kept if inside the polytope.
template <class Fn>
void for_each_candidate(const std::vector<Hyperplane>& planes, const Matrix& a, const Vector& b, int d, Fn&& fn) {
    SmallMatrix m(d, d);
    SmallVector rhs(d);
    for_each_subset(static_cast<int>(planes.size()), d, [&](const std::vector<int>& idx) {
        for (int r = 0; r < d; ++r) {
            const auto& h = planes[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])];
            m.row(r) = h.normal;
            rhs[r] = h.offset;
        }
        Eigen::FullPivLU<SmallMatrix> lu(m);
        if (lu.rank() < d) return;
        const Vector alpha = lu.solve(rhs);
        if (satisfies(a, b, alpha)) fn(alpha);
    });
}

inline std::vector<Hyperplane> facet_planes(const Matrix& a, const Vector& b) {
    std::vector<Hyperplane> out;
    for (Eigen::Index i = 0; i < a.rows(); ++i) out.push_back({a.row(i), b[i]});
    return out;
}

} // namespace detail

namespace detail {

// max theta_k subject to ||theta Z||_inf <= eta (the set is symmetric).
inline double theta_reach(const FeasibleSetBasis& basis, Eigen::Index k) {
    const Eigen::Index m = basis.z.rows();
    const Eigen::Index n = basis.z.cols();
    LpProblem p = LpProblem::with_variables(m, Sense::Maximize);
    p.lower.setConstant(-kInfinity);
    p.cost[k] = 1.0;
    p.ge_matrix.resize(2 * n, m);
    p.ge_matrix << -basis.z.transpose(), basis.z.transpose();
    p.ge_rhs = Vector::Constant(2 * n, -basis.eta);
    const LpSolution sol = solve_lp(p);
    if (sol.status != LpStatus::Optimal) {
        throw std::invalid_argument("brute_force_gamma: basis rows are linearly dependent");
    }
    return sol.objective;
}

} // namespace detail

// Throws unless {A alpha >= b} is nonempty and bounded.
inline void require_bounded_polytope(const Matrix& a, const Vector& b) {
    const Eigen::Index d = a.cols();
    for (Eigen::Index k = 0; k < d; ++k) {
        for (double dir : {1.0, -1.0}) {
            LpProblem p = LpProblem::with_variables(d, Sense::Maximize);
            p.lower.setConstant(-kInfinity);
            p.cost[k] = dir;
            p.ge_matrix = a;
            p.ge_rhs = b;
            const LpSolution sol = solve_lp(p);
            if (sol.status == LpStatus::Infeasible) throw EmptyAttackSetError();
            if (sol.status == LpStatus::Unbounded) {
                throw std::invalid_argument("brute_force_gamma: attack polytope is unbounded");
            }
        }
    }
}

// Exact min over the polytope of max_j |g_j alpha|; g holds one g_j per row.
[[nodiscard]] inline double exact_inner_min(const Matrix& g, const Matrix& a, const Vector& b,
                                            const std::vector<Vector>& vertices) {
    const auto d = static_cast<int>(a.cols());
    std::vector<detail::Hyperplane> planes = detail::facet_planes(a, b);
    auto push = [&](const RowVector& n) {
        if (max_abs(n) > 1e-14) planes.push_back({n, 0.0});
    };
    for (Eigen::Index j = 0; j < g.rows(); ++j) {
        push(g.row(j));
        for (Eigen::Index k = j + 1; k < g.rows(); ++k) {
            push(g.row(j) - g.row(k));
            push(g.row(j) + g.row(k));
        }
    }
    auto payoff = [&](const Vector& alpha) { return (g * alpha).cwiseAbs().maxCoeff(); };
    double best = kInfinity;
    for (const auto& v : vertices) best = std::min(best, payoff(v));
    detail::for_each_candidate(planes, a, b, d, [&](const Vector& alpha) { best = std::min(best, payoff(alpha)); });
    return best;
}

[[nodiscard]] inline BruteForceResult brute_force_gamma(const FeasibleSetBasis& basis, const Matrix& signature,
                                                        const Matrix& a, const Vector& b, int grid_points = 21) {
    detail::check_polytope(signature, a, b);
    const Eigen::Index m = basis.z.rows();
    const Eigen::Index d = a.cols();
    if (m > 3) throw std::invalid_argument("brute_force_gamma: at most 3 free filter parameters");
    if (d < 1 || d > 3) throw std::invalid_argument("brute_force_gamma: basis size must be 1..3");
    if (grid_points < 2) throw std::invalid_argument("brute_force_gamma: grid needs at least 2 points per axis");
    if (signature.rows() != basis.n_r) throw DimensionError("brute_force_gamma: signature rows must equal n_r");
    require_bounded_polytope(a, b);

    BruteForceResult out;
    detail::for_each_candidate(detail::facet_planes(a, b), a, b, static_cast<int>(d),
                               [&](const Vector& v) { out.polytope_vertices.push_back(v); });
    out.nbar = Vector::Zero(basis.z.cols());
    if (m == 0) return out;

    const auto blocks = static_cast<Eigen::Index>(basis.degree + 1);
    const Eigen::Index nr = basis.n_r;
    // g rows per free parameter: gk[k](j, :) = z_k block j * signature.
    std::vector<Matrix> gk(static_cast<std::size_t>(m));
    Vector half_width(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        Matrix g(blocks, d);
        for (Eigen::Index j = 0; j < blocks; ++j) g.row(j) = basis.z.row(k).segment(j * nr, nr) * signature;
        gk[static_cast<std::size_t>(k)] = g;
        half_width[k] = detail::theta_reach(basis, k);
    }

    const Vector steps = half_width * (2.0 / (grid_points - 1));
    out.grid_step = steps.maxCoeff();
    for (Eigen::Index k = 0; k < m; ++k) {
        double reach = 0.0;
        for (const auto& v : out.polytope_vertices) {
            reach = std::max(reach, (gk[static_cast<std::size_t>(k)] * v).cwiseAbs().maxCoeff());
        }
        out.tolerance += steps[k] * reach;
    }

    std::vector<int> counter(static_cast<std::size_t>(m), 0);
    Vector theta(m);
    out.gamma = -kInfinity;
    while (true) {
        for (Eigen::Index k = 0; k < m; ++k) {
            theta[k] = -half_width[k] + steps[k] * counter[static_cast<std::size_t>(k)];
        }
        const Vector nbar = basis.z.transpose() * theta;
        if (max_abs(nbar) <= basis.eta * (1.0 + 1e-12)) {
            Matrix g = Matrix::Zero(blocks, d);
            for (Eigen::Index k = 0; k < m; ++k) g += theta[k] * gk[static_cast<std::size_t>(k)];
            const double value = exact_inner_min(g, a, b, out.polytope_vertices);
            if (value > out.gamma) {
                out.gamma = value;
                out.nbar = nbar;
            }
        }
        Eigen::Index k = 0;
        while (k < m && ++counter[static_cast<std::size_t>(k)] == grid_points) counter[static_cast<std::size_t>(k++)] = 0;
        if (k == m) break;
    }
    out.gamma = std::max(0.0, out.gamma);
    return out;
}

} // namespace fdi
