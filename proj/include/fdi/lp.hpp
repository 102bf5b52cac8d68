#pragma once

// Dense two-phase primal simplex. Problems here have tens to a few hundred
// rows, so the tableau is kept dense and Bland's rule guarantees termination.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "fdi/errors.hpp"
#include "fdi/numerics.hpp"

namespace fdi {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class LpStatus { Optimal, Infeasible, Unbounded };

[[nodiscard]] inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

// Rows of ge_matrix read `ge_matrix * x >= ge_rhs`.
struct LpProblem {
    Sense sense = Sense::Minimize;
    Vector cost;
    Matrix eq_matrix;
    Vector eq_rhs;
    Matrix ge_matrix;
    Vector ge_rhs;
    Vector lower;
    Vector upper;

    // n variables, bounds [0, inf), no constraints.
    [[nodiscard]] static LpProblem with_variables(Eigen::Index n, Sense sense = Sense::Minimize) {
        LpProblem p;
        p.sense = sense;
        p.cost = Vector::Zero(n);
        p.eq_matrix = Matrix(0, n);
        p.eq_rhs = Vector(0);
        p.ge_matrix = Matrix(0, n);
        p.ge_rhs = Vector(0);
        p.lower = Vector::Zero(n);
        p.upper = Vector::Constant(n, kInfinity);
        return p;
    }

    [[nodiscard]] Eigen::Index num_variables() const { return cost.size(); }

    void validate() const {
        const Eigen::Index n = num_variables();
        auto fail = [](const std::string& m) { throw DimensionError("LpProblem: " + m); };
        if (eq_matrix.cols() != n && eq_matrix.rows() > 0) fail("eq_matrix column count differs from variable count");
        if (ge_matrix.cols() != n && ge_matrix.rows() > 0) fail("ge_matrix column count differs from variable count");
        if (eq_matrix.rows() != eq_rhs.size()) fail("eq_rhs length differs from eq_matrix rows");
        if (ge_matrix.rows() != ge_rhs.size()) fail("ge_rhs length differs from ge_matrix rows");
        if (lower.size() != n || upper.size() != n) fail("bound vectors must have one entry per variable");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (lower[j] > upper[j]) fail("lower bound exceeds upper bound for variable " + std::to_string(j));
            if (std::isnan(lower[j]) || std::isnan(upper[j])) fail("NaN bound");
            if (lower[j] == kInfinity || upper[j] == -kInfinity) fail("bound excludes every real value");
        }
        if (!cost.allFinite() || !eq_matrix.allFinite() || !eq_rhs.allFinite() || !ge_matrix.allFinite() ||
            !ge_rhs.allFinite()) {
            fail("non-finite coefficient");
        }
    }
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    Vector x;
    std::size_t iterations = 0;
};

enum class PivotRule { Bland, Dantzig };

struct LpOptions {
    double feasibility_tol = 1e-8;
    double pivot_tol = 1e-10;
    double optimality_tol = 1e-9;
    std::size_t max_iterations = 1'000'000;
    PivotRule rule = PivotRule::Bland;
};

namespace detail {

// x_j = offset + sum coef * y_col over the nonnegative standard-form columns.
struct VariableMap {
    double offset = 0.0;
    std::vector<std::pair<Eigen::Index, double>> terms;
};

class Tableau {
public:
    Tableau(Matrix body, Vector rhs, std::vector<Eigen::Index> basis, const LpOptions& opt)
        : t_(std::move(body)), rhs_(std::move(rhs)), basis_(std::move(basis)), opt_(opt) {}

    enum class Outcome { Optimal, Unbounded };

    // Minimizes cost over the current feasible basis. Columns flagged in
    // `blocked` never enter.
    Outcome minimize(const Vector& cost, const std::vector<bool>& blocked, std::size_t& iterations) {
        Vector reduced = reduced_costs(cost);
        while (true) {
            if (iterations >= opt_.max_iterations) {
                throw NumericError("solve_lp: iteration limit of " + std::to_string(opt_.max_iterations) +
                                   " reached");
            }
            const Eigen::Index entering = choose_entering(reduced, blocked);
            if (entering < 0) return Outcome::Optimal;
            const Eigen::Index row = ratio_test(entering);
            if (row < 0) return Outcome::Unbounded;
            pivot(row, entering, reduced);
            ++iterations;
        }
    }

    void pivot(Eigen::Index row, Eigen::Index col, Vector& reduced) {
        const double piv = t_(row, col);
        const RowVector prow = t_.row(row) / piv;
        const double prhs = rhs_[row] / piv;
        const Vector pcol = t_.col(col);
        t_.noalias() -= pcol * prow;
        rhs_ -= pcol * prhs;
        t_.row(row) = prow;
        rhs_[row] = prhs;
        if (reduced.size() > 0) {
            const double rc = reduced[col];
            reduced -= rc * prow.transpose();
        }
        basis_[static_cast<std::size_t>(row)] = col;
        for (Eigen::Index i = 0; i < rhs_.size(); ++i) {
            if (rhs_[i] < 0.0 && rhs_[i] > -opt_.feasibility_tol) rhs_[i] = 0.0;
        }
    }

    void pivot(Eigen::Index row, Eigen::Index col) {
        Vector none;
        pivot(row, col, none);
    }

    [[nodiscard]] Vector reduced_costs(const Vector& cost) const {
        Vector cb(static_cast<Eigen::Index>(basis_.size()));
        for (std::size_t i = 0; i < basis_.size(); ++i) cb[static_cast<Eigen::Index>(i)] = cost[basis_[i]];
        return cost - t_.transpose() * cb;
    }

    [[nodiscard]] double objective(const Vector& cost) const {
        double z = 0.0;
        for (std::size_t i = 0; i < basis_.size(); ++i) z += cost[basis_[i]] * rhs_[static_cast<Eigen::Index>(i)];
        return z;
    }

    void drop_rows(const std::vector<Eigen::Index>& rows) {
        if (rows.empty()) return;
        std::vector<bool> drop(static_cast<std::size_t>(t_.rows()), false);
        for (auto r : rows) drop[static_cast<std::size_t>(r)] = true;
        const Eigen::Index keep = t_.rows() - static_cast<Eigen::Index>(rows.size());
        Matrix t(keep, t_.cols());
        Vector rhs(keep);
        std::vector<Eigen::Index> basis;
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            if (drop[static_cast<std::size_t>(i)]) continue;
            t.row(k) = t_.row(i);
            rhs[k] = rhs_[i];
            basis.push_back(basis_[static_cast<std::size_t>(i)]);
            ++k;
        }
        t_ = std::move(t);
        rhs_ = std::move(rhs);
        basis_ = std::move(basis);
    }

    [[nodiscard]] const Matrix& body() const { return t_; }
    [[nodiscard]] const Vector& rhs() const { return rhs_; }
    [[nodiscard]] const std::vector<Eigen::Index>& basis() const { return basis_; }

private:
    [[nodiscard]] Eigen::Index choose_entering(const Vector& reduced, const std::vector<bool>& blocked) const {
        Eigen::Index best = -1;
        double most_negative = -opt_.optimality_tol;
        for (Eigen::Index j = 0; j < reduced.size(); ++j) {
            if (blocked[static_cast<std::size_t>(j)]) continue;
            if (reduced[j] < -opt_.optimality_tol) {
                if (opt_.rule == PivotRule::Bland) return j;
                if (reduced[j] < most_negative) {
                    most_negative = reduced[j];
                    best = j;
                }
            }
        }
        return best;
    }

    [[nodiscard]] Eigen::Index ratio_test(Eigen::Index col) const {
        Eigen::Index row = -1;
        double best = kInfinity;
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            const double a = t_(i, col);
            if (a <= opt_.pivot_tol) continue;
            const double ratio = rhs_[i] / a;
            if (row < 0) {
                best = ratio;
                row = i;
                continue;
            }
            const double slack = 1e-12 * std::max(1.0, std::abs(best));
            if (ratio < best - slack) {
                best = ratio;
                row = i;
            } else if (ratio <= best + slack &&
                       basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(row)]) {
                row = i;
            }
        }
        return row;
    }

    Matrix t_;
    Vector rhs_;
    std::vector<Eigen::Index> basis_;
    const LpOptions& opt_;
};

} // namespace detail

/// Solves an LpProblem with the two-phase primal simplex method.
///
/// Bounds are folded into nonnegative standard-form columns: finite lower
/// bounds shift, upper-only bounds reflect, free variables split into a
/// difference. Finite upper bounds on shifted variables become rows.
/// Phase 1 minimizes the sum of artificials; rows whose slack can start in
/// the basis do not get one. The final basic solution is re-solved from the
/// original columns to remove accumulated tableau roundoff.
[[nodiscard]] inline LpSolution solve_lp(const LpProblem& p, const LpOptions& opt = {}) {
    p.validate();
    using detail::VariableMap;
    const Eigen::Index n = p.num_variables();

    std::vector<VariableMap> vars(static_cast<std::size_t>(n));
    Eigen::Index ny = 0;
    struct UpperRow {
        Eigen::Index col;
        double bound;
    };
    std::vector<UpperRow> upper_rows;
    for (Eigen::Index j = 0; j < n; ++j) {
        auto& v = vars[static_cast<std::size_t>(j)];
        const double lo = p.lower[j];
        const double hi = p.upper[j];
        if (std::isfinite(lo)) {
            v.offset = lo;
            v.terms.emplace_back(ny, 1.0);
            if (std::isfinite(hi)) upper_rows.push_back({ny, hi - lo});
            ++ny;
        } else if (std::isfinite(hi)) {
            v.offset = hi;
            v.terms.emplace_back(ny++, -1.0);
        } else {
            v.terms.emplace_back(ny++, 1.0);
            v.terms.emplace_back(ny++, -1.0);
        }
    }

    // Rows over y: equality, >=, and upper-bound <= rows.
    const Eigen::Index n_eq = p.eq_matrix.rows();
    const Eigen::Index n_ge = p.ge_matrix.rows();
    const auto n_up = static_cast<Eigen::Index>(upper_rows.size());
    const Eigen::Index m = n_eq + n_ge + n_up;
    const Eigen::Index n_slack = n_ge + n_up;

    auto transform_row = [&](const RowVector& coeffs, double rhs, RowVector& out, double& out_rhs) {
        out.setZero(ny);
        out_rhs = rhs;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = coeffs[j];
            if (a == 0.0) continue;
            const auto& v = vars[static_cast<std::size_t>(j)];
            out_rhs -= a * v.offset;
            for (const auto& [col, coef] : v.terms) out[col] += a * coef;
        }
    };

    Matrix body = Matrix::Zero(m, ny + n_slack);
    Vector rhs(m);
    std::vector<int> slack_sign(static_cast<std::size_t>(m), 0);
    {
        RowVector row;
        double r = 0.0;
        for (Eigen::Index i = 0; i < n_eq; ++i) {
            transform_row(p.eq_matrix.row(i), p.eq_rhs[i], row, r);
            body.row(i).head(ny) = row;
            rhs[i] = r;
        }
        for (Eigen::Index i = 0; i < n_ge; ++i) {
            transform_row(p.ge_matrix.row(i), p.ge_rhs[i], row, r);
            const Eigen::Index k = n_eq + i;
            body.row(k).head(ny) = row;
            body(k, ny + i) = -1.0;
            slack_sign[static_cast<std::size_t>(k)] = -1;
            rhs[k] = r;
        }
        for (Eigen::Index i = 0; i < n_up; ++i) {
            const Eigen::Index k = n_eq + n_ge + i;
            body(k, upper_rows[static_cast<std::size_t>(i)].col) = 1.0;
            body(k, ny + n_ge + i) = 1.0;
            slack_sign[static_cast<std::size_t>(k)] = 1;
            rhs[k] = upper_rows[static_cast<std::size_t>(i)].bound;
        }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (rhs[i] < 0.0) {
            body.row(i) *= -1.0;
            rhs[i] = -rhs[i];
            slack_sign[static_cast<std::size_t>(i)] *= -1;
        }
    }
    const Matrix standard = body;
    const Vector standard_rhs = rhs;

    // Initial basis: +1 slacks where available, artificials elsewhere.
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m), -1);
    std::vector<Eigen::Index> artificial_rows;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (slack_sign[static_cast<std::size_t>(i)] == 1) {
            const Eigen::Index slack_col = i < n_eq + n_ge ? ny + (i - n_eq) : ny + n_ge + (i - n_eq - n_ge);
            basis[static_cast<std::size_t>(i)] = slack_col;
        } else {
            artificial_rows.push_back(i);
        }
    }
    const Eigen::Index n_real = ny + n_slack;
    const auto n_art = static_cast<Eigen::Index>(artificial_rows.size());
    Matrix full = Matrix::Zero(m, n_real + n_art);
    full.leftCols(n_real) = body;
    for (Eigen::Index a = 0; a < n_art; ++a) {
        const Eigen::Index row = artificial_rows[static_cast<std::size_t>(a)];
        full(row, n_real + a) = 1.0;
        basis[static_cast<std::size_t>(row)] = n_real + a;
    }

    LpSolution sol;
    detail::Tableau tab(std::move(full), rhs, basis, opt);
    const double scale = std::max(1.0, max_abs(standard_rhs));

    if (n_art > 0) {
        Vector phase1_cost = Vector::Zero(n_real + n_art);
        phase1_cost.tail(n_art).setOnes();
        std::vector<bool> blocked(static_cast<std::size_t>(n_real + n_art), false);
        if (tab.minimize(phase1_cost, blocked, sol.iterations) == detail::Tableau::Outcome::Unbounded) {
            throw NumericError("solve_lp: phase 1 reported an unbounded direction");
        }
        if (tab.objective(phase1_cost) > opt.feasibility_tol * scale) {
            sol.status = LpStatus::Infeasible;
            return sol;
        }
        // Drive zero-level artificials out of the basis; rows with no
        // eligible pivot are linearly dependent and get dropped.
        std::vector<Eigen::Index> redundant;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(tab.basis().size()); ++i) {
            if (tab.basis()[static_cast<std::size_t>(i)] < n_real) continue;
            Eigen::Index col = -1;
            double best = opt.pivot_tol;
            for (Eigen::Index j = 0; j < n_real; ++j) {
                const double a = std::abs(tab.body()(i, j));
                if (a > best) {
                    best = a;
                    col = j;
                }
            }
            if (col >= 0) {
                tab.pivot(i, col);
            } else {
                redundant.push_back(i);
            }
        }
        tab.drop_rows(redundant);
    }

    Vector cost = Vector::Zero(n_real + n_art);
    const double sign = p.sense == Sense::Maximize ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (const auto& [col, coef] : vars[static_cast<std::size_t>(j)].terms) cost[col] += sign * p.cost[j] * coef;
    }
    std::vector<bool> blocked(static_cast<std::size_t>(n_real + n_art), false);
    for (Eigen::Index a = 0; a < n_art; ++a) blocked[static_cast<std::size_t>(n_real + a)] = true;
    if (tab.minimize(cost, blocked, sol.iterations) == detail::Tableau::Outcome::Unbounded) {
        sol.status = LpStatus::Unbounded;
        return sol;
    }

    Vector y = Vector::Zero(n_real);
    const auto& final_basis = tab.basis();
    for (std::size_t i = 0; i < final_basis.size(); ++i) {
        if (final_basis[i] < n_real) y[final_basis[i]] = tab.rhs()[static_cast<Eigen::Index>(i)];
    }
    // Refinement: solve B y_B = b with the untouched standard-form columns.
    {
        std::vector<Eigen::Index> cols;
        for (auto c : final_basis) {
            if (c < n_real) cols.push_back(c);
        }
        if (!cols.empty() && m > 0) {
            Matrix basic(m, static_cast<Eigen::Index>(cols.size()));
            for (std::size_t k = 0; k < cols.size(); ++k) basic.col(static_cast<Eigen::Index>(k)) = standard.col(cols[k]);
            Eigen::ColPivHouseholderQR<Matrix> qr(basic);
            if (qr.rank() == basic.cols()) {
                const Vector yb = qr.solve(standard_rhs);
                if (yb.allFinite() && (basic * yb - standard_rhs).cwiseAbs().maxCoeff() <= 1e-9 * scale &&
                    yb.minCoeff() >= -opt.feasibility_tol) {
                    for (std::size_t k = 0; k < cols.size(); ++k) {
                        y[cols[k]] = std::max(0.0, yb[static_cast<Eigen::Index>(k)]);
                    }
                }
            }
        }
    }

    sol.x = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& v = vars[static_cast<std::size_t>(j)];
        double value = v.offset;
        for (const auto& [col, coef] : v.terms) value += coef * y[col];
        sol.x[j] = value;
    }
    sol.objective = p.cost.dot(sol.x);
    sol.status = LpStatus::Optimal;
    return sol;
}

// Largest violation of any constraint or bound at x; 0 when feasible.
[[nodiscard]] inline double max_violation(const LpProblem& p, const Vector& x) {
    double v = 0.0;
    if (p.eq_matrix.rows() > 0) v = std::max(v, max_abs(p.eq_matrix * x - p.eq_rhs));
    if (p.ge_matrix.rows() > 0) v = std::max(v, (p.ge_rhs - p.ge_matrix * x).maxCoeff());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        v = std::max(v, p.lower[j] - x[j]);
        v = std::max(v, x[j] - p.upper[j]);
    }
    return v;
}

} // namespace fdi
