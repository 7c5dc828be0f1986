#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dbcsched/errors.hpp"

namespace dbcsched {

enum class LpRelation { LessEqual, GreaterEqual, Equal };

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

/// Dense two-phase simplex for desk-scale problems:
/// maximize c.x subject to A x (rel) b, x >= 0.
/// Bland's rule, so it cannot cycle; sizes here are a handful of rows by a
/// few hundred columns.
class SimplexSolver {
public:
    static constexpr double kEps = 1e-9;

    LpResult solve(const std::vector<double>& c,
                   const std::vector<std::vector<double>>& a,
                   const std::vector<LpRelation>& rel,
                   const std::vector<double>& b) {
        const std::size_t m = a.size();
        const std::size_t n = c.size();
        if (rel.size() != m || b.size() != m)
            throw InvalidParameter("simplex: inconsistent constraint sizes");

        // Standard form: flip rows so b >= 0, add slack/surplus, then artificials.
        std::vector<std::vector<double>> rows(m, std::vector<double>(n, 0.0));
        std::vector<double> rhs(m);
        std::vector<LpRelation> r(rel);
        for (std::size_t i = 0; i < m; ++i) {
            if (a[i].size() != n) throw InvalidParameter("simplex: constraint width mismatch");
            double sign = (b[i] < 0.0) ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n; ++j) rows[i][j] = sign * a[i][j];
            rhs[i] = sign * b[i];
            if (sign < 0.0) {
                if (r[i] == LpRelation::LessEqual) r[i] = LpRelation::GreaterEqual;
                else if (r[i] == LpRelation::GreaterEqual) r[i] = LpRelation::LessEqual;
            }
        }
        std::size_t n_slack = 0;
        for (auto rl : r)
            if (rl != LpRelation::Equal) ++n_slack;
        std::size_t total = n + n_slack + m; // + artificials
        tableau_.assign(m + 1, std::vector<double>(total + 1, 0.0));
        basis_.assign(m, 0);
        std::size_t slack_col = n;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) tableau_[i][j] = rows[i][j];
            if (r[i] == LpRelation::LessEqual) tableau_[i][slack_col++] = 1.0;
            else if (r[i] == LpRelation::GreaterEqual) tableau_[i][slack_col++] = -1.0;
            tableau_[i][n + n_slack + i] = 1.0; // artificial
            basis_[i] = n + n_slack + i;
            tableau_[i][total] = rhs[i];
        }
        n_cols_ = total;
        n_rows_ = m;

        // Phase 1: minimize sum of artificials.
        std::vector<double> phase1(total, 0.0);
        for (std::size_t j = n + n_slack; j < total; ++j) phase1[j] = -1.0;
        set_objective(phase1);
        run();
        if (tableau_[m][total] < -kEps) return {LpStatus::Infeasible, 0.0, {}};
        // Drive remaining artificials out of the basis.
        for (std::size_t i = 0; i < m; ++i) {
            if (basis_[i] < n + n_slack) continue;
            bool pivoted = false;
            for (std::size_t j = 0; j < n + n_slack && !pivoted; ++j)
                if (std::abs(tableau_[i][j]) > kEps) { pivot(i, j); pivoted = true; }
            // a fully zero row is redundant; the artificial stays basic at zero
        }

        // Phase 2: original objective, artificials barred from entering.
        barred_from_ = n + n_slack;
        std::vector<double> obj(total, 0.0);
        for (std::size_t j = 0; j < n; ++j) obj[j] = c[j];
        set_objective(obj);
        if (!run()) return {LpStatus::Unbounded, 0.0, {}};

        LpResult res;
        res.status = LpStatus::Optimal;
        res.x.assign(n, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            if (basis_[i] < n) res.x[basis_[i]] = tableau_[i][total];
        res.objective = tableau_[m][total];
        return res;
    }

private:
    std::vector<std::vector<double>> tableau_;
    std::vector<std::size_t> basis_;
    std::size_t n_rows_ = 0, n_cols_ = 0;
    std::size_t barred_from_ = SIZE_MAX;

    void set_objective(const std::vector<double>& c) {
        auto& z = tableau_[n_rows_];
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) z[j] = -c[j];
        for (std::size_t i = 0; i < n_rows_; ++i) {
            double coef = z[basis_[i]];
            if (coef == 0.0) continue;
            for (std::size_t j = 0; j <= n_cols_; ++j) z[j] -= coef * tableau_[i][j];
        }
    }

    void pivot(std::size_t pr, std::size_t pc) {
        double piv = tableau_[pr][pc];
        for (std::size_t j = 0; j <= n_cols_; ++j) tableau_[pr][j] /= piv;
        for (std::size_t i = 0; i <= n_rows_; ++i) {
            if (i == pr) continue;
            double f = tableau_[i][pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_cols_; ++j) tableau_[i][j] -= f * tableau_[pr][j];
        }
        basis_[pr] = pc;
    }

    // returns false on unboundedness
    bool run() {
        auto& z = tableau_[n_rows_];
        while (true) {
            std::size_t pc = SIZE_MAX;
            for (std::size_t j = 0; j < n_cols_; ++j) { // Bland: lowest eligible index
                if (j >= barred_from_) break;
                if (z[j] < -kEps) { pc = j; break; }
            }
            if (pc == SIZE_MAX) return true;
            std::size_t pr = SIZE_MAX;
            double best = 0.0;
            for (std::size_t i = 0; i < n_rows_; ++i) {
                if (tableau_[i][pc] <= kEps) continue;
                double ratio = tableau_[i][n_cols_] / tableau_[i][pc];
                if (pr == SIZE_MAX || ratio < best - kEps ||
                    (ratio < best + kEps && basis_[i] < basis_[pr])) {
                    pr = i;
                    best = ratio;
                }
            }
            if (pr == SIZE_MAX) return false;
            pivot(pr, pc);
        }
    }
};

inline LpResult solve_lp(const std::vector<double>& c,
                         const std::vector<std::vector<double>>& a,
                         const std::vector<LpRelation>& rel,
                         const std::vector<double>& b) {
    SimplexSolver solver;
    return solver.solve(c, a, rel, b);
}

} // namespace dbcsched
