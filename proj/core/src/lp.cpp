#include "detloop/lp.hpp"

#include <cmath>

#include "detloop/errors.hpp"

namespace detloop {
namespace {

constexpr double kEps = 1e-9;

struct Tableau {
  int m = 0, n = 0;                    // constraint rows, columns excluding rhs
  std::vector<std::vector<double>> t;  // m rows + objective row, n+1 columns
  std::vector<int> basis;
  long iters = 0;

  double& rhs(int i) { return t[i][n]; }

  void pivot(int r, int c) {
    const double pv = t[r][c];
    for (double& v : t[r]) v /= pv;
    for (int i = 0; i <= m; ++i) {
      if (i == r) continue;
      const double f = t[i][c];
      if (f == 0.0) continue;
      for (int j = 0; j <= n; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = c;
  }

  // Minimizes the objective row (reduced costs in t[m]) over allowed columns.
  LpStatus run(const std::vector<char>& allowed, long max_iter) {
    while (true) {
      if (iters >= max_iter) return LpStatus::IterationLimit;
      int enter = -1;
      for (int j = 0; j < n; ++j)
        if (allowed[j] && t[m][j] < -kEps) {
          enter = j;
          break;
        }
      if (enter < 0) return LpStatus::Optimal;
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        if (t[i][enter] <= kEps) continue;
        const double ratio = t[i][n] / t[i][enter];
        if (leave < 0 || ratio < best - kEps || (std::abs(ratio - best) <= kEps && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
      ++iters;
    }
  }
};

}  // namespace

const char* lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "?";
}

void LinearProgram::add(std::vector<double> row, Relation r, double b) {
  if (static_cast<int>(row.size()) != num_vars) throw DimensionError("LinearProgram::add: row size mismatch");
  rows.push_back(std::move(row));
  rel.push_back(r);
  rhs.push_back(b);
}

LpResult solve_lp(const LinearProgram& lp, long max_iterations) {
  const int m = static_cast<int>(lp.rows.size());
  const int nv = lp.num_vars;
  if (static_cast<int>(lp.objective.size()) != nv || static_cast<int>(lp.rel.size()) != m ||
      static_cast<int>(lp.rhs.size()) != m)
    throw DimensionError("solve_lp: inconsistent program dimensions");

  // Columns: original vars, one slack/surplus per inequality, one artificial per row needing it.
  std::vector<int> slack(m, -1), art(m, -1);
  int n = nv;
  std::vector<double> sign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    Relation r = lp.rel[i];
    if (lp.rhs[i] < 0) {
      sign[i] = -1.0;
      if (r == Relation::Le) r = Relation::Ge;
      else if (r == Relation::Ge) r = Relation::Le;
    }
    if (r != Relation::Eq) slack[i] = n++;
    if (r != Relation::Le) art[i] = n++;
    else art[i] = -2;  // slack is basic
  }
  Tableau tb;
  tb.m = m;
  tb.n = n;
  tb.t.assign(m + 1, std::vector<double>(n + 1, 0.0));
  tb.basis.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    Relation r = lp.rel[i];
    if (sign[i] < 0) r = r == Relation::Le ? Relation::Ge : (r == Relation::Ge ? Relation::Le : r);
    for (int j = 0; j < nv; ++j) tb.t[i][j] = sign[i] * lp.rows[i][j];
    tb.t[i][n] = sign[i] * lp.rhs[i];
    if (slack[i] >= 0) tb.t[i][slack[i]] = r == Relation::Le ? 1.0 : -1.0;
    if (art[i] >= 0) {
      tb.t[i][art[i]] = 1.0;
      tb.basis[i] = art[i];
    } else {
      tb.basis[i] = slack[i];
    }
  }
  std::vector<char> is_art(n, 0);
  for (int i = 0; i < m; ++i)
    if (art[i] >= 0) is_art[art[i]] = 1;

  // Phase 1: minimize the sum of artificials.
  for (int i = 0; i < m; ++i)
    if (art[i] >= 0)
      for (int j = 0; j <= n; ++j) tb.t[m][j] -= tb.t[i][j];
  for (int i = 0; i < m; ++i)
    if (art[i] >= 0) tb.t[m][art[i]] = 0.0;
  std::vector<char> all(n, 1);
  LpResult res;
  LpStatus st = tb.run(all, max_iterations);
  if (st == LpStatus::IterationLimit) {
    res.status = st;
    res.iterations = tb.iters;
    return res;
  }
  if (-tb.t[m][n] > 1e-7) {
    res.status = LpStatus::Infeasible;
    res.iterations = tb.iters;
    return res;
  }
  // Drive remaining artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (!is_art[tb.basis[i]]) continue;
    for (int j = 0; j < n; ++j)
      if (!is_art[j] && std::abs(tb.t[i][j]) > kEps) {
        tb.pivot(i, j);
        break;
      }
  }

  // Phase 2: minimize -objective.
  std::fill(tb.t[m].begin(), tb.t[m].end(), 0.0);
  for (int j = 0; j < nv; ++j) tb.t[m][j] = -lp.objective[j];
  for (int i = 0; i < m; ++i) {
    const int b = tb.basis[i];
    const double f = tb.t[m][b];
    if (f == 0.0) continue;
    for (int j = 0; j <= n; ++j) tb.t[m][j] -= f * tb.t[i][j];
  }
  std::vector<char> allowed(n, 1);
  for (int j = 0; j < n; ++j)
    if (is_art[j]) allowed[j] = 0;
  st = tb.run(allowed, max_iterations);
  res.status = st;
  res.iterations = tb.iters;
  if (st != LpStatus::Optimal) return res;
  res.x.assign(nv, 0.0);
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < nv) res.x[tb.basis[i]] = tb.t[i][n];
  res.value = 0.0;
  for (int j = 0; j < nv; ++j) res.value += lp.objective[j] * res.x[j];
  for (int i = 0; i < m; ++i) {
    double lhs = 0.0;
    for (int j = 0; j < nv; ++j) lhs += lp.rows[i][j] * res.x[j];
    const double tol = 1e-9 * std::max(1.0, std::abs(lp.rhs[i]));
    bool ok = lp.rel[i] == Relation::Le ? lhs <= lp.rhs[i] + tol
              : lp.rel[i] == Relation::Ge ? lhs >= lp.rhs[i] - tol
                                          : std::abs(lhs - lp.rhs[i]) <= tol;
    if (!ok) throw LpError("solve_lp: constraint residual above tolerance");
  }
  return res;
}

}  // namespace detloop
