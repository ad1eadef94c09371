#pragma once

#include <string>
#include <vector>

namespace detloop {

enum class Relation { Le, Eq, Ge };
enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };
const char* lp_status_name(LpStatus s);

// maximize objective . x  subject to  rows[i] . x (rel[i]) rhs[i],  x >= 0.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<Relation> rel;
  std::vector<double> rhs;

  void add(std::vector<double> row, Relation r, double b);
};

struct LpResult {
  LpStatus status = LpStatus::Optimal;
  double value = 0.0;
  std::vector<double> x;
  long iterations = 0;
};

// Dense two-phase simplex with Bland's rule; residual tolerance 1e-9.
LpResult solve_lp(const LinearProgram& lp, long max_iterations = 200000);

}  // namespace detloop
