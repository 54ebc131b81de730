#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vdg {

/// Zero-sum matrix game; entries are the row player's payoff.
struct MatrixGame {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> payoff;  // row-major, rows*cols entries

  double at(std::size_t r, std::size_t c) const { return payoff[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return payoff[r * cols + c]; }
};

struct MatrixGameSolution {
  double value = 0.0;                // primal LP optimum
  double dual_value = 0.0;           // independent run on the transpose
  std::vector<double> row_strategy;  // optimal mix for the maximizer
  std::vector<double> col_strategy;  // optimal mix for the minimizer
};

/// Numerical failure inside the solver (pivot limit, duality gap).
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what_) : std::runtime_error(what_) {}
};

/// Solves the game by linear programming: the matrix is shifted
/// positive, the column player's LP is run with Bland's rule, and the
/// row side is obtained from a second, independent LP on the negated
/// transpose. The two optima must agree within 1e-6 or SolverError is
/// thrown naming the matrix dimensions.
MatrixGameSolution solve_matrix_game(const MatrixGame& game);

}  // namespace vdg
