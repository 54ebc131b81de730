#include "vdg/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vdg {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kGapTolerance = 1e-6;
constexpr std::size_t kMaxPivots = 100000;

// maximize sum(u) subject to A u <= 1, u >= 0, for A with all entries
// >= 1. Dense tableau simplex with Bland's rule, so no cycling; the
// all-slack basis is feasible and the constraints bound the feasible
// region, so the loop terminates at an optimum.
struct ColumnLp {
  double objective = 0.0;
  std::vector<double> u;
};

ColumnLp positive_column_lp(std::size_t m, std::size_t k, const std::vector<double>& a) {
  const std::size_t width = k + m + 1;  // variables, slacks, rhs
  std::vector<double> t((m + 1) * width, 0.0);
  auto row = [&](std::size_t i) { return t.data() + i * width; };

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) row(i)[j] = a[i * k + j];
    row(i)[k + i] = 1.0;
    row(i)[width - 1] = 1.0;
  }
  for (std::size_t j = 0; j < k; ++j) row(m)[j] = -1.0;

  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = k + i;

  for (std::size_t iter = 0;; ++iter) {
    if (iter > kMaxPivots) throw SolverError("simplex pivot limit reached");

    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (row(m)[j] < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double coef = row(i)[enter];
      if (coef > kPivotEps) {
        const double ratio = row(i)[width - 1] / coef;
        if (ratio < best - kPivotEps ||
            (ratio < best + kPivotEps && (leave == m || basis[i] < basis[leave]))) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave == m) throw SolverError("simplex detected an unbounded column LP");

    const double pivot = row(leave)[enter];
    for (std::size_t j = 0; j < width; ++j) row(leave)[j] /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double factor = row(i)[enter];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) row(i)[j] -= factor * row(leave)[j];
    }
    basis[leave] = enter;
  }

  ColumnLp out;
  out.objective = row(m)[width - 1];
  out.u.assign(k, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < k) out.u[basis[i]] = std::max(0.0, row(i)[width - 1]);
  return out;
}

// Solves the minimizing side of `payoff` (m rows, k cols): shift the
// matrix positive and normalize the column player's LP solution.
// Returns the game value and the column mix.
std::pair<double, std::vector<double>> column_side(std::size_t m, std::size_t k,
                                                   const std::vector<double>& payoff) {
  double lo = payoff[0];
  for (double v : payoff) lo = std::min(lo, v);
  const double shift = 1.0 - lo;

  std::vector<double> a(payoff.size());
  for (std::size_t i = 0; i < payoff.size(); ++i) a[i] = payoff[i] + shift;

  ColumnLp lp = positive_column_lp(m, k, a);
  double total = 0.0;
  for (double v : lp.u) total += v;
  if (!(total > 0.0)) throw SolverError("degenerate column LP solution");

  std::vector<double> mix(k);
  for (std::size_t j = 0; j < k; ++j) mix[j] = lp.u[j] / total;
  return {1.0 / total - shift, std::move(mix)};
}

}  // namespace

MatrixGameSolution solve_matrix_game(const MatrixGame& game) {
  if (game.rows == 0 || game.cols == 0)
    throw std::invalid_argument("solve_matrix_game: empty matrix");
  if (game.payoff.size() != game.rows * game.cols)
    throw std::invalid_argument("solve_matrix_game: payoff size mismatch");
  for (double v : game.payoff)
    if (!std::isfinite(v)) throw std::invalid_argument("solve_matrix_game: non-finite payoff");

  MatrixGameSolution sol;
  auto [value, col_mix] = column_side(game.rows, game.cols, game.payoff);
  sol.value = value;
  sol.col_strategy = std::move(col_mix);

  // Independent run from the row player's perspective: transpose and
  // negate, then the "column" player is the original maximizer.
  std::vector<double> flipped(game.payoff.size());
  for (std::size_t r = 0; r < game.rows; ++r)
    for (std::size_t c = 0; c < game.cols; ++c)
      flipped[c * game.rows + r] = -game.at(r, c);
  auto [neg_value, row_mix] = column_side(game.cols, game.rows, flipped);
  sol.dual_value = -neg_value;
  sol.row_strategy = std::move(row_mix);

  if (std::abs(sol.value - sol.dual_value) > kGapTolerance)
    throw SolverError("duality gap " + std::to_string(std::abs(sol.value - sol.dual_value)) +
                      " above 1e-6 for a " + std::to_string(game.rows) + "x" +
                      std::to_string(game.cols) + " game");
  return sol;
}

}  // namespace vdg
