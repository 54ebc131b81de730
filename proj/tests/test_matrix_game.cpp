#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "game_oracle.hpp"
#include "vdg/matrix_game.hpp"

using namespace vdg;
using vdgtest::support_oracle;

namespace {

MatrixGame make_game(std::size_t rows, std::size_t cols, std::vector<double> payoff) {
  return MatrixGame{rows, cols, std::move(payoff)};
}

void check_is_distribution(const std::vector<double>& p, std::size_t size) {
  REQUIRE(p.size() == size);
  double total = 0.0;
  for (double v : p) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(std::abs(total - 1.0) <= 1e-9);
}

void check_equilibrium(const MatrixGame& g, const MatrixGameSolution& sol, double tol) {
  for (std::size_t c = 0; c < g.cols; ++c) {
    double got = 0.0;
    for (std::size_t r = 0; r < g.rows; ++r) got += sol.row_strategy[r] * g.at(r, c);
    CHECK(got >= sol.value - tol);
  }
  for (std::size_t r = 0; r < g.rows; ++r) {
    double got = 0.0;
    for (std::size_t c = 0; c < g.cols; ++c) got += sol.col_strategy[c] * g.at(r, c);
    CHECK(got <= sol.value + tol);
  }
}

}  // namespace

TEST_CASE("pure games solve to their saddle points") {
  SUBCASE("one by one") {
    const auto sol = solve_matrix_game(make_game(1, 1, {5.0}));
    CHECK(sol.value == 5.0);
    CHECK(sol.row_strategy == std::vector<double>{1.0});
    CHECK(sol.col_strategy == std::vector<double>{1.0});
  }
  SUBCASE("dominance leaves one cell") {
    const auto sol = solve_matrix_game(make_game(2, 2, {3, 1, 4, 2}));
    CHECK(std::abs(sol.value - 2.0) <= 1e-9);
    CHECK(std::abs(sol.row_strategy[1] - 1.0) <= 1e-9);
    CHECK(std::abs(sol.col_strategy[1] - 1.0) <= 1e-9);
  }
  SUBCASE("single row picks the cheapest column") {
    const auto sol = solve_matrix_game(make_game(1, 3, {3, 1, 4}));
    CHECK(std::abs(sol.value - 1.0) <= 1e-9);
    CHECK(std::abs(sol.col_strategy[1] - 1.0) <= 1e-9);
  }
  SUBCASE("single column picks the best row") {
    const auto sol = solve_matrix_game(make_game(3, 1, {2, 7, 5}));
    CHECK(std::abs(sol.value - 7.0) <= 1e-9);
    CHECK(std::abs(sol.row_strategy[1] - 1.0) <= 1e-9);
  }
  SUBCASE("flat games are worth their constant") {
    const auto sol = solve_matrix_game(make_game(2, 2, {1, 1, 1, 1}));
    CHECK(std::abs(sol.value - 1.0) <= 1e-9);
    check_is_distribution(sol.row_strategy, 2);
    check_is_distribution(sol.col_strategy, 2);
  }
}

TEST_CASE("classic mixed games have the textbook equilibria") {
  SUBCASE("matching pennies") {
    const auto sol = solve_matrix_game(make_game(2, 2, {1, -1, -1, 1}));
    CHECK(std::abs(sol.value) <= 1e-9);
    CHECK(std::abs(sol.row_strategy[0] - 0.5) <= 1e-9);
    CHECK(std::abs(sol.col_strategy[0] - 0.5) <= 1e-9);
  }
  SUBCASE("rock paper scissors") {
    const auto sol = solve_matrix_game(make_game(3, 3, {0, -1, 1, 1, 0, -1, -1, 1, 0}));
    CHECK(std::abs(sol.value) <= 1e-9);
    for (double p : sol.row_strategy) CHECK(std::abs(p - 1.0 / 3.0) <= 1e-9);
    for (double p : sol.col_strategy) CHECK(std::abs(p - 1.0 / 3.0) <= 1e-9);
  }
  SUBCASE("two by two with a unique interior mix") {
    // value (4*3-1*2)/(4+3-1-2), mixes from the classic determinant form
    const auto sol = solve_matrix_game(make_game(2, 2, {4, 1, 2, 3}));
    CHECK(std::abs(sol.value - 2.5) <= 1e-9);
    CHECK(std::abs(sol.row_strategy[0] - 0.25) <= 1e-9);
    CHECK(std::abs(sol.row_strategy[1] - 0.75) <= 1e-9);
    CHECK(std::abs(sol.col_strategy[0] - 0.5) <= 1e-9);
    CHECK(std::abs(sol.col_strategy[1] - 0.5) <= 1e-9);
  }
}

TEST_CASE("large negative payoffs survive the positivity shift") {
  const auto sol = solve_matrix_game(make_game(2, 2, {-1000, -999, -998, -997.5}));
  CHECK(std::abs(sol.value - (-998.0)) <= 1e-9);
  CHECK(std::abs(sol.row_strategy[1] - 1.0) <= 1e-9);
  CHECK(std::abs(sol.col_strategy[0] - 1.0) <= 1e-9);
}

TEST_CASE("the value shifts and scales with the payoffs") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> entry(-10.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    MatrixGame g = make_game(4, 4, std::vector<double>(16));
    for (auto& v : g.payoff) v = entry(rng);
    const double base = solve_matrix_game(g).value;

    MatrixGame shifted = g;
    for (auto& v : shifted.payoff) v += 321.5;
    CHECK(std::abs(solve_matrix_game(shifted).value - (base + 321.5)) <= 5e-6);

    MatrixGame scaled = g;
    for (auto& v : scaled.payoff) v *= 3.25;
    CHECK(std::abs(solve_matrix_game(scaled).value - 3.25 * base) <= 5e-6);
  }
}

TEST_CASE("random games match the support enumeration oracle") {
  std::mt19937 rng(777);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> real_entry(-10.0, 10.0);
  std::uniform_int_distribution<int> int_entry(-5, 5);

  for (int trial = 0; trial < 150; ++trial) {
    const auto rows = static_cast<std::size_t>(dim(rng));
    const auto cols = static_cast<std::size_t>(dim(rng));
    MatrixGame g = make_game(rows, cols, std::vector<double>(rows * cols));
    // integer grids on odd trials force ties and degenerate supports
    for (auto& v : g.payoff)
      v = (trial % 2) ? static_cast<double>(int_entry(rng)) : real_entry(rng);
    CAPTURE(trial);
    CAPTURE(rows);
    CAPTURE(cols);

    const auto sol = solve_matrix_game(g);
    check_is_distribution(sol.row_strategy, rows);
    check_is_distribution(sol.col_strategy, cols);
    CHECK(std::abs(sol.value - sol.dual_value) <= 1e-6);
    check_equilibrium(g, sol, 2e-6);

    const auto oracle = support_oracle(g);
    REQUIRE(oracle.has_value());
    CHECK(std::abs(oracle->value - sol.value) <= 2e-6);
  }
}

TEST_CASE("an eight by eight game stays within the duality tolerance") {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> entry(-50.0, 50.0);
  MatrixGame g = make_game(8, 8, std::vector<double>(64));
  for (auto& v : g.payoff) v = entry(rng);

  const auto sol = solve_matrix_game(g);
  CHECK(std::abs(sol.value - sol.dual_value) <= 1e-6);
  check_equilibrium(g, sol, 2e-6);
  const auto oracle = support_oracle(g);
  REQUIRE(oracle.has_value());
  CHECK(std::abs(oracle->value - sol.value) <= 2e-6);
}

TEST_CASE("malformed matrices are rejected") {
  CHECK_THROWS_AS(solve_matrix_game(make_game(0, 0, {})), std::invalid_argument);
  CHECK_THROWS_AS(solve_matrix_game(make_game(2, 2, {1, 2, 3})), std::invalid_argument);
  CHECK_THROWS_AS(
      solve_matrix_game(make_game(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()})),
      std::invalid_argument);
  CHECK_THROWS_AS(
      solve_matrix_game(make_game(1, 2, {1.0, std::numeric_limits<double>::infinity()})),
      std::invalid_argument);
}
