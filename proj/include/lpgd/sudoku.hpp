#pragma once

#include "lpgd/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace lpgd {

// 4x4 boards in one-hot encoding: index (row*4 + col)*4 + digit, digits
// 0..3, so vectors have length 64. Blocks are the four 2x2 squares.
inline constexpr int kSudokuSize = 4;
inline constexpr int kSudokuCells = 16;
inline constexpr int kSudokuVars = 64;
// Uniqueness constraints: 16 per group (cells, rows, columns, blocks).
inline constexpr int kSudokuConstraints = 64;

struct SudokuInstance {
  VectorXd x_inc;               // one-hot of the given cells, zero elsewhere
  VectorXd x_true;              // solved board, one-hot
  std::array<bool, kSudokuCells> given{};
};

// Deterministic backtracking generator: `count` solved boards with `givens`
// clues each (0 <= givens <= 16).
std::vector<SudokuInstance> generate_sudoku_dataset(int count, int givens,
                                                    std::uint64_t seed);

// Argmax over the digit dimension; ties resolve to the smallest digit.
std::array<int, kSudokuCells> argmax_board(const VectorXd& x);

// Number of violated uniqueness constraints (out of kSudokuConstraints) for
// a digit board.
int count_violated_constraints(const std::array<int, kSudokuCells>& board);

bool board_valid(const std::array<int, kSudokuCells>& board);

// Ground-truth rule system A x + b = 0 over [0,1]^64: every uniqueness group
// sums to one. 64 rows (rank 39). Used by tests and sanity experiments, not
// by training, which learns its own constraint matrix.
ProblemParameters sudoku_rule_problem();

}  // namespace lpgd
