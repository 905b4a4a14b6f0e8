#include "lpgd/sudoku.hpp"

#include "lpgd/rng.hpp"

namespace lpgd {

namespace {

inline int var_index(int row, int col, int digit) {
  return (row * kSudokuSize + col) * kSudokuSize + digit;
}

inline int block_of(int row, int col) {
  return (row / 2) * 2 + col / 2;
}

bool placement_ok(const std::array<int, kSudokuCells>& board, int cell,
                  int digit) {
  const int row = cell / kSudokuSize;
  const int col = cell % kSudokuSize;
  for (int c = 0; c < kSudokuSize; ++c)
    if (c != col && board[row * kSudokuSize + c] == digit) return false;
  for (int r = 0; r < kSudokuSize; ++r)
    if (r != row && board[r * kSudokuSize + col] == digit) return false;
  const int br = (row / 2) * 2, bc = (col / 2) * 2;
  for (int r = br; r < br + 2; ++r)
    for (int c = bc; c < bc + 2; ++c)
      if ((r != row || c != col) && board[r * kSudokuSize + c] == digit)
        return false;
  return true;
}

bool fill_board(std::array<int, kSudokuCells>& board, int cell, Rng& rng) {
  if (cell == kSudokuCells) return true;
  std::vector<int> digits{0, 1, 2, 3};
  rng.shuffle(digits);
  for (int d : digits) {
    if (!placement_ok(board, cell, d)) continue;
    board[cell] = d;
    if (fill_board(board, cell + 1, rng)) return true;
    board[cell] = -1;
  }
  return false;
}

VectorXd one_hot(const std::array<int, kSudokuCells>& board,
                 const std::array<bool, kSudokuCells>& keep) {
  VectorXd x = VectorXd::Zero(kSudokuVars);
  for (int cell = 0; cell < kSudokuCells; ++cell)
    if (keep[cell])
      x[cell * kSudokuSize + board[cell]] = 1.0;
  return x;
}

}  // namespace

std::vector<SudokuInstance> generate_sudoku_dataset(int count, int givens,
                                                    std::uint64_t seed) {
  if (count < 1) throw Error("count must be >= 1");
  if (givens < 0 || givens > kSudokuCells)
    throw Error("givens must be in [0, 16]");
  Rng rng(seed);
  std::vector<SudokuInstance> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    std::array<int, kSudokuCells> board;
    board.fill(-1);
    if (!fill_board(board, 0, rng))
      throw Error("backtracking failed");  // cannot happen at 4x4
    std::vector<int> cells(kSudokuCells);
    for (int i = 0; i < kSudokuCells; ++i) cells[i] = i;
    rng.shuffle(cells);
    SudokuInstance inst;
    inst.given.fill(false);
    for (int i = 0; i < givens; ++i) inst.given[cells[i]] = true;
    std::array<bool, kSudokuCells> all;
    all.fill(true);
    inst.x_true = one_hot(board, all);
    inst.x_inc = one_hot(board, inst.given);
    out.push_back(std::move(inst));
  }
  return out;
}

std::array<int, kSudokuCells> argmax_board(const VectorXd& x) {
  if (x.size() != kSudokuVars)
    throw DimensionMismatch("expected a length-64 one-hot vector");
  std::array<int, kSudokuCells> board{};
  for (int cell = 0; cell < kSudokuCells; ++cell) {
    int best = 0;
    for (int d = 1; d < kSudokuSize; ++d)
      if (x[cell * kSudokuSize + d] > x[cell * kSudokuSize + best]) best = d;
    board[cell] = best;
  }
  return board;
}

int count_violated_constraints(const std::array<int, kSudokuCells>& board) {
  int violated = 0;
  // Cell constraints hold by construction of a digit board.
  auto check_group = [&](auto&& cell_at) {
    for (int g = 0; g < kSudokuSize; ++g)
      for (int d = 0; d < kSudokuSize; ++d) {
        int cnt = 0;
        for (int i = 0; i < kSudokuSize; ++i)
          if (board[cell_at(g, i)] == d) ++cnt;
        if (cnt != 1) ++violated;
      }
  };
  check_group([](int r, int i) { return r * kSudokuSize + i; });  // rows
  check_group([](int c, int i) { return i * kSudokuSize + c; });  // columns
  check_group([](int b, int i) {                                  // blocks
    const int br = (b / 2) * 2, bc = (b % 2) * 2;
    return (br + i / 2) * kSudokuSize + (bc + i % 2);
  });
  return violated;
}

bool board_valid(const std::array<int, kSudokuCells>& board) {
  return count_violated_constraints(board) == 0;
}

ProblemParameters sudoku_rule_problem() {
  ProblemParameters p;
  p.c = VectorXd::Zero(kSudokuVars);
  p.lo = VectorXd::Zero(kSudokuVars);
  p.hi = VectorXd::Ones(kSudokuVars);
  MatrixXd A = MatrixXd::Zero(kSudokuConstraints, kSudokuVars);
  int row = 0;
  for (int cell = 0; cell < kSudokuCells; ++cell, ++row)
    for (int d = 0; d < kSudokuSize; ++d) A(row, cell * kSudokuSize + d) = 1;
  for (int r = 0; r < kSudokuSize; ++r)
    for (int d = 0; d < kSudokuSize; ++d, ++row)
      for (int c = 0; c < kSudokuSize; ++c) A(row, var_index(r, c, d)) = 1;
  for (int c = 0; c < kSudokuSize; ++c)
    for (int d = 0; d < kSudokuSize; ++d, ++row)
      for (int r = 0; r < kSudokuSize; ++r) A(row, var_index(r, c, d)) = 1;
  for (int b = 0; b < kSudokuSize; ++b)
    for (int d = 0; d < kSudokuSize; ++d, ++row) {
      const int br = (b / 2) * 2, bc = (b % 2) * 2;
      for (int i = 0; i < kSudokuSize; ++i)
        A(row, var_index(br + i / 2, bc + i % 2, d)) = 1;
    }
  p.A = std::move(A);
  p.b = VectorXd::Constant(kSudokuConstraints, -1.0);
  return p;
}

}  // namespace lpgd
