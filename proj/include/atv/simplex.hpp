#pragma once

// Dense two-phase tableau simplex for   min c.x  s.t.  A x = b,  x >= 0.
// Rows are scaled to unit max-norm and linearly dependent rows removed up
// front. Dantzig pricing with a Harris ratio test; a long run of degenerate
// pivots switches to Bland's rule, so the method terminates. The tableau is
// rebuilt from the original rows every few hundred pivots and before
// optimality is declared. Sized for desk-scale problems: a few thousand
// columns at most.

#include <cstddef>
#include <span>
#include <vector>

namespace atv {

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-7;
  /// 0 selects 50 * (rows + cols) + 1000.
  std::size_t max_iterations = 0;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  std::vector<double> x;
  /// Basic column per retained constraint row at termination. Linearly
  /// dependent rows are dropped.
  std::vector<std::size_t> basis;
  std::size_t iterations = 0;
};

LpSolution solve_standard_form(const DenseMatrix& a, std::span<const double> b, std::span<const double> c,
                               const LpOptions& options = {});

}  // namespace atv
