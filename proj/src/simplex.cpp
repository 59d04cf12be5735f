#include "atv/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "atv/error.hpp"

namespace atv {

namespace {

// Tableau over the original columns followed by one artificial column per
// row and the right-hand side as the last column.
class Tableau {
 public:
  Tableau(const DenseMatrix& a, std::span<const double> b, const LpOptions& options)
      : structural_(a.cols()), options_(options) {
    const std::size_t m = a.rows();
    width_ = structural_ + m + 1;
    rows_.assign(m, std::vector<double>(width_, 0.0));
    basis_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double sign = b[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < structural_; ++j) rows_[i][j] = sign * a(i, j);
      rows_[i][structural_ + i] = 1.0;
      rows_[i][width_ - 1] = sign * b[i];
      basis_[i] = structural_ + i;
    }
    original_ = rows_;
    row_ids_.resize(m);
    for (std::size_t i = 0; i < m; ++i) row_ids_[i] = i;
    const std::size_t limit = options.max_iterations != 0 ? options.max_iterations : 50 * (m + width_) + 1000;
    iteration_budget_ = limit;
  }

  // Runs simplex iterations for `cost` with entering candidates restricted
  // to columns [0, enter_limit).
  // The tableau is rebuilt from the original rows every few hundred pivots
  // and before optimality is declared.
  LpStatus optimize(const std::vector<double>& cost, std::size_t enter_limit) {
    const std::size_t refactor_every = std::max<std::size_t>(50, rows_.size() / 4);
    refactor();
    price(cost);
    bool fresh = true;
    std::size_t since_refactor = 0;
    for (;;) {
      if (since_refactor == refactor_every) {
        refactor();
        price(cost);
        fresh = true;
        since_refactor = 0;
      }
      // Dantzig pricing with largest-pivot ratio ties; after a long run of
      // degenerate pivots both switch to Bland's smallest-index rule so the
      // method cannot cycle.
      const bool bland = degenerate_streak_ > kBlandAfter;
      std::size_t enter = enter_limit;
      double most_negative = -options_.optimality_tol;
      for (std::size_t j = 0; j < enter_limit; ++j) {
        if (reduced_[j] < most_negative) {
          enter = j;
          if (bland) break;
          most_negative = reduced_[j];
        }
      }
      if (enter == enter_limit) {
        if (fresh) return LpStatus::Optimal;
        since_refactor = refactor_every;
        continue;
      }

      // Harris ratio test: the step bound allows each basic variable to dip
      // by feasibility_tol, and among rows within it the largest pivot wins
      // (the smallest basic index in Bland mode).
      double bound = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        const double coef = rows_[i][enter];
        if (coef <= options_.pivot_tol) continue;
        bound = std::min(bound, (std::max(rows_[i][width_ - 1], 0.0) + options_.feasibility_tol) / coef);
      }
      std::size_t leave = rows_.size();
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < rows_.size() && bound < std::numeric_limits<double>::infinity(); ++i) {
        const double coef = rows_[i][enter];
        if (coef <= options_.pivot_tol) continue;
        const double ratio = std::max(rows_[i][width_ - 1], 0.0) / coef;
        if (ratio > bound) continue;
        const bool take = leave == rows_.size() ||
                          (bland ? basis_[i] < basis_[leave] : coef > rows_[leave][enter]);
        if (take) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave == rows_.size()) return LpStatus::Unbounded;
      if (iterations_ == iteration_budget_) return LpStatus::IterationLimit;
      degenerate_streak_ = best_ratio <= 1e-12 ? degenerate_streak_ + 1 : 0;
      pivot(leave, enter);
      fresh = false;
      ++since_refactor;
    }
  }

  void price(const std::vector<double>& cost) {
    reduced_.assign(width_ - 1, 0.0);
    for (std::size_t j = 0; j + 1 < width_; ++j) {
      double z = cost[j];
      for (std::size_t i = 0; i < rows_.size(); ++i) z -= cost[basis_[i]] * rows_[i][j];
      reduced_[j] = z;
    }
  }

  // rows_ = B^{-1} [A | I | b] for the current basis B, by Gaussian
  // elimination with partial pivoting. Left unchanged if B is singular.
  void refactor() {
    const std::size_t k = rows_.size();
    if (k == 0) return;
    std::vector<std::vector<double>> aug(k);
    for (std::size_t r = 0; r < k; ++r) {
      const auto& src = original_[row_ids_[r]];
      aug[r].resize(k + width_);
      for (std::size_t i = 0; i < k; ++i) aug[r][i] = src[basis_[i]];
      std::copy(src.begin(), src.end(), aug[r].begin() + static_cast<std::ptrdiff_t>(k));
    }
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t p = c;
      for (std::size_t r = c + 1; r < k; ++r) {
        if (std::abs(aug[r][c]) > std::abs(aug[p][c])) p = r;
      }
      if (std::abs(aug[p][c]) < 1e-13) return;
      std::swap(aug[p], aug[c]);
      const double inv = 1.0 / aug[c][c];
      for (double& v : aug[c]) v *= inv;
      for (std::size_t r = 0; r < k; ++r) {
        if (r == c) continue;
        const double f = aug[r][c];
        if (f == 0.0) continue;
        for (std::size_t j = c; j < aug[r].size(); ++j) aug[r][j] -= f * aug[c][j];
      }
    }
    // Row c of the solved system belongs to basic column basis_[c].
    for (std::size_t c = 0; c < k; ++c) {
      std::copy(aug[c].begin() + static_cast<std::ptrdiff_t>(k), aug[c].end(), rows_[c].begin());
      for (std::size_t i = 0; i < k; ++i) rows_[c][basis_[i]] = i == c ? 1.0 : 0.0;
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    ++iterations_;
    auto& prow = rows_[r];
    const double inv = 1.0 / prow[c];
    for (double& v : prow) v *= inv;
    prow[c] = 1.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == r) continue;
      const double f = rows_[i][c];
      if (f == 0.0) continue;
      auto& row = rows_[i];
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[c] = 0.0;
    }
    if (!reduced_.empty()) {
      const double f = reduced_[c];
      if (f != 0.0) {
        for (std::size_t j = 0; j + 1 < width_; ++j) reduced_[j] -= f * prow[j];
        reduced_[c] = 0.0;
      }
    }
    basis_[r] = c;
  }

  // After phase 1: pivot basic artificials onto structural columns, or drop
  // their rows when the row has no structural support (dependent row).
  void expel_artificials() {
    for (std::size_t i = 0; i < rows_.size();) {
      if (basis_[i] < structural_) {
        ++i;
        continue;
      }
      std::size_t best = structural_;
      double best_abs = options_.pivot_tol;
      for (std::size_t j = 0; j < structural_; ++j) {
        const double v = std::abs(rows_[i][j]);
        if (v > best_abs) {
          best_abs = v;
          best = j;
        }
      }
      if (best < structural_) {
        reduced_.clear();
        pivot(i, best);
        ++i;
      } else {
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
        row_ids_.erase(row_ids_.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
  }

  double objective(const std::vector<double>& cost) const {
    double v = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) v += cost[basis_[i]] * rows_[i][width_ - 1];
    return v;
  }

  std::vector<double> structural_solution() const {
    std::vector<double> x(structural_, 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (basis_[i] < structural_) x[basis_[i]] = std::max(rows_[i][width_ - 1], 0.0);
    }
    return x;
  }

  std::size_t width() const noexcept { return width_; }
  const std::vector<std::size_t>& basis() const noexcept { return basis_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t structural_;
  std::size_t width_ = 0;
  LpOptions options_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::vector<double>> original_;
  std::vector<std::size_t> row_ids_;  // original row of each tableau row
  std::vector<std::size_t> basis_;
  std::vector<double> reduced_;
  std::size_t iterations_ = 0;
  std::size_t iteration_budget_ = 0;
  std::size_t degenerate_streak_ = 0;
  static constexpr std::size_t kBlandAfter = 50;
};

// Indices of a maximal set of linearly independent rows of [A | b], found
// by incremental elimination against the rows kept so far. Sets
// `consistent` to false when a dependent row disagrees on b.
std::vector<std::size_t> independent_rows(const DenseMatrix& a, std::span<const double> b, double tol,
                                          bool& consistent) {
  const std::size_t n = a.cols();
  std::vector<std::vector<double>> kept;  // reduced rows, b in the last slot
  std::vector<std::size_t> pivots;
  std::vector<std::size_t> ids;
  consistent = true;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::vector<double> row(n + 1);
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = a(i, j);
      norm = std::max(norm, std::abs(row[j]));
    }
    row[n] = b[i];
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const double f = row[pivots[k]];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n; ++j) row[j] -= f * kept[k][j];
    }
    std::size_t p = n;
    double best = tol * std::max(norm, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(row[j]) > best) {
        best = std::abs(row[j]);
        p = j;
      }
    }
    if (p == n) {
      if (std::abs(row[n]) > 1e-9 * std::max(1.0, std::abs(b[i]))) consistent = false;
      continue;
    }
    const double inv = 1.0 / row[p];
    for (double& v : row) v *= inv;
    for (auto& other : kept) {
      const double f = other[p];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n; ++j) other[j] -= f * row[j];
    }
    kept.push_back(std::move(row));
    pivots.push_back(p);
    ids.push_back(i);
  }
  return ids;
}

}  // namespace

LpSolution solve_standard_form(const DenseMatrix& a, std::span<const double> b, std::span<const double> c,
                               const LpOptions& options) {
  if (b.size() != a.rows() || c.size() != a.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "LP dimensions do not match");
  }
  const std::size_t n = a.cols();
  LpSolution out;

  // Each row is scaled to unit max-norm; rows with no coefficients must
  // have b = 0.
  DenseMatrix scaled = a;
  std::vector<double> scaled_b(b.begin(), b.end());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) norm = std::max(norm, std::abs(a(i, j)));
    if (norm == 0.0) {
      if (std::abs(b[i]) > options.feasibility_tol) return out;  // Infeasible
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) scaled(i, j) /= norm;
    scaled_b[i] /= norm;
  }

  bool consistent = true;
  const auto keep = independent_rows(scaled, scaled_b, 1e-10, consistent);
  if (!consistent) return out;  // Infeasible
  DenseMatrix reduced(keep.size(), n);
  std::vector<double> reduced_b(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    for (std::size_t j = 0; j < n; ++j) reduced(r, j) = scaled(keep[r], j);
    reduced_b[r] = scaled_b[keep[r]];
  }
  Tableau t(reduced, reduced_b, options);

  std::vector<double> phase1(t.width() - 1, 0.0);
  std::fill(phase1.begin() + static_cast<std::ptrdiff_t>(n), phase1.end(), 1.0);
  LpStatus status = t.optimize(phase1, t.width() - 1);
  out.iterations = t.iterations();
  if (status == LpStatus::IterationLimit) {
    out.status = status;
    return out;
  }
  double scale = 1.0;
  for (double v : reduced_b) scale += std::abs(v);
  if (t.objective(phase1) > options.feasibility_tol * scale) {
    out.status = LpStatus::Infeasible;
    return out;
  }

  t.expel_artificials();

  std::vector<double> phase2(t.width() - 1, 0.0);
  std::copy(c.begin(), c.end(), phase2.begin());
  status = t.optimize(phase2, n);
  out.status = status;
  out.iterations = t.iterations();
  if (status != LpStatus::Optimal) return out;

  out.x = t.structural_solution();
  out.basis = t.basis();
  out.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.value += c[j] * out.x[j];
  return out;
}

}  // namespace atv
