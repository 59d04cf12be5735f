#pragma once

// Exact optimal transport between two finite distributions under an
// arbitrary nonnegative cost matrix. Small problems (both sides of size at
// most 3) enumerate every vertex of the transport polytope; larger ones go
// through the Bland-rule simplex.

#include <cstddef>
#include <vector>

#include "atv/measure.hpp"
#include "atv/simplex.hpp"

namespace atv {

struct OtResult {
  double value = 0.0;
  DenseMatrix plan;
};

/// Largest side handled by vertex enumeration.
inline constexpr std::size_t kEnumerationSide = 3;

OtResult solve_discrete_ot(const Dist& p, const Dist& q, const DenseMatrix& cost);

/// Enumerates basic feasible solutions. Among optimal vertices (value within
/// 1e-12) the one with the largest diagonal mass wins, then the first found.
OtResult solve_ot_by_enumeration(const Dist& p, const Dist& q, const DenseMatrix& cost);

OtResult solve_ot_by_simplex(const Dist& p, const Dist& q, const DenseMatrix& cost,
                             std::vector<std::size_t>* basis_cells = nullptr);

/// Cost 0 on the diagonal and `scale` elsewhere.
DenseMatrix discrete_metric_cost(std::size_t rows, std::size_t cols, double scale = 1.0);

}  // namespace atv
