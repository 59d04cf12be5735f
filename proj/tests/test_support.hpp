#pragma once

// Test-only generators. Laws are drawn as random joint tables and pushed
// through from_joint, a different route from the library's ensemble code.

#include <cmath>
#include <random>
#include <vector>

#include "atv/measure.hpp"

namespace atv::testing {

inline std::vector<double> random_joint(std::mt19937_64& rng, std::size_t count, double zero_fraction = 0.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> w(count);
  double total = 0.0;
  for (double& v : w) {
    v = unit(rng) < zero_fraction ? 0.0 : -std::log(1.0 - unit(rng)) + 1e-3;
    total += v;
  }
  if (total == 0.0) {
    w[0] = 1.0;
    total = 1.0;
  }
  for (double& v : w) v /= total;
  return w;
}

inline ProcessLaw random_law(std::mt19937_64& rng, const std::vector<std::size_t>& sizes,
                             double zero_fraction = 0.0) {
  std::vector<Alphabet> alphabets;
  std::size_t count = 1;
  for (auto s : sizes) {
    alphabets.emplace_back(s);
    count *= s;
  }
  const auto table = random_joint(rng, count, zero_fraction);
  return from_joint_dense(table, std::move(alphabets));
}

}  // namespace atv::testing
