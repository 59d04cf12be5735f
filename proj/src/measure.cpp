#include "atv/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "atv/error.hpp"

namespace atv {

namespace {

void require_same_size(const Dist& p, const Dist& q) {
  if (p.size() != q.size()) {
    std::ostringstream msg;
    msg << "distributions over alphabets of size " << p.size() << " and " << q.size();
    throw Error(ErrorCode::ShapeMismatch, msg.str());
  }
}

void require_same_shape(const ProcessLaw& mu, const ProcessLaw& nu) {
  if (!mu.same_shape(nu)) {
    throw Error(ErrorCode::ShapeMismatch, "process laws differ in horizon or alphabet sizes");
  }
}

}  // namespace

Alphabet::Alphabet(std::size_t size) : size_(size) {
  if (size == 0) throw Error(ErrorCode::ShapeMismatch, "alphabet size must be positive");
}

Alphabet::Alphabet(std::vector<std::string> labels) : size_(labels.size()) {
  if (size_ == 0) throw Error(ErrorCode::ShapeMismatch, "alphabet size must be positive");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) {
    throw Error(ErrorCode::BadSpec, "alphabet labels must be pairwise distinct");
  }
  labels_ = std::move(labels);
}

Dist::Dist(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error(ErrorCode::ShapeMismatch, "empty distribution");
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w)) throw Error(ErrorCode::BadNormalization, "non-finite weight");
    if (w < 0.0) throw Error(ErrorCode::NegativeMass, "negative weight in distribution");
  }
  for (double w : weights_) {
    if (w > 1.0 + kDistTolerance) throw Error(ErrorCode::BadNormalization, "weight above one");
    total += w;
  }
  if (std::abs(total - 1.0) > kDistTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "distribution sums to " << total;
    throw Error(ErrorCode::BadNormalization, msg.str());
  }
}

Dist Dist::uniform(std::size_t size) {
  return Dist(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Dist Dist::point_mass(std::size_t size, std::size_t index) {
  std::vector<double> w(size, 0.0);
  w.at(index) = 1.0;
  return Dist(std::move(w));
}

SubProb::SubProb(std::vector<double> weights) : weights_(std::move(weights)), mass_(0.0) {
  for (double w : weights_) {
    if (!(w >= 0.0)) throw Error(ErrorCode::NegativeMass, "negative weight in sub-probability");
    mass_ += w;
  }
  if (mass_ > 1.0 + kDistTolerance) {
    throw Error(ErrorCode::BadNormalization, "sub-probability mass exceeds one");
  }
}

ExtReal ExtReal::finite(double value) {
  if (!(value >= 0.0) || std::isinf(value)) {
    throw Error(ErrorCode::BadSpec, "ExtReal::finite needs a finite nonnegative value");
  }
  return ExtReal(value, false);
}

// Grows the node arena depth-first. Node 0 is always the root.
class ProcessLawBuilder {
 public:
  ProcessLawBuilder(std::vector<Alphabet> alphabets, const ProcessLaw::KernelFn& kernel)
      : alphabets_(std::move(alphabets)), kernel_(kernel) {
    if (alphabets_.empty()) throw Error(ErrorCode::ShapeMismatch, "horizon must be positive");
  }

  ProcessLaw build() && {
    PathIndex prefix;
    grow(prefix);
    return ProcessLaw(std::move(alphabets_), std::move(nodes_));
  }

 private:
  ProcessLaw::NodeId grow(PathIndex& prefix) {
    const std::size_t depth = prefix.size();
    Dist dist = kernel_(prefix);
    if (dist.size() != alphabets_[depth].size()) {
      throw Error(ErrorCode::ShapeMismatch, "kernel size differs from its stage alphabet");
    }
    const auto id = static_cast<ProcessLaw::NodeId>(nodes_.size());
    const std::size_t width = dist.size();
    nodes_.push_back({std::move(dist), std::vector<ProcessLaw::NodeId>(width, ProcessLaw::kNoNode)});
    if (depth + 1 == alphabets_.size()) return id;
    for (std::size_t s = 0; s < width; ++s) {
      if (nodes_[static_cast<std::size_t>(id)].dist[s] <= 0.0) continue;
      prefix.push_back(s);
      const auto child = grow(prefix);
      prefix.pop_back();
      nodes_[static_cast<std::size_t>(id)].children[s] = child;
    }
    return id;
  }

  std::vector<Alphabet> alphabets_;
  const ProcessLaw::KernelFn& kernel_;
  std::vector<ProcessLaw::Node> nodes_;
};

ProcessLaw ProcessLaw::from_kernels(std::vector<Alphabet> alphabets, const KernelFn& kernel) {
  return ProcessLawBuilder(std::move(alphabets), kernel).build();
}

ProcessLaw ProcessLaw::product(const std::vector<Dist>& stages) {
  std::vector<Alphabet> alphabets;
  alphabets.reserve(stages.size());
  for (const auto& d : stages) alphabets.emplace_back(d.size());
  return from_kernels(std::move(alphabets),
                      [&](std::span<const std::size_t> prefix) { return stages[prefix.size()]; });
}

std::vector<std::size_t> ProcessLaw::alphabet_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(alphabets_.size());
  for (const auto& a : alphabets_) sizes.push_back(a.size());
  return sizes;
}

std::optional<ProcessLaw::NodeId> ProcessLaw::find(std::span<const std::size_t> prefix) const {
  if (prefix.size() >= horizon()) {
    throw Error(ErrorCode::ShapeMismatch, "prefix must be shorter than the horizon");
  }
  NodeId id = root_id();
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    const auto& n = node(id);
    if (prefix[k] >= n.children.size()) throw Error(ErrorCode::ShapeMismatch, "symbol out of range");
    id = n.children[prefix[k]];
    if (id == kNoNode) return std::nullopt;
  }
  return id;
}

std::size_t ProcessLaw::path_count() const {
  std::size_t count = 1;
  for (const auto& a : alphabets_) count *= a.size();
  return count;
}

std::vector<PathMass> ProcessLaw::support() const {
  std::vector<PathMass> out;
  PathIndex prefix;
  auto walk = [&](auto&& self, NodeId id, double mass) -> void {
    const auto& n = node(id);
    for (std::size_t s = 0; s < n.dist.size(); ++s) {
      const double m = mass * n.dist[s];
      if (m <= 0.0) continue;
      prefix.push_back(s);
      if (prefix.size() == horizon()) {
        out.push_back({prefix, m});
      } else {
        self(self, n.children[s], m);
      }
      prefix.pop_back();
    }
  };
  walk(walk, root_id(), 1.0);
  return out;
}

bool ProcessLaw::same_shape(const ProcessLaw& other) const {
  return alphabet_sizes() == other.alphabet_sizes();
}

std::size_t path_code(std::span<const std::size_t> sizes, std::span<const std::size_t> path) {
  if (path.size() != sizes.size()) throw Error(ErrorCode::ShapeMismatch, "path length differs from horizon");
  std::size_t code = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (path[k] >= sizes[k]) throw Error(ErrorCode::ShapeMismatch, "symbol out of range");
    code = code * sizes[k] + path[k];
  }
  return code;
}

PathIndex path_from_code(std::span<const std::size_t> sizes, std::size_t code) {
  PathIndex path(sizes.size());
  for (std::size_t k = sizes.size(); k-- > 0;) {
    path[k] = code % sizes[k];
    code /= sizes[k];
  }
  return path;
}

namespace {

// l + expm1(-l) = l^2/2 - l^3/6 + ..., nonnegative for every l.
double bregman_log(double l) {
  if (std::abs(l) < 1e-3) {
    return l * l * (0.5 - l * (1.0 / 6.0 - l * (1.0 / 24.0 - l / 120.0)));
  }
  return l + std::expm1(-l);
}

double checked_total(const std::vector<PathMass>& table, std::size_t horizon,
                     std::span<const std::size_t> sizes, JointOptions options) {
  double total = 0.0;
  for (const auto& [path, mass] : table) {
    if (path.size() != horizon) throw Error(ErrorCode::ShapeMismatch, "path length differs from horizon");
    for (std::size_t k = 0; k < horizon; ++k) {
      if (path[k] >= sizes[k]) throw Error(ErrorCode::ShapeMismatch, "symbol out of range");
    }
    if (std::isnan(mass) || std::isinf(mass)) throw Error(ErrorCode::BadNormalization, "non-finite probability");
    if (mass < 0.0) throw Error(ErrorCode::NegativeMass, "negative probability in joint table");
    total += mass;
  }
  if (options.renormalize) {
    if (!(total > 0.0)) throw Error(ErrorCode::BadNormalization, "joint table has zero total mass");
  } else if (std::abs(total - 1.0) > kJointTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "joint table sums to " << total;
    throw Error(ErrorCode::BadNormalization, msg.str());
  }
  return total;
}

}  // namespace

ProcessLaw from_joint(const std::vector<PathMass>& table, std::vector<Alphabet> alphabets,
                      JointOptions options) {
  if (alphabets.empty()) throw Error(ErrorCode::ShapeMismatch, "horizon must be positive");
  std::vector<std::size_t> sizes;
  for (const auto& a : alphabets) sizes.push_back(a.size());
  const std::size_t n = alphabets.size();
  checked_total(table, n, sizes, options);

  std::vector<PathMass> rows;
  rows.reserve(table.size());
  for (const auto& row : table) {
    if (row.mass > 0.0) rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const PathMass& a, const PathMass& b) { return a.path < b.path; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].path == rows[i - 1].path) throw Error(ErrorCode::BadSpec, "duplicate path in joint table");
  }

  // Rows sharing a prefix are contiguous after sorting, so each kernel is
  // the grouped mass of the next symbol over the mass of the prefix.
  return ProcessLaw::from_kernels(std::move(alphabets), [&](std::span<const std::size_t> prefix) {
    const std::size_t k = prefix.size();
    auto lo = std::lower_bound(rows.begin(), rows.end(), prefix, [&](const PathMass& r, auto p) {
      return std::lexicographical_compare(r.path.begin(), r.path.begin() + static_cast<std::ptrdiff_t>(k),
                                          p.begin(), p.end());
    });
    std::vector<double> mass(sizes[k], 0.0);
    double prefix_mass = 0.0;
    for (auto it = lo; it != rows.end() && std::equal(prefix.begin(), prefix.end(), it->path.begin()); ++it) {
      mass[it->path[k]] += it->mass;
      prefix_mass += it->mass;
    }
    for (double& m : mass) m /= prefix_mass;
    return Dist(std::move(mass));
  });
}

ProcessLaw from_joint_dense(std::span<const double> table, std::vector<Alphabet> alphabets,
                            JointOptions options) {
  std::vector<std::size_t> sizes;
  for (const auto& a : alphabets) sizes.push_back(a.size());
  const std::size_t count =
      std::accumulate(sizes.begin(), sizes.end(), std::size_t{1}, std::multiplies<>());
  if (table.size() != count) {
    std::ostringstream msg;
    msg << "dense table has " << table.size() << " entries, expected " << count;
    throw Error(ErrorCode::ShapeMismatch, msg.str());
  }
  std::vector<PathMass> sparse;
  sparse.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    sparse.push_back({path_from_code(sizes, code), table[code]});
  }
  return from_joint(sparse, std::move(alphabets), options);
}

double joint_prob(const ProcessLaw& law, std::span<const std::size_t> path) {
  if (path.size() != law.horizon()) throw Error(ErrorCode::ShapeMismatch, "path length differs from horizon");
  double p = 1.0;
  auto id = ProcessLaw::root_id();
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto& n = law.node(id);
    if (path[k] >= n.dist.size()) throw Error(ErrorCode::ShapeMismatch, "symbol out of range");
    p *= n.dist[path[k]];
    if (p == 0.0) {
      // Validate the rest of the path before reporting zero.
      for (std::size_t j = k + 1; j < path.size(); ++j) {
        if (path[j] >= law.alphabets()[j].size()) throw Error(ErrorCode::ShapeMismatch, "symbol out of range");
      }
      return 0.0;
    }
    if (k + 1 < path.size()) id = n.children[path[k]];
  }
  return p;
}

double tv(const Dist& p, const Dist& q) {
  require_same_size(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return sum;
}

SubProb meet(const Dist& p, const Dist& q) {
  require_same_size(p, q);
  std::vector<double> w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) w[i] = std::min(p[i], q[i]);
  return SubProb(std::move(w));
}

ExtReal kl(const Dist& p, const Dist& q) {
  require_same_size(p, q);
  // Sum of p (l + e^{-l} - 1) + q 1{p = 0}, l = log(p/q): equal to the
  // relative entropy for normalized inputs, with no cancellation between terms.
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) {
      sum += q[i];
      continue;
    }
    if (q[i] == 0.0) return ExtReal::infinity();
    sum += p[i] * bregman_log(std::log1p((p[i] - q[i]) / q[i]));
  }
  return ExtReal::finite(sum);
}

double tv(const ProcessLaw& mu, const ProcessLaw& nu) {
  require_same_shape(mu, nu);
  const std::size_t n = mu.horizon();
  // Walks both trees along the same prefix. Once one side has left its
  // support, the other side's remaining mass is all that contributes.
  auto walk = [&](auto&& self, ProcessLaw::NodeId a, ProcessLaw::NodeId b, double wa, double wb,
                  std::size_t depth) -> double {
    const std::size_t width = mu.alphabets()[depth].size();
    double sum = 0.0;
    for (std::size_t s = 0; s < width; ++s) {
      const double pa = a == ProcessLaw::kNoNode ? 0.0 : wa * mu.node(a).dist[s];
      const double pb = b == ProcessLaw::kNoNode ? 0.0 : wb * nu.node(b).dist[s];
      if (depth + 1 == n) {
        sum += std::abs(pa - pb);
      } else if (pa > 0.0 && pb > 0.0) {
        sum += self(self, mu.node(a).children[s], nu.node(b).children[s], pa, pb, depth + 1);
      } else {
        sum += pa + pb;
      }
    }
    return sum;
  };
  return walk(walk, ProcessLaw::root_id(), ProcessLaw::root_id(), 1.0, 1.0, 0);
}

ExtReal kl(const ProcessLaw& mu, const ProcessLaw& nu) {
  require_same_shape(mu, nu);
  const std::size_t n = mu.horizon();
  // Path sum of mu(x) (l + e^{-l} - 1) plus the nu-mass outside mu's
  // support, l = log(mu(x)/nu(x)) accumulated stagewise with log1p.
  bool infinite = false;
  auto walk = [&](auto&& self, ProcessLaw::NodeId a, ProcessLaw::NodeId b, double wa, double wb,
                  double log_ratio, std::size_t depth) -> double {
    const auto& pa = mu.node(a);
    const auto& pb = nu.node(b);
    double sum = 0.0;
    for (std::size_t s = 0; s < pa.dist.size() && !infinite; ++s) {
      const double p = pa.dist[s];
      const double q = pb.dist[s];
      if (p == 0.0) {
        sum += wb * q;
        continue;
      }
      if (q == 0.0) {
        infinite = true;
        break;
      }
      const double lr = log_ratio + std::log1p((p - q) / q);
      if (depth + 1 == n) {
        sum += wa * p * bregman_log(lr);
      } else {
        sum += self(self, pa.children[s], pb.children[s], wa * p, wb * q, lr, depth + 1);
      }
    }
    return sum;
  };
  const double sum = walk(walk, ProcessLaw::root_id(), ProcessLaw::root_id(), 1.0, 1.0, 0.0, 0);
  if (infinite) return ExtReal::infinity();
  return ExtReal::finite(sum);
}

ExtReal kl_chain(const ProcessLaw& mu, const ProcessLaw& nu) {
  require_same_shape(mu, nu);
  const std::size_t n = mu.horizon();
  bool infinite = false;
  auto walk = [&](auto&& self, ProcessLaw::NodeId a, ProcessLaw::NodeId b, double weight,
                  std::size_t depth) -> double {
    const auto& pa = mu.node(a);
    const auto& pb = nu.node(b);
    const ExtReal stage = kl(pa.dist, pb.dist);
    if (stage.is_infinite()) {
      infinite = true;
      return 0.0;
    }
    double sum = weight * stage.value();
    if (depth + 1 == n) return sum;
    for (std::size_t s = 0; s < pa.dist.size() && !infinite; ++s) {
      if (pa.dist[s] == 0.0) continue;
      // Finite stage entropy implies nu's kernel is positive here too.
      sum += self(self, pa.children[s], pb.children[s], weight * pa.dist[s], depth + 1);
    }
    return sum;
  };
  const double sum = walk(walk, ProcessLaw::root_id(), ProcessLaw::root_id(), 1.0, 0);
  if (infinite) return ExtReal::infinity();
  return ExtReal::finite(std::max(sum, 0.0));
}

}  // namespace atv
