#pragma once

// Finite-alphabet process laws stored as prefix trees of one-step kernels,
// plus the primitive quantities built on them: total variation, the minimum
// measure, and relative entropy.
//
// TV uses the factor-2 convention: tv(p, q) = sum_i |p_i - q_i|, in [0, 2].
// Logarithms are natural.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace atv {

/// Tolerance on a single kernel summing to one.
inline constexpr double kDistTolerance = 1e-12;
/// Tolerance on a joint table summing to one at ingestion.
inline constexpr double kJointTolerance = 1e-9;

class Alphabet {
 public:
  explicit Alphabet(std::size_t size);
  explicit Alphabet(std::vector<std::string> labels);

  std::size_t size() const noexcept { return size_; }
  const std::optional<std::vector<std::string>>& labels() const noexcept { return labels_; }

  bool operator==(const Alphabet&) const = default;

 private:
  std::size_t size_;
  std::optional<std::vector<std::string>> labels_;
};

/// A probability vector over one alphabet.
class Dist {
 public:
  explicit Dist(std::vector<double> weights);

  static Dist uniform(std::size_t size);
  static Dist point_mass(std::size_t size, std::size_t index);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

  bool operator==(const Dist&) const = default;

 private:
  std::vector<double> weights_;
};

/// A nonnegative vector of total mass at most one.
class SubProb {
 public:
  explicit SubProb(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  double mass() const noexcept { return mass_; }

 private:
  std::vector<double> weights_;
  double mass_;
};

/// Nonnegative real extended with +infinity.
class ExtReal {
 public:
  static ExtReal finite(double value);
  static ExtReal infinity() { return ExtReal(std::numeric_limits<double>::infinity(), true); }

  bool is_infinite() const noexcept { return infinite_; }
  /// The finite value, or +inf as a double.
  double value() const noexcept { return value_; }

 private:
  ExtReal(double value, bool infinite) : value_(value), infinite_(infinite) {}

  double value_;
  bool infinite_;
};

/// Symbols x_1, ..., x_k of a path prefix, one alphabet index per stage.
using PathIndex = std::vector<std::size_t>;

/// Weighted full path; the representation of sparse joint tables.
struct PathMass {
  PathIndex path;
  double mass;
};

/// Law of a process on A_1 x ... x A_n, stored through its successive
/// disintegrations: the root kernel is the first-stage marginal and the
/// kernel at prefix x_{1:k} is the conditional law of the next symbol.
/// Prefixes of probability zero have no node.
class ProcessLaw {
 public:
  using NodeId = std::int32_t;
  static constexpr NodeId kNoNode = -1;

  struct Node {
    Dist dist;
    std::vector<NodeId> children;  // kNoNode for zero-mass symbols and at the last stage
  };

  /// Builds the tree by querying `kernel` at every positive-probability
  /// prefix (the empty prefix first).
  using KernelFn = std::function<Dist(std::span<const std::size_t> prefix)>;
  static ProcessLaw from_kernels(std::vector<Alphabet> alphabets, const KernelFn& kernel);

  /// Law of independent stages with the given marginals.
  static ProcessLaw product(const std::vector<Dist>& stages);

  std::size_t horizon() const noexcept { return alphabets_.size(); }
  const std::vector<Alphabet>& alphabets() const noexcept { return alphabets_; }
  std::vector<std::size_t> alphabet_sizes() const;

  const Node& root() const { return nodes_.front(); }
  const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  static constexpr NodeId root_id() noexcept { return 0; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Node at the end of `prefix` (length < n), or nullopt if the prefix has
  /// probability zero.
  std::optional<NodeId> find(std::span<const std::size_t> prefix) const;

  /// Number of points in the full path space.
  std::size_t path_count() const;

  /// All positive-probability paths in lexicographic order.
  std::vector<PathMass> support() const;

  bool same_shape(const ProcessLaw& other) const;

 private:
  ProcessLaw(std::vector<Alphabet> alphabets, std::vector<Node> nodes)
      : alphabets_(std::move(alphabets)), nodes_(std::move(nodes)) {}

  friend class ProcessLawBuilder;

  std::vector<Alphabet> alphabets_;
  std::vector<Node> nodes_;
};

struct JointOptions {
  /// Accept any positive total mass and rescale it to one.
  bool renormalize = false;
};

/// Disintegrates a sparse joint table (paths absent from the table have
/// probability zero).
ProcessLaw from_joint(const std::vector<PathMass>& table, std::vector<Alphabet> alphabets,
                      JointOptions options = {});

/// Disintegrates a dense row-major table of length prod |A_k| (first stage
/// most significant).
ProcessLaw from_joint_dense(std::span<const double> table, std::vector<Alphabet> alphabets,
                            JointOptions options = {});

/// Mixed-radix index of a full path, first stage most significant.
std::size_t path_code(std::span<const std::size_t> sizes, std::span<const std::size_t> path);
PathIndex path_from_code(std::span<const std::size_t> sizes, std::size_t code);

double joint_prob(const ProcessLaw& law, std::span<const std::size_t> path);

double tv(const Dist& p, const Dist& q);
SubProb meet(const Dist& p, const Dist& q);
ExtReal kl(const Dist& p, const Dist& q);

/// Total variation of the two laws as distributions on full paths.
double tv(const ProcessLaw& mu, const ProcessLaw& nu);

/// Relative entropy H(mu|nu) summed over full paths.
ExtReal kl(const ProcessLaw& mu, const ProcessLaw& nu);

/// Relative entropy by the chain rule: H(mu_1|nu_1) plus the mu-averaged
/// relative entropies of the successive kernels.
ExtReal kl_chain(const ProcessLaw& mu, const ProcessLaw& nu);

}  // namespace atv
