#include "atv/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "atv/error.hpp"

namespace atv {

namespace {

void require_same_shape(const ProcessLaw& mu, const ProcessLaw& nu) {
  if (!mu.same_shape(nu)) {
    throw Error(ErrorCode::ShapeMismatch, "process laws differ in horizon or alphabet sizes");
  }
}

void check_marginal(const std::vector<double>& got, const std::vector<double>& want, const char* side) {
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (std::abs(got[i] - want[i]) > kCouplingTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << side << " marginal of coupling differs at path code " << i << ": " << got[i] << " vs " << want[i];
      throw Error(ErrorCode::BadSpec, msg.str());
    }
  }
}

}  // namespace

std::vector<double> joint_table(const ProcessLaw& law) {
  const auto sizes = law.alphabet_sizes();
  std::vector<double> table(law.path_count(), 0.0);
  for (const auto& [path, mass] : law.support()) table[path_code(sizes, path)] = mass;
  return table;
}

Coupling::Coupling(std::shared_ptr<const ProcessLaw> mu, std::shared_ptr<const ProcessLaw> nu,
                   std::vector<Entry> entries)
    : mu_(std::move(mu)), nu_(std::move(nu)) {
  require_same_shape(*mu_, *nu_);
  const std::size_t paths = mu_->path_count();
  std::sort(entries.begin(), entries.end(),
            [](const Entry& l, const Entry& r) { return std::pair(l.x, l.y) < std::pair(r.x, r.y); });
  double total = 0.0;
  for (const auto& e : entries) {
    if (e.x >= paths || e.y >= paths) throw Error(ErrorCode::ShapeMismatch, "coupling path code out of range");
    if (!(e.mass >= 0.0) || std::isinf(e.mass)) throw Error(ErrorCode::NegativeMass, "negative coupling mass");
    total += e.mass;
    if (!entries_.empty() && entries_.back().x == e.x && entries_.back().y == e.y) {
      entries_.back().mass += e.mass;
    } else {
      entries_.push_back(e);
    }
  }
  if (std::abs(total - 1.0) > kCouplingTolerance) {
    throw Error(ErrorCode::BadSpec, "coupling mass does not total one");
  }
  check_marginal(first_marginal(), joint_table(*mu_), "first");
  check_marginal(second_marginal(), joint_table(*nu_), "second");
}

double Coupling::mass(std::size_t x, std::size_t y) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair(x, y), [](const Entry& e, const auto& key) {
    return std::pair(e.x, e.y) < key;
  });
  if (it != entries_.end() && it->x == x && it->y == y) return it->mass;
  return 0.0;
}

std::vector<double> Coupling::first_marginal() const {
  std::vector<double> m(mu_->path_count(), 0.0);
  for (const auto& e : entries_) m[e.x] += e.mass;
  return m;
}

std::vector<double> Coupling::second_marginal() const {
  std::vector<double> m(nu_->path_count(), 0.0);
  for (const auto& e : entries_) m[e.y] += e.mass;
  return m;
}

AtvBreakdown atv_recursive(const ProcessLaw& mu, const ProcessLaw& nu) {
  require_same_shape(mu, nu);
  const std::size_t n = mu.horizon();
  AtvBreakdown out;
  out.per_stage.assign(n, 0.0);

  // `weight` is the iterated minimum measure of the shared prefix. Children
  // are visited only where both kernels are positive, i.e. where the
  // minimum measure charges the next symbol.
  auto walk = [&](auto&& self, ProcessLaw::NodeId a, ProcessLaw::NodeId b, double weight, std::size_t depth) -> void {
    const auto& p = mu.node(a).dist;
    const auto& q = nu.node(b).dist;
    out.per_stage[depth] += weight * tv(p, q);
    if (depth + 1 == n) return;
    const SubProb common = meet(p, q);
    for (std::size_t s = 0; s < common.size(); ++s) {
      if (common[s] <= 0.0) continue;
      self(self, mu.node(a).children[s], nu.node(b).children[s], weight * common[s], depth + 1);
    }
  };
  walk(walk, ProcessLaw::root_id(), ProcessLaw::root_id(), 1.0, 0);

  for (double v : out.per_stage) out.total += v;
  return out;
}

Coupling optimal_bicausal_coupling(const ProcessLaw& mu, const ProcessLaw& nu) {
  require_same_shape(mu, nu);
  const std::size_t n = mu.horizon();
  std::vector<Coupling::Entry> entries;

  auto walk = [&](auto&& self, ProcessLaw::NodeId a, ProcessLaw::NodeId b, double weight, std::size_t x_code,
                  std::size_t y_code, std::size_t depth) -> void {
    const auto& p = mu.node(a).dist;
    const auto& q = nu.node(b).dist;
    const std::size_t width = p.size();

    // Stage plan: p ^ q on the diagonal, residuals coupled by their
    // normalized product.
    std::vector<double> rp(width), rq(width), plan(width * width, 0.0);
    double residual = 0.0;
    for (std::size_t s = 0; s < width; ++s) {
      const double m = std::min(p[s], q[s]);
      plan[s * width + s] = m;
      rp[s] = p[s] - m;
      rq[s] = q[s] - m;
      residual += rp[s];
    }
    if (residual > 0.0) {
      for (std::size_t s = 0; s < width; ++s) {
        if (rp[s] <= 0.0) continue;
        for (std::size_t t = 0; t < width; ++t) plan[s * width + t] += rp[s] * rq[t] / residual;
      }
    }

    for (std::size_t s = 0; s < width; ++s) {
      for (std::size_t t = 0; t < width; ++t) {
        const double g = plan[s * width + t];
        if (g <= 0.0) continue;
        const std::size_t xc = x_code * width + s;
        const std::size_t yc = y_code * width + t;
        if (depth + 1 == n) {
          entries.push_back({xc, yc, weight * g});
        } else {
          self(self, mu.node(a).children[s], nu.node(b).children[t], weight * g, xc, yc, depth + 1);
        }
      }
    }
  };
  walk(walk, ProcessLaw::root_id(), ProcessLaw::root_id(), 1.0, 0, 0, 0);

  return Coupling(std::make_shared<const ProcessLaw>(mu), std::make_shared<const ProcessLaw>(nu), std::move(entries));
}

double coupling_cost(const Coupling& pi) {
  double off_diagonal = 0.0;
  for (const auto& e : pi.entries()) {
    if (e.x != e.y) off_diagonal += e.mass;
  }
  return 2.0 * off_diagonal;
}

double atv_dp(const ProcessLaw& mu, const ProcessLaw& nu, const StageOtSolver& solver) {
  require_same_shape(mu, nu);
  const std::size_t n = mu.horizon();
  std::map<std::pair<ProcessLaw::NodeId, ProcessLaw::NodeId>, double> memo;

  // V(a, b) = OT value between the kernels at a and b for the cost
  //   c(x, y) = 2                if x != y
  //           = V(a x, b y)      if x == y  (0 at the last stage)
  // A diagonal cell that cannot carry mass (either kernel is zero there)
  // gets cost 2; its value never matters.
  auto value = [&](auto&& self, ProcessLaw::NodeId a, ProcessLaw::NodeId b, std::size_t depth) -> double {
    const auto key = std::pair(a, b);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const auto& p = mu.node(a).dist;
    const auto& q = nu.node(b).dist;
    DenseMatrix cost(p.size(), q.size(), 2.0);
    for (std::size_t s = 0; s < std::min(p.size(), q.size()); ++s) {
      if (depth + 1 == n) {
        cost(s, s) = 0.0;
      } else if (p[s] > 0.0 && q[s] > 0.0) {
        cost(s, s) = self(self, mu.node(a).children[s], nu.node(b).children[s], depth + 1);
      }
    }
    const double v = solver(p, q, cost).value;
    memo.emplace(key, v);
    return v;
  };
  return value(value, ProcessLaw::root_id(), ProcessLaw::root_id(), 0);
}

}  // namespace atv
