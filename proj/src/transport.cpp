#include "pdifs/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "pdifs/errors.hpp"

namespace pdifs {
namespace transport {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BipartiteResult solve_bipartite(const Eigen::MatrixXd& cost,
                                const Eigen::VectorXd& supply,
                                const Eigen::VectorXd& demand) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (cost.rows() != m || cost.cols() != n)
    throw Error("solve_bipartite: cost shape mismatch");
  if ((supply.array() < 0).any() || (demand.array() < 0).any())
    throw Error("solve_bipartite: negative marginal");
  const double total = supply.sum();
  if (std::abs(total - demand.sum()) > 1e-9 * std::max(1.0, total))
    throw Error("solve_bipartite: unbalanced marginals");

  Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd excess = supply;
  Eigen::VectorXd deficit = demand;
  // One potential per node; sources are nodes [0, m), sinks [m, m + n).
  std::vector<double> pot(static_cast<std::size_t>(m + n), 0.0);
  const double tol = 1e-15 * std::max(1.0, total);

  std::vector<double> dist(static_cast<std::size_t>(m + n));
  std::vector<int> parent(static_cast<std::size_t>(m + n));
  std::vector<char> done(static_cast<std::size_t>(m + n));

  int guard = 64 * (m + n) + 64;
  while (true) {
    bool any_excess = false;
    for (int i = 0; i < m; ++i)
      if (excess(i) > tol) {
        any_excess = true;
        break;
      }
    if (!any_excess) break;
    if (--guard < 0) throw Error("solve_bipartite: failed to converge");

    // Dijkstra with reduced costs from the set of excess sources.
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < m; ++i)
      if (excess(i) > tol) dist[static_cast<std::size_t>(i)] = 0.0;

    int target = -1;
    while (true) {
      int u = -1;
      double best = kInf;
      for (int v = 0; v < m + n; ++v)
        if (!done[static_cast<std::size_t>(v)] &&
            dist[static_cast<std::size_t>(v)] < best) {
          best = dist[static_cast<std::size_t>(v)];
          u = v;
        }
      if (u < 0) break;
      done[static_cast<std::size_t>(u)] = 1;
      if (u >= m && deficit(u - m) > tol) {
        target = u - m;
        break;
      }
      if (u < m) {
        for (int j = 0; j < n; ++j) {
          const int v = m + j;
          if (done[static_cast<std::size_t>(v)]) continue;
          const double rc =
              std::max(0.0, cost(u, j) + pot[static_cast<std::size_t>(u)] -
                                pot[static_cast<std::size_t>(v)]);
          if (best + rc < dist[static_cast<std::size_t>(v)]) {
            dist[static_cast<std::size_t>(v)] = best + rc;
            parent[static_cast<std::size_t>(v)] = u;
          }
        }
      } else {
        const int j = u - m;
        for (int i = 0; i < m; ++i) {
          if (done[static_cast<std::size_t>(i)] || plan(i, j) <= 0.0) continue;
          const double rc =
              std::max(0.0, -cost(i, j) + pot[static_cast<std::size_t>(u)] -
                                pot[static_cast<std::size_t>(i)]);
          if (best + rc < dist[static_cast<std::size_t>(i)]) {
            dist[static_cast<std::size_t>(i)] = best + rc;
            parent[static_cast<std::size_t>(i)] = u;
          }
        }
      }
    }
    if (target < 0) throw Error("solve_bipartite: no augmenting path");

    // Every node gets the capped update, unreached ones included, so all
    // residual reduced costs stay nonnegative for the next search.
    const double dist_t = dist[static_cast<std::size_t>(m + target)];
    for (int v = 0; v < m + n; ++v)
      pot[static_cast<std::size_t>(v)] +=
          std::min(dist[static_cast<std::size_t>(v)], dist_t);

    // Bottleneck along the augmenting path.
    double delta = deficit(target);
    for (int v = m + target; parent[static_cast<std::size_t>(v)] >= 0;
         v = parent[static_cast<std::size_t>(v)]) {
      const int u = parent[static_cast<std::size_t>(v)];
      if (v >= m) {
        // forward arc u -> sink, uncapacitated
      } else {
        delta = std::min(delta, plan(v, u - m));  // backward arc sink -> source
      }
      if (u < m && parent[static_cast<std::size_t>(u)] < 0)
        delta = std::min(delta, excess(u));
    }
    int v = m + target;
    while (parent[static_cast<std::size_t>(v)] >= 0) {
      const int u = parent[static_cast<std::size_t>(v)];
      if (v >= m)
        plan(u, v - m) += delta;
      else
        plan(v, u - m) -= delta;
      v = u;
    }
    excess(v) -= delta;
    deficit(target) -= delta;
  }

  BipartiteResult res;
  res.value = (plan.array() * cost.array()).sum();
  res.plan = std::move(plan);
  return res;
}

double line_w1(const std::vector<double>& positions,
               const std::vector<double>& net_weights) {
  double acc = 0.0, cum = 0.0;
  for (std::size_t k = 0; k + 1 < positions.size(); ++k) {
    cum += net_weights[k];
    acc += std::abs(cum) * (positions[k + 1] - positions[k]);
  }
  return acc;
}

namespace {

// Convex piecewise-linear function represented by its minimum value plus two
// breakpoint maps (position -> positive slope weight). Crossing a left
// breakpoint going left lowers the slope by its weight; right breakpoints
// raise it going right. Between the two maps the function is flat at minval.
//
//   U(r) = minval + sum_left w * max(0, p - r) + sum_right w * max(0, r - p)
//
// Supports exactly the two operations the flow DP needs: adding a kink
// a * |r - w| and slope clipping to [-1, 1] (the inf-convolution with |.|,
// which models the unit-cost teleport coupling between adjacent segments).
class ConvexPwl {
 public:
  void add_kink(double where, double weight) {
    if (weight <= 0.0) return;
    left_[where] += weight;
    right_[where] += weight;
    left_total_ += weight;
    right_total_ += weight;
    rebalance();
  }

  void clip_unit() {
    while (left_total_ > 1.0 && !left_.empty()) {
      auto it = left_.begin();  // farthest from the minimum
      const double excess = left_total_ - 1.0;
      if (it->second <= excess) {
        left_total_ -= it->second;
        left_.erase(it);
      } else {
        it->second -= excess;
        left_total_ = 1.0;
      }
    }
    while (right_total_ > 1.0 && !right_.empty()) {
      auto it = std::prev(right_.end());
      const double excess = right_total_ - 1.0;
      if (it->second <= excess) {
        right_total_ -= it->second;
        right_.erase(it);
      } else {
        it->second -= excess;
        right_total_ = 1.0;
      }
    }
  }

  double min_value() const { return minval_; }

 private:
  void rebalance() {
    // Restore max(left keys) <= min(right keys); each transfer preserves the
    // represented function while lifting the flat minimum.
    while (!left_.empty() && !right_.empty()) {
      auto lit = std::prev(left_.end());
      auto rit = right_.begin();
      const double pl = lit->first, pr = rit->first;
      if (pl <= pr) break;
      const double t = std::min(lit->second, rit->second);
      minval_ += t * (pl - pr);
      if ((lit->second -= t) <= 0.0) left_.erase(lit);
      if ((rit->second -= t) <= 0.0) right_.erase(rit);
      left_[pr] += t;
      right_[pl] += t;
    }
  }

  std::map<double, double> left_, right_;
  double left_total_ = 0.0, right_total_ = 0.0;
  double minval_ = 0.0;
};

}  // namespace

// Minimum-cost routing of the signed atom weights where mass may move along
// the line at cost |distance| or be teleported at cost 1 per unit at each
// endpoint (cost 2 per teleported unit, matching the truncated metric).
// With R_k the teleported cumulative on segment k and W_k the plain
// cumulative, the objective is
//
//   |R_1| + sum_k len_k |W_k - R_k| + sum_k |R_(k+1) - R_k| + |R_S|
//
// minimized by a forward sweep over segments carrying U_k(r) = best cost with
// R_k = r, which stays convex piecewise-linear throughout.
double line_flat(const std::vector<double>& positions,
                 const std::vector<double>& net_weights) {
  const std::size_t k = positions.size();
  if (k <= 1) return 0.0;
  ConvexPwl u;
  u.add_kink(0.0, 1.0);
  double cum = 0.0;
  for (std::size_t s = 0; s + 1 < k; ++s) {
    cum += net_weights[s];
    const double len = positions[s + 1] - positions[s];
    u.add_kink(cum, len);
    if (s + 2 < k) u.clip_unit();
  }
  u.add_kink(0.0, 1.0);
  return u.min_value();
}

}  // namespace transport
}  // namespace pdifs
