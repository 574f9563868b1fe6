#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pdifs {
namespace transport {

// Exact optimal value of the finite transportation problem
//   min sum_ij cost(i, j) x_ij,  sum_j x_ij = supply_i,  sum_i x_ij = demand_j
// solved by successive shortest augmenting paths with potentials. Intended
// for modest instances (a few hundred atoms per side); both metric routes
// fall back to it in dimension >= 2 and the test oracles cross-check it.
struct BipartiteResult {
  double value = 0.0;
  Eigen::MatrixXd plan;  // optimal flow, row/col sums match the marginals
};

BipartiteResult solve_bipartite(const Eigen::MatrixXd& cost,
                                const Eigen::VectorXd& supply,
                                const Eigen::VectorXd& demand);

// W1 on the line for a signed atom list: positions strictly increasing,
// net_weight_k = mu({z_k}) - nu({z_k}), total zero. Equals the integral of
// |F_mu - F_nu|.
double line_w1(const std::vector<double>& positions,
               const std::vector<double>& net_weights);

// Optimal transport on the line with the truncated cost min(|u - v|, 2),
// same inputs as line_w1. Computed exactly as a minimum-cost flow on the
// path network with a unit-cost teleport hub, via dynamic programming over
// convex piecewise-linear value functions. Runs in about O(K log K).
double line_flat(const std::vector<double>& positions,
                 const std::vector<double>& net_weights);

}  // namespace transport
}  // namespace pdifs
