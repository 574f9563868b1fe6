#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "pdifs/system.hpp"

namespace pdifs {

inline constexpr std::size_t kDefaultTransportCap = 1024;

// Finitely supported probability law on R^d.
struct EmpiricalLaw {
  std::vector<StatePoint> points;
  std::vector<double> weights;

  static EmpiricalLaw make(std::vector<StatePoint> points,
                           std::vector<double> weights);
  static EmpiricalLaw uniform(std::vector<StatePoint> points);

  int dim() const;
  std::size_t size() const { return points.size(); }
};

// The law as a discrete measure keyed by exact point identity.
StateLaw law_as_measure(const EmpiricalLaw& law);
EmpiricalLaw law_from_measure(const StateLaw& m);

// Bounded-Lipschitz distance: exact optimal transport with the truncated
// cost min(|u - v|, 2), the transport dual of the test class of 1-Lipschitz
// functions bounded by 1. On the line it is solved by an uncapped exact
// path-flow sweep; in dimension >= 2 by the bipartite solver, which requires
// combined support <= cap.
double fm_distance(const EmpiricalLaw& a, const EmpiricalLaw& b,
                   std::size_t cap = kDefaultTransportCap);

// Wasserstein-1: exact optimal transport with cost |u - v|. On the line the
// sorted/quantile coupling applies (uncapped); otherwise the bipartite
// solver with the same cap rule as fm_distance.
double w1_distance(const EmpiricalLaw& a, const EmpiricalLaw& b,
                   std::size_t cap = kDefaultTransportCap);

struct RateFit {
  double q_hat = 1.0;      // fitted per-step factor, exp(slope), capped at 1
  double c_hat = 1.0;      // fitted level, exp(intercept)
  double r_squared = 0.0;
  int window_lo = -1;      // first and last n entering the fit
  int window_hi = -1;
  bool degenerate = false; // no decay visible (flat or increasing series)
};

// Least-squares line through (n, log value) for the points with value above
// noise_floor. Throws InsufficientData with fewer than four usable points.
RateFit fit_exponential(const std::vector<std::pair<int, double>>& series,
                        double noise_floor);

}  // namespace pdifs
