#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdifs/coupling.hpp"
#include "pdifs/metrics.hpp"
#include "pdifs/system.hpp"

namespace pdifs {

struct Region {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Region box(int dim, double lo, double hi);
};

enum class Method { certified, estimated };

const char* method_name(Method m);

// A reported constant together with how it was obtained. Certified values
// come from closed-form vertex arithmetic and bound the quantity for every
// state; estimated values are maxima or minima over the sampled pairs only.
struct Bound {
  double value = 0.0;
  Method method = Method::estimated;
  std::string note;
};

struct ConditionReport {
  Bound alpha;           // contraction of the expected step displacement
  Bound displacement;    // expected jump size at the reference point
  Bound holder_l;        // total-variation Hoelder constant of x -> p(x)
  double holder_nu = 1.0;
  Bound delta;           // meet mass on the contractive index set
  double delta_threshold = 0.0;  // contraction factor defining that set
  double lyapunov_lambda = 0.0;
  double lyapunov_c = 0.0;
  bool pass_b1 = false;  // alpha < 1
  bool pass_b2 = false;  // displacement finite
  bool pass_b3 = false;  // holder_l finite, nu in (0, 1]
  bool pass_b4 = false;  // delta > 0
  int pairs_sampled = 0;
  Region region{};

  bool all_pass() const { return pass_b1 && pass_b2 && pass_b3 && pass_b4; }
};

// Verifies the convergence hypotheses numerically over a sampling region:
// contraction and displacement constants (certified when the weight kind
// admits vertex arithmetic), the weight function's Hoelder certificate, and
// the minimal meet mass restricted to contracting indices.
ConditionReport check_conditions(const PlaceDependentSystem& sys,
                                 const Region& region, int pairs,
                                 SplitMix64& rng);

// Same report, but the contracting index set is decided per map from its
// operator norm bound instead of per sampled pair. This matches the
// kernel-level reading where the map family is a set of (M, Q) atoms.
ConditionReport check_conditions_atom_contracting(
    const PlaceDependentSystem& sys, const Region& region, int pairs,
    SplitMix64& rng);

// Ergodic-average sample of the invariant law: one long trajectory from the
// origin, keeping the `samples` states after `burn_in` steps.
EmpiricalLaw estimate_invariant(const PlaceDependentSystem& sys, int burn_in,
                                int samples, SplitMix64& rng);

// Distance between `law` and its exact one-step evolution
// sum_j w_j sum_i p_i(x_j) delta_(S_i x_j); zero iff law is invariant.
double stationarity_check(const PlaceDependentSystem& sys,
                          const EmpiricalLaw& law);

struct ConvergenceResult {
  std::vector<int> ns;
  std::vector<double> fm;
  std::vector<double> w1;
  int replicas = 0;
  double noise_floor = 0.0;
  RateFit fit;
  std::uint64_t master_seed = 0;
};

// Evolves two bundles of independent replicas, one from x0 and one from y0,
// and records the exact distances between their empirical laws at every
// step, then fits the decay rate above the Monte Carlo noise floor
// 2 / sqrt(replicas). Requires replicas >= 100.
ConvergenceResult convergence_experiment(const PlaceDependentSystem& sys,
                                         const StatePoint& x0,
                                         const StatePoint& y0, int n_max,
                                         int replicas,
                                         std::uint64_t master_seed,
                                         int threads = 1);

}  // namespace pdifs
