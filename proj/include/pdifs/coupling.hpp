#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pdifs/system.hpp"

namespace pdifs {

// State of the coupled chain on X^2 x {0,1}. flag = 1 means the last step
// was drawn from the contractive (shared-index) part, 0 from the
// independent residual part. Initial states carry flag 1 by convention.
struct CoupledState {
  StatePoint x;
  StatePoint y;
  int flag = 1;
};

struct CoupledTrajectory {
  std::vector<CoupledState> states;  // length horizon + 1
  std::vector<double> distances;     // |x_k - y_k| per step
  std::uint64_t seed = 0;

  int horizon() const { return static_cast<int>(states.size()) - 1; }
};

// Mass of the index-level meet: sum_i min(p_i(x), p_i(y)).
double q_mass(const PlaceDependentSystem& sys, const StatePoint& x,
              const StatePoint& y);

// One step of the coupled chain. With probability q_mass both components
// move by the same index drawn from the normalized meet (flag 1); otherwise
// the two components draw independently from their normalized residuals
// (flag 0). Either way each marginal performs exactly one plain chain step.
CoupledState coupled_step(const PlaceDependentSystem& sys,
                          const CoupledState& s, SplitMix64& rng);

CoupledTrajectory coupled_simulate(const PlaceDependentSystem& sys,
                                   const StatePoint& x0, const StatePoint& y0,
                                   int n, SplitMix64& rng);

enum class StopKind { tau, kappa, epsilon, rho };

const char* stop_kind_name(StopKind k);

// Constants entering the kappa and rho predicates; V(x, y) = |x| + |y|.
struct StoppingParams {
  double recurrence_radius = 0.0;  // kappa: first V < recurrence_radius
  double lyapunov_a = 0.0;         // rho threshold is 2 b / (1 - a)
  double lyapunov_b = 0.0;
};

struct StoppingTimeSample {
  std::optional<int> value;  // nullopt when censored at the horizon
  int horizon = 0;
  StopKind kind = StopKind::tau;

  bool censored() const { return !value.has_value(); }
};

// First index witnessing the kind's predicate over the observed horizon:
//   tau      first n >= 1 with every later step drawn from the meet
//            (censored when the final step has flag 0)
//   epsilon  first n >= 1 with flag 0
//   kappa    first n >= 0 with V(x_n, y_n) < recurrence_radius
//   rho      first n >= 1 with V(x_n, y_n) < 2 b / (1 - a)
StoppingTimeSample stopping_time(const CoupledTrajectory& traj, StopKind kind,
                                 const StoppingParams& params);

struct GeometricMoment {
  std::optional<double> estimate;  // mean of beta^(-value) over uncensored
  double censored_fraction = 0.0;
};

// Censoring-aware estimate of E beta^(-T). With a positive censored
// fraction the estimate is a lower bound; with no uncensored samples it is
// absent.
GeometricMoment geometric_moment(std::span<const StoppingTimeSample> samples,
                                 double beta);

// Exact law of the coupled pair (X_n, Y_n) as a measure over concatenated
// (x, y) coordinates, by enumeration over meet and residual branches.
using PairLaw = DiscreteMeasure<PointKey>;
PairLaw coupled_exact_pushforward(const PlaceDependentSystem& sys,
                                  const StatePoint& x0, const StatePoint& y0,
                                  int n,
                                  std::size_t cap = kDefaultPushforwardCap);

// Marginal of a pair law on the first (or second) component.
StateLaw pair_marginal(const PairLaw& law, int dim, bool first);

}  // namespace pdifs
