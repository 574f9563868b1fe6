#pragma once

#include <utility>
#include <vector>

#include "pdifs/diagnostics.hpp"
#include "pdifs/system.hpp"

namespace pdifs {

// Random affine recursion x -> M x + Q where (M, Q) is drawn from the
// state-dependent mixture mu_x = sum_i p_i(x) nu_i. The nu_i are finitely
// supported over (M, Q) atoms; atoms shared between components are
// identified by value, so meets of mu_x and mu_y act on the atom set and
// not on component indices.
struct MixtureAffineKernel {
  int dim = 1;
  std::vector<AffineMap> atom_table;             // distinct (M, Q) pairs
  std::vector<DiscreteMeasure<int>> components;  // probabilities over atoms
  WeightFunction weights;                        // over components

  using ComponentSpec = std::vector<std::pair<AffineMap, double>>;

  static MixtureAffineKernel make(int dim,
                                  const std::vector<ComponentSpec>& comps,
                                  WeightFunction weights);

  int component_count() const { return static_cast<int>(components.size()); }

  // mu_x as a measure over atom ids.
  DiscreteMeasure<int> mu_at(const StatePoint& x) const;

  // Row i holds component i's weights over the atom table.
  Eigen::MatrixXd scales() const;
};

// Flattens the mixture into a single finite family: the maps are the atom
// table and the weight of atom a at x is sum_i p_i(x) nu_i(a).
PlaceDependentSystem to_system(const MixtureAffineKernel& kernel);

// The affine recursion itself; agrees in law with simulate on to_system.
Trajectory phi_simulate(const MixtureAffineKernel& kernel, const StatePoint& x0,
                        int n, SplitMix64& rng);

// Partial sums psi_k = sum_(t<=k) M_1 ... M_(t-1) Q_t along one i.i.d. draw
// of the atoms. Only defined for constant weights; throws NotApplicable
// otherwise, since the summands are no longer identically distributed.
std::vector<StatePoint> backward_partial_sums(const MixtureAffineKernel& kernel,
                                              int n, SplitMix64& rng);

// Condition report for the kernel: contraction and moment constants from
// sum_a mu_x(a) ||M_a|| and sum_a mu_x(a) |Q_a| (vertex-certified when the
// weight kind allows), the weight Hoelder certificate, and the minimal meet
// mass over atoms with ||M_a|| within the contraction threshold.
ConditionReport check_corollary(const MixtureAffineKernel& kernel,
                                const Region& region, int pairs,
                                SplitMix64& rng);

}  // namespace pdifs
