#include "pdifs/perpetuity.hpp"

#include <cmath>

#include "pdifs/errors.hpp"

namespace pdifs {

MixtureAffineKernel MixtureAffineKernel::make(
    int dim, const std::vector<ComponentSpec>& comps, WeightFunction weights) {
  if (dim < 1) throw Error("kernel: dim must be >= 1");
  if (comps.empty()) throw Error("kernel: need at least one component");
  if (weights.count() != static_cast<int>(comps.size()))
    throw Error("kernel: weight count must match component count");
  if (weights.arg_dim() >= 0 && weights.arg_dim() != dim)
    throw Error("kernel: weight argument dimension mismatch");

  MixtureAffineKernel k;
  k.dim = dim;
  k.weights = std::move(weights);
  for (const auto& spec : comps) {
    if (spec.empty()) throw Error("kernel: component without atoms");
    std::vector<DiscreteMeasure<int>::Atom> atoms;
    for (const auto& [map, w] : spec) {
      if (map.dim() != dim) throw Error("kernel: atom dimension mismatch");
      int id = -1;
      for (std::size_t a = 0; a < k.atom_table.size(); ++a)
        if (k.atom_table[a].same_map(map)) {
          id = static_cast<int>(a);
          break;
        }
      if (id < 0) {
        id = static_cast<int>(k.atom_table.size());
        k.atom_table.push_back(map);
      }
      atoms.push_back({id, w});
    }
    auto nu = DiscreteMeasure<int>::from_atoms(std::move(atoms));
    if (!nu.is_probability())
      throw Error("kernel: component atom weights must sum to 1");
    k.components.push_back(std::move(nu));
  }
  return k;
}

DiscreteMeasure<int> MixtureAffineKernel::mu_at(const StatePoint& x) const {
  const Eigen::VectorXd p = weights.evaluate(x);
  std::vector<DiscreteMeasure<int>::Atom> atoms;
  for (std::size_t i = 0; i < components.size(); ++i)
    for (const auto& [id, w] : components[i].atoms())
      atoms.push_back({id, p(static_cast<Eigen::Index>(i)) * w});
  return DiscreteMeasure<int>::from_atoms(std::move(atoms));
}

Eigen::MatrixXd MixtureAffineKernel::scales() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(components.size()),
      static_cast<Eigen::Index>(atom_table.size()));
  for (std::size_t i = 0; i < components.size(); ++i)
    for (const auto& [id, w] : components[i].atoms())
      s(static_cast<Eigen::Index>(i), id) = w;
  return s;
}

PlaceDependentSystem to_system(const MixtureAffineKernel& kernel) {
  return PlaceDependentSystem::make(
      kernel.dim, kernel.atom_table,
      WeightFunction::group_scaled(kernel.weights, kernel.scales()));
}

Trajectory phi_simulate(const MixtureAffineKernel& kernel, const StatePoint& x0,
                        int n, SplitMix64& rng) {
  return simulate(to_system(kernel), x0, n, rng);
}

std::vector<StatePoint> backward_partial_sums(const MixtureAffineKernel& kernel,
                                              int n, SplitMix64& rng) {
  const PlaceDependentSystem sys = to_system(kernel);
  if (!sys.weights.is_constant())
    throw NotApplicable(
        "backward_partial_sums: requires place-independent weights");
  const Eigen::VectorXd probs = sys.weights.evaluate(Eigen::VectorXd());
  std::vector<StatePoint> sums;
  sums.reserve(static_cast<std::size_t>(n));
  Eigen::MatrixXd prefix = Eigen::MatrixXd::Identity(kernel.dim, kernel.dim);
  StatePoint psi = StatePoint::Zero(kernel.dim);
  for (int t = 0; t < n; ++t) {
    const double u = rng.next_double();
    double acc = 0.0;
    int id = static_cast<int>(probs.size()) - 1;
    for (Eigen::Index a = 0; a < probs.size(); ++a) {
      acc += probs(a);
      if (u < acc) {
        id = static_cast<int>(a);
        break;
      }
    }
    const auto& atom = kernel.atom_table[static_cast<std::size_t>(id)];
    psi += prefix * atom.Q;
    prefix = prefix * atom.M;
    sums.push_back(psi);
  }
  return sums;
}

ConditionReport check_corollary(const MixtureAffineKernel& kernel,
                                const Region& region, int pairs,
                                SplitMix64& rng) {
  return check_conditions_atom_contracting(to_system(kernel), region, pairs,
                                           rng);
}

}  // namespace pdifs
