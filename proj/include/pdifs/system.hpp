#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "pdifs/measure.hpp"
#include "pdifs/rng.hpp"

namespace pdifs {

using StatePoint = Eigen::VectorXd;

inline constexpr double kPointMergeTol = 1e-12;
inline constexpr std::size_t kDefaultPushforwardCap = std::size_t{1} << 20;

// Affine self-map x -> M x + Q with a cached upper bound on the operator
// (spectral) norm of M. For 1x1 matrices the bound is |m| exactly.
struct AffineMap {
  Eigen::MatrixXd M;
  Eigen::VectorXd Q;
  double operator_norm_bound = 0.0;

  static AffineMap make(Eigen::MatrixXd m, Eigen::VectorXd q);

  StatePoint apply(const StatePoint& x) const { return M * x + Q; }
  Eigen::Index dim() const { return Q.size(); }

  bool same_map(const AffineMap& other) const {
    return M.rows() == other.M.rows() && M.cols() == other.M.cols() &&
           Q.size() == other.Q.size() && M == other.M && Q == other.Q;
  }
};

// State-dependent selection probabilities over N maps. Three base kinds with
// closed-form total-variation Hoelder certificates, plus a derived form that
// rescales a base function by fixed per-index weights (used when a mixture
// kernel is flattened to a single finite family).
class WeightFunction {
 public:
  enum class Kind { constant, clamped_affine_pair, softmax_affine, group_scaled };

  struct HolderCertificate {
    double l = 0.0;   // tv_norm_diff(p(x), p(y)) <= l * |x - y|^nu
    double nu = 1.0;
  };

  static WeightFunction constant(Eigen::VectorXd probs);
  // N = 2 only: p_1(x) = clamp(a.x + b, lo, hi), p_2 = 1 - p_1.
  // Bounds must satisfy 0 <= lo < hi <= 1.
  static WeightFunction clamped_affine_pair(Eigen::VectorXd a, double b,
                                            double lo, double hi);
  // p_i(x) proportional to exp(slopes.row(i).x + intercepts(i)).
  static WeightFunction softmax_affine(Eigen::MatrixXd slopes,
                                       Eigen::VectorXd intercepts);
  // p_flat_j(x) = sum_i base_i(x) * scales(i, j); scales rows sum to 1.
  static WeightFunction group_scaled(WeightFunction base,
                                     Eigen::MatrixXd scales);

  Kind kind() const { return kind_; }
  int count() const;
  int arg_dim() const;  // state dimension expected, -1 if any
  bool is_constant() const { return kind_ == Kind::constant; }

  // Probability vector at x; entries nonnegative, sums to 1 within 1e-12.
  Eigen::VectorXd evaluate(const StatePoint& x) const;

  HolderCertificate holder_certificate() const;

  // Closed-form sup over x of sum_i p_i(x) * g(i), when the kind admits one
  // (constant, clamped pair via its two clamp vertices, and group_scaled
  // over such a base). nullopt means the sup must be estimated by sampling.
  std::optional<double> certified_sup(const Eigen::VectorXd& g) const;

  struct Constant {
    Eigen::VectorXd probs;
  };
  struct ClampedPair {
    Eigen::VectorXd a;
    double b, lo, hi;
  };
  struct Softmax {
    Eigen::MatrixXd slopes;      // N x d
    Eigen::VectorXd intercepts;  // N
  };
  struct GroupScaled {
    std::shared_ptr<const WeightFunction> base;
    Eigen::MatrixXd scales;  // base->count() x flattened count
  };

  const ClampedPair* as_clamped_pair() const {
    return std::get_if<ClampedPair>(&impl_);
  }
  const Constant* as_constant() const { return std::get_if<Constant>(&impl_); }

 private:
  Kind kind_ = Kind::constant;
  std::variant<Constant, ClampedPair, Softmax, GroupScaled> impl_;
};

// Finite family of affine maps with a weight function over their indices.
struct PlaceDependentSystem {
  int dim = 1;
  std::vector<AffineMap> maps;
  WeightFunction weights;

  static PlaceDependentSystem make(int dim, std::vector<AffineMap> maps,
                                   WeightFunction weights);

  int map_count() const { return static_cast<int>(maps.size()); }
};

struct Trajectory {
  std::vector<StatePoint> states;   // length n + 1
  std::vector<int> indices;         // length n, map drawn at each step
  std::uint64_t seed = 0;           // stream seed used, for replay
};

// One transition: draws index i with probability p_i(x), applies S_i.
std::pair<StatePoint, int> step(const PlaceDependentSystem& sys,
                                const StatePoint& x, SplitMix64& rng);

Trajectory simulate(const PlaceDependentSystem& sys, const StatePoint& x0,
                    int n, SplitMix64& rng);

// Backward iterations Y_k = S_(i0) o ... o S_(i(k-1)) applied to x, with the
// freshly drawn map composed innermost. Only defined for constant weights;
// throws NotApplicable otherwise since forward and backward laws differ in
// the place-dependent case.
Trajectory backward_simulate(const PlaceDependentSystem& sys,
                             const StatePoint& x, int n, SplitMix64& rng);

// (P f)(x) = sum_i p_i(x) f(S_i x), exact for finite families.
double markov_apply(const PlaceDependentSystem& sys,
                    const std::function<double(const StatePoint&)>& f,
                    const StatePoint& x);

// Ordered key for state points: lexicographic comparison of coordinates.
// Gives exact state laws a canonical atom order.
struct PointKey {
  Eigen::VectorXd p;

  bool operator<(const PointKey& o) const {
    const Eigen::Index n = std::min(p.size(), o.p.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p[i] < o.p[i]) return true;
      if (o.p[i] < p[i]) return false;
    }
    return p.size() < o.p.size();
  }
  bool operator==(const PointKey& o) const {
    return p.size() == o.p.size() && p == o.p;
  }
};

using StateLaw = DiscreteMeasure<PointKey>;

// Builds a state law from weighted points, merging points that agree within
// `tol` in every coordinate (clusters anchored at their first member in
// lexicographic order). Distinct index words can land on identical points;
// merging keeps the law canonical.
StateLaw merge_points(std::vector<std::pair<StatePoint, double>> weighted,
                      double tol = kPointMergeTol);

StateLaw delta_law(const StatePoint& x);

// Exact law of X_n started from `init`, by full enumeration with atom
// merging. Throws SupportCapExceeded if the pre-merge support of any step
// would exceed `cap`.
StateLaw exact_pushforward(const PlaceDependentSystem& sys,
                           const StateLaw& init, int n,
                           std::size_t cap = kDefaultPushforwardCap);

}  // namespace pdifs
