#include "pdifs/system.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "pdifs/errors.hpp"

namespace pdifs {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw Error(std::string(what) + ": non-finite entries");
}

double clamp01(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

}  // namespace

AffineMap AffineMap::make(Eigen::MatrixXd m, Eigen::VectorXd q) {
  require_finite(m, "AffineMap.M");
  require_finite(q, "AffineMap.Q");
  if (m.rows() != m.cols() || m.rows() != q.size())
    throw Error("AffineMap: M must be d x d with Q of length d");
  AffineMap out;
  if (m.rows() == 1) {
    out.operator_norm_bound = std::abs(m(0, 0));
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    out.operator_norm_bound = svd.singularValues()(0);
  }
  out.M = std::move(m);
  out.Q = std::move(q);
  return out;
}

WeightFunction WeightFunction::constant(Eigen::VectorXd probs) {
  if (probs.size() < 1) throw Error("weights.constant: empty");
  if ((probs.array() < 0.0).any())
    throw Error("weights.constant: negative entry");
  if (std::abs(probs.sum() - 1.0) > kMassTol)
    throw Error("weights.constant: probabilities must sum to 1");
  WeightFunction w;
  w.kind_ = Kind::constant;
  w.impl_ = Constant{std::move(probs)};
  return w;
}

WeightFunction WeightFunction::clamped_affine_pair(Eigen::VectorXd a, double b,
                                                   double lo, double hi) {
  require_finite(a, "weights.a");
  if (!(0.0 <= lo && lo < hi && hi <= 1.0))
    throw Error("weights.clamped_affine_pair: need 0 <= lo < hi <= 1");
  if (!std::isfinite(b)) throw Error("weights.b: non-finite");
  WeightFunction w;
  w.kind_ = Kind::clamped_affine_pair;
  w.impl_ = ClampedPair{std::move(a), b, lo, hi};
  return w;
}

WeightFunction WeightFunction::softmax_affine(Eigen::MatrixXd slopes,
                                              Eigen::VectorXd intercepts) {
  require_finite(slopes, "weights.a");
  require_finite(intercepts, "weights.b");
  if (slopes.rows() != intercepts.size() || slopes.rows() < 1)
    throw Error("weights.softmax_affine: need one slope row per map");
  WeightFunction w;
  w.kind_ = Kind::softmax_affine;
  w.impl_ = Softmax{std::move(slopes), std::move(intercepts)};
  return w;
}

WeightFunction WeightFunction::group_scaled(WeightFunction base,
                                            Eigen::MatrixXd scales) {
  if (scales.rows() != base.count())
    throw Error("weights.group_scaled: one scale row per base index");
  if ((scales.array() < 0.0).any())
    throw Error("weights.group_scaled: negative scale");
  for (Eigen::Index i = 0; i < scales.rows(); ++i) {
    if (std::abs(scales.row(i).sum() - 1.0) > kMassTol)
      throw Error("weights.group_scaled: scale rows must sum to 1");
  }
  if (base.kind() == Kind::constant) {
    // Flattens to a plain constant vector.
    const Eigen::VectorXd p = base.evaluate(Eigen::VectorXd());
    return WeightFunction::constant(scales.transpose() * p);
  }
  WeightFunction w;
  w.kind_ = Kind::group_scaled;
  w.impl_ = GroupScaled{std::make_shared<WeightFunction>(std::move(base)),
                        std::move(scales)};
  return w;
}

int WeightFunction::count() const {
  switch (kind_) {
    case Kind::constant:
      return static_cast<int>(std::get<Constant>(impl_).probs.size());
    case Kind::clamped_affine_pair:
      return 2;
    case Kind::softmax_affine:
      return static_cast<int>(std::get<Softmax>(impl_).slopes.rows());
    case Kind::group_scaled:
      return static_cast<int>(std::get<GroupScaled>(impl_).scales.cols());
  }
  return 0;
}

int WeightFunction::arg_dim() const {
  switch (kind_) {
    case Kind::constant:
      return -1;
    case Kind::clamped_affine_pair:
      return static_cast<int>(std::get<ClampedPair>(impl_).a.size());
    case Kind::softmax_affine:
      return static_cast<int>(std::get<Softmax>(impl_).slopes.cols());
    case Kind::group_scaled:
      return std::get<GroupScaled>(impl_).base->arg_dim();
  }
  return -1;
}

Eigen::VectorXd WeightFunction::evaluate(const StatePoint& x) const {
  switch (kind_) {
    case Kind::constant:
      return std::get<Constant>(impl_).probs;
    case Kind::clamped_affine_pair: {
      const auto& c = std::get<ClampedPair>(impl_);
      const double p1 = clamp01(c.a.dot(x) + c.b, c.lo, c.hi);
      Eigen::VectorXd p(2);
      p << p1, 1.0 - p1;
      return p;
    }
    case Kind::softmax_affine: {
      const auto& s = std::get<Softmax>(impl_);
      Eigen::VectorXd logit = s.slopes * x + s.intercepts;
      logit.array() -= logit.maxCoeff();
      Eigen::VectorXd p = logit.array().exp();
      p /= p.sum();
      return p;
    }
    case Kind::group_scaled: {
      const auto& g = std::get<GroupScaled>(impl_);
      return g.scales.transpose() * g.base->evaluate(x);
    }
  }
  return {};
}

WeightFunction::HolderCertificate WeightFunction::holder_certificate() const {
  switch (kind_) {
    case Kind::constant:
      return {0.0, 1.0};
    case Kind::clamped_affine_pair: {
      // tv = 2 |p1(x) - p1(y)| <= 2 |a| |x - y|; clamping only shrinks it.
      const auto& c = std::get<ClampedPair>(impl_);
      return {2.0 * c.a.norm(), 1.0};
    }
    case Kind::softmax_affine: {
      // Gradient bound: sum_i |d p_i| <= diameter of the slope set.
      const auto& s = std::get<Softmax>(impl_);
      double diam = 0.0;
      for (Eigen::Index i = 0; i < s.slopes.rows(); ++i)
        for (Eigen::Index j = i + 1; j < s.slopes.rows(); ++j)
          diam = std::max(diam, (s.slopes.row(i) - s.slopes.row(j)).norm());
      return {diam, 1.0};
    }
    case Kind::group_scaled:
      // tv of the flattened vector telescopes to the base tv.
      return std::get<GroupScaled>(impl_).base->holder_certificate();
  }
  return {};
}

std::optional<double> WeightFunction::certified_sup(
    const Eigen::VectorXd& g) const {
  if (g.size() != count()) throw Error("certified_sup: size mismatch");
  switch (kind_) {
    case Kind::constant:
      return std::get<Constant>(impl_).probs.dot(g);
    case Kind::clamped_affine_pair: {
      // p1 ranges over exactly [lo, hi]; the integrand is linear in p1, so
      // the sup sits at a clamp vertex.
      const auto& c = std::get<ClampedPair>(impl_);
      const double at_lo = c.lo * g(0) + (1.0 - c.lo) * g(1);
      const double at_hi = c.hi * g(0) + (1.0 - c.hi) * g(1);
      return std::max(at_lo, at_hi);
    }
    case Kind::softmax_affine:
      return std::nullopt;
    case Kind::group_scaled: {
      const auto& gs = std::get<GroupScaled>(impl_);
      return gs.base->certified_sup(gs.scales * g);
    }
  }
  return std::nullopt;
}

PlaceDependentSystem PlaceDependentSystem::make(int dim,
                                                std::vector<AffineMap> maps,
                                                WeightFunction weights) {
  if (dim < 1) throw Error("system: dim must be >= 1");
  if (maps.empty()) throw Error("system: need at least one map");
  for (const auto& m : maps)
    if (m.dim() != dim) throw Error("system: map dimension mismatch");
  if (weights.count() != static_cast<int>(maps.size()))
    throw Error("system: weight count must match map count");
  if (weights.arg_dim() >= 0 && weights.arg_dim() != dim)
    throw Error("system: weight argument dimension mismatch");
  return PlaceDependentSystem{dim, std::move(maps), std::move(weights)};
}

namespace {

int draw_index(const Eigen::VectorXd& probs, SplitMix64& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

}  // namespace

std::pair<StatePoint, int> step(const PlaceDependentSystem& sys,
                                const StatePoint& x, SplitMix64& rng) {
  const int i = draw_index(sys.weights.evaluate(x), rng);
  return {sys.maps[static_cast<std::size_t>(i)].apply(x), i};
}

Trajectory simulate(const PlaceDependentSystem& sys, const StatePoint& x0,
                    int n, SplitMix64& rng) {
  Trajectory t;
  t.states.reserve(static_cast<std::size_t>(n) + 1);
  t.indices.reserve(static_cast<std::size_t>(n));
  t.states.push_back(x0);
  for (int k = 0; k < n; ++k) {
    auto [x, i] = step(sys, t.states.back(), rng);
    t.states.push_back(std::move(x));
    t.indices.push_back(i);
  }
  return t;
}

Trajectory backward_simulate(const PlaceDependentSystem& sys,
                             const StatePoint& x, int n, SplitMix64& rng) {
  if (!sys.weights.is_constant())
    throw NotApplicable(
        "backward_simulate: requires place-independent (constant) weights");
  const Eigen::VectorXd probs = sys.weights.evaluate(x);
  Trajectory t;
  t.states.reserve(static_cast<std::size_t>(n) + 1);
  t.states.push_back(x);
  // Composite of the maps drawn so far, newest innermost:
  // Y_k = A_k x + b_k with A_k = A_(k-1) M_i, b_k = A_(k-1) Q_i + b_(k-1).
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(sys.dim, sys.dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(sys.dim);
  for (int k = 0; k < n; ++k) {
    const int i = draw_index(probs, rng);
    const auto& m = sys.maps[static_cast<std::size_t>(i)];
    b += a * m.Q;
    a = a * m.M;
    t.states.push_back(a * x + b);
    t.indices.push_back(i);
  }
  return t;
}

double markov_apply(const PlaceDependentSystem& sys,
                    const std::function<double(const StatePoint&)>& f,
                    const StatePoint& x) {
  const Eigen::VectorXd p = sys.weights.evaluate(x);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    acc += p(i) * f(sys.maps[static_cast<std::size_t>(i)].apply(x));
  return acc;
}

StateLaw merge_points(std::vector<std::pair<StatePoint, double>> weighted,
                      double tol) {
  std::sort(weighted.begin(), weighted.end(),
            [](const auto& a, const auto& b) {
              return PointKey{a.first} < PointKey{b.first};
            });
  std::vector<StateLaw::Atom> atoms;
  atoms.reserve(weighted.size());
  for (auto& [pt, w] : weighted) {
    bool merged = false;
    if (!atoms.empty()) {
      const Eigen::VectorXd& anchor = atoms.back().first.p;
      if (anchor.size() == pt.size() &&
          ((anchor - pt).array().abs() <= tol).all()) {
        atoms.back().second += w;
        merged = true;
      }
    }
    if (!merged) atoms.push_back({PointKey{std::move(pt)}, w});
  }
  return StateLaw::from_atoms(std::move(atoms));
}

StateLaw delta_law(const StatePoint& x) {
  return StateLaw::point_mass(PointKey{x});
}

StateLaw exact_pushforward(const PlaceDependentSystem& sys,
                           const StateLaw& init, int n, std::size_t cap) {
  StateLaw law = init;
  const std::size_t nmaps = sys.maps.size();
  for (int s = 0; s < n; ++s) {
    if (law.size() * nmaps > cap)
      throw SupportCapExceeded("exact_pushforward: support cap exceeded at step " +
                               std::to_string(s + 1));
    std::vector<std::pair<StatePoint, double>> next;
    next.reserve(law.size() * nmaps);
    for (const auto& [key, w] : law.atoms()) {
      const Eigen::VectorXd probs = sys.weights.evaluate(key.p);
      for (std::size_t i = 0; i < nmaps; ++i) {
        const double wi = w * probs(static_cast<Eigen::Index>(i));
        if (wi > 0.0) next.emplace_back(sys.maps[i].apply(key.p), wi);
      }
    }
    law = merge_points(std::move(next));
  }
  return law;
}

}  // namespace pdifs
