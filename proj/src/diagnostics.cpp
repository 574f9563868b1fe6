#include "pdifs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdifs/errors.hpp"
#include "pdifs/parallel.hpp"

namespace pdifs {

Region Region::box(int dim, double lo, double hi) {
  Region r;
  r.lo = Eigen::VectorXd::Constant(dim, lo);
  r.hi = Eigen::VectorXd::Constant(dim, hi);
  return r;
}

const char* method_name(Method m) {
  return m == Method::certified ? "certified" : "estimated";
}

namespace {

void require_region(const Region& region, int dim) {
  if (region.lo.size() != dim || region.hi.size() != dim)
    throw DegenerateRegion("region: dimension mismatch");
  if (((region.hi - region.lo).array() <= 0.0).any())
    throw DegenerateRegion("region: box must have positive extent");
}

StatePoint sample_point(const Region& region, SplitMix64& rng) {
  StatePoint x(region.lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x(i) = region.lo(i) + rng.next_double() * (region.hi(i) - region.lo(i));
  return x;
}

// Grid over the region with roughly bounded point count; 101 points on the
// line matches the pair grids used in the reports.
std::vector<StatePoint> region_grid(const Region& region) {
  const int dim = static_cast<int>(region.lo.size());
  int per_axis = 101;
  if (dim > 1)
    per_axis = std::max(
        2, static_cast<int>(std::floor(std::pow(128.0, 1.0 / dim))));
  std::vector<StatePoint> pts;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    StatePoint x(dim);
    for (int k = 0; k < dim; ++k)
      x(k) = region.lo(k) + (region.hi(k) - region.lo(k)) *
                                static_cast<double>(idx[static_cast<std::size_t>(k)]) /
                                static_cast<double>(per_axis - 1);
    pts.push_back(std::move(x));
    int k = 0;
    while (k < dim && ++idx[static_cast<std::size_t>(k)] == per_axis) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == dim) break;
  }
  return pts;
}

struct CheckSetup {
  const PlaceDependentSystem& sys;
  bool atom_level_delta;  // contract test on ||M_i|| instead of per pair
};

ConditionReport check_impl(const CheckSetup& setup, const Region& region,
                           int pairs, SplitMix64& rng) {
  const PlaceDependentSystem& sys = setup.sys;
  if (pairs < 1) throw Error("check: pairs must be >= 1");
  require_region(region, sys.dim);

  const int nmaps = sys.map_count();
  Eigen::VectorXd norms(nmaps), jumps(nmaps);
  for (int i = 0; i < nmaps; ++i) {
    norms(i) = sys.maps[static_cast<std::size_t>(i)].operator_norm_bound;
    jumps(i) = sys.maps[static_cast<std::size_t>(i)].Q.norm();
  }

  ConditionReport rep;
  rep.region = region;
  rep.pairs_sampled = pairs;

  std::vector<std::pair<StatePoint, StatePoint>> pair_set;
  pair_set.reserve(static_cast<std::size_t>(pairs));
  for (int k = 0; k < pairs; ++k)
    pair_set.emplace_back(sample_point(region, rng),
                          sample_point(region, rng));

  // Contraction constant.
  if (auto sup = sys.weights.certified_sup(norms)) {
    rep.alpha = {*sup, Method::certified,
                 "vertex sup of sum_i p_i(x) * ||M_i||"};
  } else {
    double worst = 0.0;
    for (const auto& [x, y] : pair_set) {
      const double dxy = (x - y).norm();
      if (dxy <= 0.0) continue;
      const Eigen::VectorXd p = sys.weights.evaluate(x);
      double acc = 0.0;
      for (int i = 0; i < nmaps; ++i)
        acc += p(i) * (sys.maps[static_cast<std::size_t>(i)].apply(x) -
                       sys.maps[static_cast<std::size_t>(i)].apply(y))
                          .norm();
      worst = std::max(worst, acc / dxy);
    }
    rep.alpha = {worst, Method::estimated,
                 "max expected contraction ratio over sampled pairs"};
  }

  // Expected jump size at the origin reference point.
  if (auto sup = sys.weights.certified_sup(jumps)) {
    rep.displacement = {*sup, Method::certified,
                        "vertex sup of sum_i p_i(x) * |Q_i|"};
  } else {
    double worst = 0.0;
    for (const auto& [x, y] : pair_set)
      worst = std::max(worst, sys.weights.evaluate(x).dot(jumps));
    rep.displacement = {worst, Method::estimated,
                        "max expected jump size over sampled points"};
  }

  const auto cert = sys.weights.holder_certificate();
  rep.holder_l = {cert.l, Method::certified,
                  "closed-form certificate of the weight kind"};
  rep.holder_nu = cert.nu;

  // Meet mass on the contracting index set. The threshold admits every map
  // whose pathwise factor stays within the certified bound, so a map that
  // attains alpha exactly still counts as contracting.
  rep.delta_threshold = std::max(rep.alpha.value, norms.maxCoeff());
  double delta = std::numeric_limits<double>::infinity();
  auto delta_for = [&](const StatePoint& x, const StatePoint& y) {
    const Eigen::VectorXd px = sys.weights.evaluate(x);
    const Eigen::VectorXd py = sys.weights.evaluate(y);
    const double dxy = (x - y).norm();
    double acc = 0.0;
    for (int i = 0; i < nmaps; ++i) {
      bool contracts;
      if (setup.atom_level_delta) {
        contracts = norms(i) <= rep.delta_threshold + kMassTol;
      } else {
        const double di = (sys.maps[static_cast<std::size_t>(i)].apply(x) -
                           sys.maps[static_cast<std::size_t>(i)].apply(y))
                              .norm();
        contracts = di <= rep.delta_threshold * dxy + 1e-12;
      }
      if (contracts) acc += std::min(px(i), py(i));
    }
    return acc;
  };
  for (const auto& [x, y] : pair_set) delta = std::min(delta, delta_for(x, y));
  const auto grid = region_grid(region);
  for (const auto& x : grid)
    for (const auto& y : grid) delta = std::min(delta, delta_for(x, y));
  rep.delta = {delta, Method::estimated,
               "min meet mass on the contracting set over samples and grid"};

  // A1 with L(x) = |x|: PL <= lambda L + c pointwise over the samples.
  rep.lyapunov_lambda = rep.alpha.value;
  double lyap_c = 0.0;
  auto lyap = [](const StatePoint& v) { return v.norm(); };
  for (const auto& [x, y] : pair_set) {
    lyap_c = std::max(lyap_c, markov_apply(sys, lyap, x) -
                                  rep.lyapunov_lambda * x.norm());
  }
  rep.lyapunov_c = lyap_c;

  rep.pass_b1 = rep.alpha.value < 1.0;
  rep.pass_b2 = std::isfinite(rep.displacement.value);
  rep.pass_b3 = std::isfinite(rep.holder_l.value) && rep.holder_nu > 0.0 &&
                rep.holder_nu <= 1.0;
  rep.pass_b4 = rep.delta.value > 0.0;
  return rep;
}

}  // namespace

ConditionReport check_conditions(const PlaceDependentSystem& sys,
                                 const Region& region, int pairs,
                                 SplitMix64& rng) {
  return check_impl({sys, false}, region, pairs, rng);
}

ConditionReport check_conditions_atom_contracting(
    const PlaceDependentSystem& sys, const Region& region, int pairs,
    SplitMix64& rng) {
  return check_impl({sys, true}, region, pairs, rng);
}

EmpiricalLaw estimate_invariant(const PlaceDependentSystem& sys, int burn_in,
                                int samples, SplitMix64& rng) {
  if (burn_in < 1 || samples < 1)
    throw Error("estimate_invariant: burn_in and samples must be >= 1");
  StatePoint x = StatePoint::Zero(sys.dim);
  for (int k = 0; k < burn_in; ++k) x = step(sys, x, rng).first;
  std::vector<StatePoint> kept;
  kept.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    x = step(sys, x, rng).first;
    kept.push_back(x);
  }
  return EmpiricalLaw::uniform(std::move(kept));
}

double stationarity_check(const PlaceDependentSystem& sys,
                          const EmpiricalLaw& law) {
  if (law.size() == 0) throw Error("stationarity_check: empty law");
  std::vector<StatePoint> pts;
  std::vector<double> ws;
  pts.reserve(law.size() * sys.maps.size());
  ws.reserve(law.size() * sys.maps.size());
  for (std::size_t j = 0; j < law.size(); ++j) {
    const Eigen::VectorXd p = sys.weights.evaluate(law.points[j]);
    for (std::size_t i = 0; i < sys.maps.size(); ++i) {
      const double w = law.weights[j] * p(static_cast<Eigen::Index>(i));
      if (w > 0.0) {
        pts.push_back(sys.maps[i].apply(law.points[j]));
        ws.push_back(w);
      }
    }
  }
  const EmpiricalLaw evolved = EmpiricalLaw::make(std::move(pts), std::move(ws));
  return fm_distance(law, evolved);
}

ConvergenceResult convergence_experiment(const PlaceDependentSystem& sys,
                                         const StatePoint& x0,
                                         const StatePoint& y0, int n_max,
                                         int replicas,
                                         std::uint64_t master_seed,
                                         int threads) {
  if (replicas < 100)
    throw Error("convergence_experiment: replicas must be >= 100");
  if (n_max < 0) throw Error("convergence_experiment: n_max must be >= 0");

  const std::size_t r = static_cast<std::size_t>(replicas);
  const std::size_t steps = static_cast<std::size_t>(n_max) + 1;
  std::vector<StatePoint> states_x(r * steps), states_y(r * steps);
  parallel_for(r, threads, [&](std::size_t rep) {
    SplitMix64 sx(derive_stream(master_seed, rep));
    Trajectory tx = simulate(sys, x0, n_max, sx);
    SplitMix64 sy(derive_stream(master_seed, r + rep));
    Trajectory ty = simulate(sys, y0, n_max, sy);
    for (std::size_t n = 0; n < steps; ++n) {
      states_x[n * r + rep] = std::move(tx.states[n]);
      states_y[n * r + rep] = std::move(ty.states[n]);
    }
  });

  ConvergenceResult out;
  out.replicas = replicas;
  out.master_seed = master_seed;
  out.noise_floor = 2.0 / std::sqrt(static_cast<double>(replicas));
  out.ns.resize(steps);
  out.fm.resize(steps);
  out.w1.resize(steps);
  parallel_for(steps, threads, [&](std::size_t n) {
    std::vector<StatePoint> px(states_x.begin() + static_cast<std::ptrdiff_t>(n * r),
                               states_x.begin() + static_cast<std::ptrdiff_t>((n + 1) * r));
    std::vector<StatePoint> py(states_y.begin() + static_cast<std::ptrdiff_t>(n * r),
                               states_y.begin() + static_cast<std::ptrdiff_t>((n + 1) * r));
    const EmpiricalLaw lx = EmpiricalLaw::uniform(std::move(px));
    const EmpiricalLaw ly = EmpiricalLaw::uniform(std::move(py));
    out.ns[n] = static_cast<int>(n);
    out.fm[n] = fm_distance(lx, ly);
    out.w1[n] = w1_distance(lx, ly);
  });

  std::vector<std::pair<int, double>> series;
  series.reserve(steps);
  for (std::size_t n = 0; n < steps; ++n) series.emplace_back(out.ns[n], out.fm[n]);
  try {
    out.fit = fit_exponential(series, out.noise_floor);
  } catch (const InsufficientData&) {
    out.fit = RateFit{};
    out.fit.degenerate = true;
  }
  return out;
}

}  // namespace pdifs
