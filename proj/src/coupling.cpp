#include "pdifs/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "pdifs/errors.hpp"

namespace pdifs {

double q_mass(const PlaceDependentSystem& sys, const StatePoint& x,
              const StatePoint& y) {
  const Eigen::VectorXd px = sys.weights.evaluate(x);
  const Eigen::VectorXd py = sys.weights.evaluate(y);
  return px.cwiseMin(py).sum();
}

CoupledState coupled_step(const PlaceDependentSystem& sys,
                          const CoupledState& s, SplitMix64& rng) {
  const Eigen::VectorXd px = sys.weights.evaluate(s.x);
  const Eigen::VectorXd py = sys.weights.evaluate(s.y);
  const Eigen::VectorXd met = px.cwiseMin(py);
  const Eigen::VectorXd rx = px - met;
  const Eigen::VectorXd ry = py - met;
  const double meet_mass = met.sum();
  const double res_mass_x = rx.sum();
  const double res_mass_y = ry.sum();

  const double u = rng.next_double();
  // Identical index weights leave an exactly zero residual; take the meet
  // branch outright so the degenerate case cannot draw from an empty
  // residual through round-off in meet_mass.
  if (u < meet_mass || res_mass_x <= 0.0 || res_mass_y <= 0.0) {
    double acc = 0.0;
    int i = 0;
    for (Eigen::Index k = 0; k < met.size(); ++k) {
      if (met(k) <= 0.0) continue;
      i = static_cast<int>(k);
      acc += met(k);
      if (u < acc) break;
    }
    const auto& m = sys.maps[static_cast<std::size_t>(i)];
    return {m.apply(s.x), m.apply(s.y), 1};
  }

  auto draw_from = [&rng](const Eigen::VectorXd& w, double total) {
    const double v = rng.next_double() * total;
    double acc = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      acc += w(k);
      if (v < acc) return static_cast<int>(k);
    }
    return static_cast<int>(w.size()) - 1;
  };
  const int i = draw_from(rx, res_mass_x);
  const int j = draw_from(ry, res_mass_y);
  return {sys.maps[static_cast<std::size_t>(i)].apply(s.x),
          sys.maps[static_cast<std::size_t>(j)].apply(s.y), 0};
}

CoupledTrajectory coupled_simulate(const PlaceDependentSystem& sys,
                                   const StatePoint& x0, const StatePoint& y0,
                                   int n, SplitMix64& rng) {
  CoupledTrajectory t;
  t.states.reserve(static_cast<std::size_t>(n) + 1);
  t.distances.reserve(static_cast<std::size_t>(n) + 1);
  t.states.push_back({x0, y0, 1});
  t.distances.push_back((x0 - y0).norm());
  for (int k = 0; k < n; ++k) {
    t.states.push_back(coupled_step(sys, t.states.back(), rng));
    const auto& s = t.states.back();
    t.distances.push_back((s.x - s.y).norm());
  }
  return t;
}

const char* stop_kind_name(StopKind k) {
  switch (k) {
    case StopKind::tau:
      return "tau";
    case StopKind::kappa:
      return "kappa";
    case StopKind::epsilon:
      return "epsilon";
    case StopKind::rho:
      return "rho";
  }
  return "?";
}

StoppingTimeSample stopping_time(const CoupledTrajectory& traj, StopKind kind,
                                 const StoppingParams& params) {
  if (traj.states.empty()) throw Error("stopping_time: empty trajectory");
  const int horizon = traj.horizon();
  StoppingTimeSample out;
  out.horizon = horizon;
  out.kind = kind;

  auto lyap = [&traj](int k) {
    const auto& s = traj.states[static_cast<std::size_t>(k)];
    return s.x.norm() + s.y.norm();
  };

  switch (kind) {
    case StopKind::tau: {
      // First n >= 1 from which the meet branch is used through the end of
      // the window; unresolved when the window ends on a residual step.
      if (horizon >= 1 &&
          traj.states[static_cast<std::size_t>(horizon)].flag == 0)
        return out;
      int last_zero = 0;
      for (int k = 1; k <= horizon; ++k)
        if (traj.states[static_cast<std::size_t>(k)].flag == 0) last_zero = k;
      out.value = std::max(1, last_zero + 1);
      return out;
    }
    case StopKind::epsilon: {
      for (int k = 1; k <= horizon; ++k)
        if (traj.states[static_cast<std::size_t>(k)].flag == 0) {
          out.value = k;
          return out;
        }
      return out;
    }
    case StopKind::kappa: {
      for (int k = 0; k <= horizon; ++k)
        if (lyap(k) < params.recurrence_radius) {
          out.value = k;
          return out;
        }
      return out;
    }
    case StopKind::rho: {
      const double threshold =
          2.0 * params.lyapunov_b / (1.0 - params.lyapunov_a);
      for (int k = 1; k <= horizon; ++k)
        if (lyap(k) < threshold) {
          out.value = k;
          return out;
        }
      return out;
    }
  }
  return out;
}

GeometricMoment geometric_moment(std::span<const StoppingTimeSample> samples,
                                 double beta) {
  if (samples.empty()) throw Error("geometric_moment: no samples");
  if (!(beta > 0.0 && beta < 1.0))
    throw Error("geometric_moment: beta must lie in (0, 1)");
  GeometricMoment out;
  double sum = 0.0;
  std::size_t used = 0, censored = 0;
  for (const auto& s : samples) {
    if (s.censored()) {
      ++censored;
      continue;
    }
    sum += std::pow(beta, -static_cast<double>(*s.value));
    ++used;
  }
  out.censored_fraction =
      static_cast<double>(censored) / static_cast<double>(samples.size());
  if (used > 0) out.estimate = sum / static_cast<double>(used);
  return out;
}

namespace {

StatePoint concat(const StatePoint& x, const StatePoint& y) {
  StatePoint z(x.size() + y.size());
  z << x, y;
  return z;
}

}  // namespace

PairLaw coupled_exact_pushforward(const PlaceDependentSystem& sys,
                                  const StatePoint& x0, const StatePoint& y0,
                                  int n, std::size_t cap) {
  PairLaw law = PairLaw::point_mass(PointKey{concat(x0, y0)});
  const int d = sys.dim;
  const std::size_t nmaps = sys.maps.size();
  const std::size_t branch = nmaps + nmaps * nmaps;
  for (int s = 0; s < n; ++s) {
    if (law.size() * branch > cap)
      throw SupportCapExceeded(
          "coupled_exact_pushforward: support cap exceeded at step " +
          std::to_string(s + 1));
    std::vector<std::pair<StatePoint, double>> next;
    for (const auto& [key, w] : law.atoms()) {
      const StatePoint x = key.p.head(d);
      const StatePoint y = key.p.tail(d);
      const Eigen::VectorXd px = sys.weights.evaluate(x);
      const Eigen::VectorXd py = sys.weights.evaluate(y);
      const Eigen::VectorXd met = px.cwiseMin(py);
      const Eigen::VectorXd rx = px - met;
      const Eigen::VectorXd ry = py - met;
      const double res_mass = 1.0 - met.sum();
      for (std::size_t i = 0; i < nmaps; ++i) {
        const double wi = w * met(static_cast<Eigen::Index>(i));
        if (wi > 0.0)
          next.emplace_back(concat(sys.maps[i].apply(x), sys.maps[i].apply(y)),
                            wi);
      }
      if (res_mass > 0.0 && rx.sum() > 0.0) {
        for (std::size_t i = 0; i < nmaps; ++i) {
          const double wi = rx(static_cast<Eigen::Index>(i));
          if (wi <= 0.0) continue;
          for (std::size_t j = 0; j < nmaps; ++j) {
            const double wj = ry(static_cast<Eigen::Index>(j));
            if (wj <= 0.0) continue;
            next.emplace_back(
                concat(sys.maps[i].apply(x), sys.maps[j].apply(y)),
                w * wi * wj / res_mass);
          }
        }
      }
    }
    law = merge_points(std::move(next));
  }
  return law;
}

StateLaw pair_marginal(const PairLaw& law, int dim, bool first) {
  std::vector<std::pair<StatePoint, double>> pts;
  pts.reserve(law.size());
  for (const auto& [key, w] : law.atoms()) {
    pts.emplace_back(first ? key.p.head(dim).eval() : key.p.tail(dim).eval(),
                     w);
  }
  return merge_points(std::move(pts));
}

}  // namespace pdifs
