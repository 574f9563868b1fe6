#include "pdifs/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pdifs/errors.hpp"
#include "pdifs/transport.hpp"

namespace pdifs {

EmpiricalLaw EmpiricalLaw::make(std::vector<StatePoint> points,
                                std::vector<double> weights) {
  if (points.size() != weights.size() || points.empty())
    throw Error("EmpiricalLaw: points/weights size mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error("EmpiricalLaw: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw Error("EmpiricalLaw: weights must sum to 1");
  const Eigen::Index d = points.front().size();
  for (const auto& p : points)
    if (p.size() != d) throw Error("EmpiricalLaw: mixed dimensions");
  return EmpiricalLaw{std::move(points), std::move(weights)};
}

EmpiricalLaw EmpiricalLaw::uniform(std::vector<StatePoint> points) {
  std::vector<double> w(points.size(),
                        1.0 / static_cast<double>(points.size()));
  return make(std::move(points), std::move(w));
}

int EmpiricalLaw::dim() const {
  return points.empty() ? 0 : static_cast<int>(points.front().size());
}

StateLaw law_as_measure(const EmpiricalLaw& law) {
  std::vector<StateLaw::Atom> atoms;
  atoms.reserve(law.size());
  for (std::size_t i = 0; i < law.size(); ++i)
    atoms.push_back({PointKey{law.points[i]}, law.weights[i]});
  return StateLaw::from_atoms(std::move(atoms));
}

EmpiricalLaw law_from_measure(const StateLaw& m) {
  std::vector<StatePoint> pts;
  std::vector<double> ws;
  pts.reserve(m.size());
  ws.reserve(m.size());
  for (const auto& [key, w] : m.atoms()) {
    pts.push_back(key.p);
    ws.push_back(w);
  }
  return EmpiricalLaw::make(std::move(pts), std::move(ws));
}

namespace {

// Signed net weights over the sorted union support of two 1-d laws.
void line_prepare(const EmpiricalLaw& a, const EmpiricalLaw& b,
                  std::vector<double>& positions,
                  std::vector<double>& net_weights) {
  std::vector<std::pair<double, double>> signed_atoms;
  signed_atoms.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    signed_atoms.emplace_back(a.points[i](0), a.weights[i]);
  for (std::size_t i = 0; i < b.size(); ++i)
    signed_atoms.emplace_back(b.points[i](0), -b.weights[i]);
  std::sort(signed_atoms.begin(), signed_atoms.end(),
            [](const auto& u, const auto& v) { return u.first < v.first; });
  positions.clear();
  net_weights.clear();
  for (const auto& [z, w] : signed_atoms) {
    if (!positions.empty() && positions.back() == z) {
      net_weights.back() += w;
    } else {
      positions.push_back(z);
      net_weights.push_back(w);
    }
  }
}

struct BipartiteInputs {
  std::vector<StatePoint> pa, pb;
  Eigen::VectorXd wa, wb;
};

BipartiteInputs bipartite_prepare(const EmpiricalLaw& a, const EmpiricalLaw& b,
                                  std::size_t cap, const char* who) {
  const StateLaw ma = law_as_measure(a);
  const StateLaw mb = law_as_measure(b);
  if (ma.size() + mb.size() > cap)
    throw SupportCapExceeded(std::string(who) + ": combined support " +
                             std::to_string(ma.size() + mb.size()) +
                             " exceeds cap " + std::to_string(cap));
  BipartiteInputs in;
  in.wa.resize(static_cast<Eigen::Index>(ma.size()));
  in.wb.resize(static_cast<Eigen::Index>(mb.size()));
  Eigen::Index i = 0;
  for (const auto& [key, w] : ma.atoms()) {
    in.pa.push_back(key.p);
    in.wa(i++) = w;
  }
  i = 0;
  for (const auto& [key, w] : mb.atoms()) {
    in.pb.push_back(key.p);
    in.wb(i++) = w;
  }
  return in;
}

double bipartite_distance(const EmpiricalLaw& a, const EmpiricalLaw& b,
                          std::size_t cap, bool truncate, const char* who) {
  BipartiteInputs in = bipartite_prepare(a, b, cap, who);
  Eigen::MatrixXd cost(in.pa.size(), in.pb.size());
  for (std::size_t r = 0; r < in.pa.size(); ++r)
    for (std::size_t c = 0; c < in.pb.size(); ++c) {
      double d = (in.pa[r] - in.pb[c]).norm();
      cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          truncate ? std::min(d, 2.0) : d;
    }
  return transport::solve_bipartite(cost, in.wa, in.wb).value;
}

void check_comparable(const EmpiricalLaw& a, const EmpiricalLaw& b) {
  if (a.dim() != b.dim() || a.dim() == 0)
    throw Error("distance: laws must share a positive dimension");
}

}  // namespace

double fm_distance(const EmpiricalLaw& a, const EmpiricalLaw& b,
                   std::size_t cap) {
  check_comparable(a, b);
  if (a.dim() == 1) {
    std::vector<double> z, w;
    line_prepare(a, b, z, w);
    return transport::line_flat(z, w);
  }
  return bipartite_distance(a, b, cap, true, "fm_distance");
}

double w1_distance(const EmpiricalLaw& a, const EmpiricalLaw& b,
                   std::size_t cap) {
  check_comparable(a, b);
  if (a.dim() == 1) {
    std::vector<double> z, w;
    line_prepare(a, b, z, w);
    return transport::line_w1(z, w);
  }
  return bipartite_distance(a, b, cap, false, "w1_distance");
}

RateFit fit_exponential(const std::vector<std::pair<int, double>>& series,
                        double noise_floor) {
  std::vector<double> xs, ys;
  int lo = 0, hi = 0;
  for (const auto& [n, v] : series) {
    if (!(v > noise_floor)) continue;
    if (xs.empty() || n < lo) lo = n;
    if (xs.empty() || n > hi) hi = n;
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 4)
    throw InsufficientData("fit_exponential: fewer than 4 points above floor");

  const double count = static_cast<double>(xs.size());
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= count;
  ym /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (ys[i] - ym);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  if (sxx <= 0.0)
    throw InsufficientData("fit_exponential: degenerate abscissa");

  RateFit fit;
  fit.window_lo = lo;
  fit.window_hi = hi;
  if (syy <= 1e-24) {
    fit.q_hat = 1.0;
    fit.c_hat = std::exp(ym);
    fit.r_squared = 0.0;
    fit.degenerate = true;
    return fit;
  }
  const double slope = sxy / sxx;
  const double intercept = ym - slope * xm;
  fit.q_hat = std::min(std::exp(slope), 1.0);
  fit.c_hat = std::exp(intercept);
  fit.r_squared = std::min(1.0, (sxy * sxy) / (sxx * syy));
  fit.degenerate = slope >= 0.0;
  return fit;
}

}  // namespace pdifs
