#pragma once

#include <utility>
#include <vector>

#include "pdifs/measure.hpp"
#include "pdifs/perpetuity.hpp"
#include "pdifs/rng.hpp"
#include "pdifs/system.hpp"

namespace fixtures {

inline pdifs::AffineMap map1d(double m, double q) {
  Eigen::MatrixXd mm(1, 1);
  mm << m;
  Eigen::VectorXd qq(1);
  qq << q;
  return pdifs::AffineMap::make(mm, qq);
}

inline pdifs::StatePoint pt(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

// Two contracting maps with clamped affine weights; the scenario most tests
// and the shipped canonical.scenario use.
inline pdifs::PlaceDependentSystem canonical() {
  Eigen::VectorXd slope(1);
  slope << -0.3;
  return pdifs::PlaceDependentSystem::make(
      1, {map1d(0.3, 0.0), map1d(0.5, 1.0)},
      pdifs::WeightFunction::clamped_affine_pair(slope, 0.5, 0.2, 0.8));
}

// Place-independent reference system.
inline pdifs::PlaceDependentSystem constant_pair() {
  Eigen::VectorXd probs(2);
  probs << 0.7, 0.3;
  return pdifs::PlaceDependentSystem::make(
      1, {map1d(0.5, 0.0), map1d(0.5, 1.0)},
      pdifs::WeightFunction::constant(probs));
}

// Point-mass components (0.3, 0) and (0.5, 1) mixed with the clamped
// weights; kernel-level twin of canonical().
inline pdifs::MixtureAffineKernel example_kernel() {
  Eigen::VectorXd slope(1);
  slope << -0.3;
  return pdifs::MixtureAffineKernel::make(
      1,
      {{{map1d(0.3, 0.0), 1.0}}, {{map1d(0.5, 1.0), 1.0}}},
      pdifs::WeightFunction::clamped_affine_pair(slope, 0.5, 0.2, 0.8));
}

// Same atoms with the hard mixing weight p(x) = clamp(1 - x, 0, 1).
inline pdifs::MixtureAffineKernel paper_p_kernel() {
  Eigen::VectorXd slope(1);
  slope << -1.0;
  return pdifs::MixtureAffineKernel::make(
      1,
      {{{map1d(0.3, 0.0), 1.0}}, {{map1d(0.5, 1.0), 1.0}}},
      pdifs::WeightFunction::clamped_affine_pair(slope, 1.0, 0.0, 1.0));
}

// Random probability measure on integer labels 0..support-1.
inline pdifs::DiscreteMeasure<int> random_probability(int support,
                                                      pdifs::SplitMix64& rng) {
  std::vector<std::pair<int, double>> atoms;
  double total = 0.0;
  for (int i = 0; i < support; ++i) {
    const double w = rng.next_double() + 1e-6;
    atoms.emplace_back(i, w);
    total += w;
  }
  for (auto& [label, w] : atoms) w /= total;
  return pdifs::DiscreteMeasure<int>::from_atoms(std::move(atoms));
}

// Random 1-d law with `support` distinct points and random weights.
inline pdifs::EmpiricalLaw random_law_1d(int support, pdifs::SplitMix64& rng,
                                         double span = 6.0) {
  std::vector<pdifs::StatePoint> pts;
  std::vector<double> ws;
  double total = 0.0;
  for (int i = 0; i < support; ++i) {
    pts.push_back(pt((rng.next_double() - 0.5) * span));
    ws.push_back(rng.next_double() + 1e-6);
    total += ws.back();
  }
  for (auto& w : ws) w /= total;
  return pdifs::EmpiricalLaw::make(std::move(pts), std::move(ws));
}

}  // namespace fixtures
