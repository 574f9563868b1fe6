#include <doctest.h>

#include <cmath>

#include "pdifs/errors.hpp"
#include "pdifs/system.hpp"
#include "support/fixtures.hpp"

using fixtures::map1d;
using fixtures::pt;
using pdifs::SplitMix64;
using pdifs::StateLaw;

namespace {

// Independent oracle: enumerate all index words of length n with their
// place-dependent probabilities and accumulate the terminal points.
StateLaw enumerate_forward_law(const pdifs::PlaceDependentSystem& sys,
                               const pdifs::StatePoint& x0, int n) {
  std::vector<std::pair<pdifs::StatePoint, double>> acc;
  struct Item {
    pdifs::StatePoint x;
    double w;
    int depth;
  };
  std::vector<Item> stack{{x0, 1.0, 0}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    if (it.depth == n) {
      acc.emplace_back(it.x, it.w);
      continue;
    }
    const Eigen::VectorXd p = sys.weights.evaluate(it.x);
    for (int i = 0; i < sys.map_count(); ++i)
      stack.push_back({sys.maps[static_cast<std::size_t>(i)].apply(it.x),
                       it.w * p(i), it.depth + 1});
  }
  return pdifs::merge_points(std::move(acc));
}

// Backward words: Y_n = S_(i0) o ... o S_(i(n-1)) x, word probability from
// the constant weights.
StateLaw enumerate_backward_law(const pdifs::PlaceDependentSystem& sys,
                                const pdifs::StatePoint& x, int n) {
  const Eigen::VectorXd p = sys.weights.evaluate(x);
  const int nmaps = sys.map_count();
  std::vector<std::pair<pdifs::StatePoint, double>> acc;
  std::vector<int> word(static_cast<std::size_t>(n), 0);
  while (true) {
    pdifs::StatePoint y = x;
    double w = 1.0;
    for (int k = n - 1; k >= 0; --k) {
      y = sys.maps[static_cast<std::size_t>(word[static_cast<std::size_t>(k)])]
              .apply(y);
      w *= p(word[static_cast<std::size_t>(k)]);
    }
    acc.emplace_back(std::move(y), w);
    int k = 0;
    while (k < n && ++word[static_cast<std::size_t>(k)] == nmaps) {
      word[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == n) break;
  }
  return pdifs::merge_points(std::move(acc));
}

bool laws_equal(const StateLaw& a, const StateLaw& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& [ka, wa] = a.atoms()[i];
    const auto& [kb, wb] = b.atoms()[i];
    if ((ka.p - kb.p).cwiseAbs().maxCoeff() > tol) return false;
    if (std::abs(wa - wb) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("system") {

TEST_CASE("affine map norm bound") {
  CHECK(map1d(0.3, 0.0).operator_norm_bound == 0.3);
  CHECK(map1d(-0.5, 1.0).operator_norm_bound == 0.5);

  Eigen::MatrixXd m(2, 2);
  m << 0.0, 1.0, 0.0, 0.0;
  const auto a = pdifs::AffineMap::make(m, Eigen::VectorXd::Zero(2));
  // Power iteration on M^T M as an independent check.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(2).normalized();
  for (int k = 0; k < 200; ++k) v = (m.transpose() * (m * v)).normalized();
  const double sigma = (m * v).norm();
  CHECK(a.operator_norm_bound >= sigma - 1e-9);
  CHECK(a.operator_norm_bound == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weight kinds evaluate to probability vectors") {
  SplitMix64 rng(5);
  const auto sys = fixtures::canonical();
  Eigen::MatrixXd slopes(3, 1);
  slopes << 0.5, -0.2, 0.0;
  Eigen::VectorXd icept(3);
  icept << 0.0, 0.3, -1.0;
  const auto soft = pdifs::WeightFunction::softmax_affine(slopes, icept);
  for (int k = 0; k < 200; ++k) {
    const auto x = pt((rng.next_double() - 0.5) * 20.0);
    for (const auto& w : {sys.weights, soft}) {
      const Eigen::VectorXd p = w.evaluate(x);
      CHECK((p.array() >= 0.0).all());
      CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    }
  }
  CHECK(sys.weights.evaluate(pt(0.0))(0) == 0.5);
  CHECK(sys.weights.evaluate(pt(5.0))(0) == 0.2);
  CHECK(sys.weights.evaluate(pt(-5.0))(0) == 0.8);
}

TEST_CASE("step on a deterministic system") {
  Eigen::VectorXd one(1);
  one << 1.0;
  const auto sys = pdifs::PlaceDependentSystem::make(
      1, {map1d(0.5, 0.0)}, pdifs::WeightFunction::constant(one));
  SplitMix64 rng(1);
  const auto [x, i] = pdifs::step(sys, pt(4.0), rng);
  CHECK(x(0) == 2.0);
  CHECK(i == 0);
}

TEST_CASE("step index frequency matches the weights") {
  const auto sys = fixtures::canonical();
  SplitMix64 rng(123);
  int second = 0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k)
    if (pdifs::step(sys, pt(0.0), rng).second == 1) ++second;
  CHECK(std::abs(static_cast<double>(second) / draws - 0.5) <= 0.01);
}

TEST_CASE("simulate basics and replay determinism") {
  const auto sys = fixtures::canonical();
  SplitMix64 r0(9);
  CHECK(pdifs::simulate(sys, pt(1.0), 0, r0).states.size() == 1);

  Eigen::VectorXd one(1);
  one << 1.0;
  const auto det = pdifs::PlaceDependentSystem::make(
      1, {map1d(0.5, 1.0)}, pdifs::WeightFunction::constant(one));
  SplitMix64 r1(9);
  const auto t = pdifs::simulate(det, pt(0.0), 3, r1);
  CHECK(t.states[0](0) == 0.0);
  CHECK(t.states[1](0) == 1.0);
  CHECK(t.states[2](0) == 1.5);
  CHECK(t.states[3](0) == 1.75);

  SplitMix64 a(77), b(77);
  const auto ta = pdifs::simulate(sys, pt(-5.0), 64, a);
  const auto tb = pdifs::simulate(sys, pt(-5.0), 64, b);
  CHECK(ta.indices == tb.indices);
  for (std::size_t k = 0; k < ta.states.size(); ++k)
    CHECK(ta.states[k] == tb.states[k]);

  // Contractive system stays in a bounded window.
  SplitMix64 c(31);
  const auto tl = pdifs::simulate(sys, pt(-5.0), 200, c);
  for (const auto& s : tl.states) CHECK(std::abs(s(0)) <= 10.0);
}

TEST_CASE("trajectory replays exactly") {
  const auto sys = fixtures::canonical();
  SplitMix64 rng(404);
  const auto t = pdifs::simulate(sys, pt(2.0), 50, rng);
  for (std::size_t k = 0; k + 1 < t.states.size(); ++k) {
    const auto& m = sys.maps[static_cast<std::size_t>(t.indices[k])];
    CHECK((t.states[k + 1] - m.apply(t.states[k])).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("backward_simulate requires constant weights") {
  SplitMix64 rng(3);
  CHECK_THROWS_AS(
      (void)pdifs::backward_simulate(fixtures::canonical(), pt(0.0), 4, rng),
      pdifs::NotApplicable);

  const auto sys = fixtures::constant_pair();
  CHECK(pdifs::backward_simulate(sys, pt(1.0), 0, rng).states.size() == 1);

  // Single map: backward equals forward.
  Eigen::VectorXd one(1);
  one << 1.0;
  const auto det = pdifs::PlaceDependentSystem::make(
      1, {map1d(0.5, 1.0)}, pdifs::WeightFunction::constant(one));
  SplitMix64 ra(8), rb(8);
  const auto fwd = pdifs::simulate(det, pt(3.0), 6, ra);
  const auto bwd = pdifs::backward_simulate(det, pt(3.0), 6, rb);
  for (std::size_t k = 0; k < fwd.states.size(); ++k)
    CHECK(std::abs(fwd.states[k](0) - bwd.states[k](0)) <= 1e-12);
}

TEST_CASE("backward and forward laws coincide for constant weights") {
  const auto sys = fixtures::constant_pair();
  for (int n = 1; n <= 8; ++n) {
    const auto fwd = pdifs::exact_pushforward(sys, pdifs::delta_law(pt(0.25)), n);
    const auto bwd = enumerate_backward_law(sys, pt(0.25), n);
    CHECK(laws_equal(fwd, bwd, 1e-12));
  }
}

TEST_CASE("markov_apply") {
  const auto sys = fixtures::canonical();
  SplitMix64 rng(15);
  for (int k = 0; k < 50; ++k) {
    const auto x = pt((rng.next_double() - 0.5) * 10.0);
    CHECK(pdifs::markov_apply(sys, [](const pdifs::StatePoint&) { return 1.0; },
                              x) == doctest::Approx(1.0).epsilon(1e-14));
  }
  const double pf0 = pdifs::markov_apply(
      sys, [](const pdifs::StatePoint& s) { return s(0); }, pt(0.0));
  CHECK(pf0 == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("markov_apply satisfies the drift inequality on a grid") {
  const auto sys = fixtures::canonical();
  const double alpha = 0.46, c = 0.8;
  auto lyap = [](const pdifs::StatePoint& s) { return s.norm(); };
  for (int k = 0; k <= 100; ++k) {
    const auto x = pt(-5.0 + 0.1 * k);
    CHECK(pdifs::markov_apply(sys, lyap, x) <=
          alpha * x.norm() + c + 1e-12);
  }
}

TEST_CASE("exact_pushforward") {
  const auto sys = fixtures::constant_pair();
  const auto init = pdifs::delta_law(pt(0.0));
  CHECK(laws_equal(pdifs::exact_pushforward(sys, init, 0), init, 0.0));

  const auto law1 = pdifs::exact_pushforward(sys, init, 1);
  REQUIRE(law1.size() == 2);
  CHECK(law1.atoms()[0].first.p(0) == 0.0);
  CHECK(law1.atoms()[0].second == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(law1.atoms()[1].first.p(0) == 1.0);
  CHECK(law1.atoms()[1].second == doctest::Approx(0.3).epsilon(1e-14));

  // Mean settles at the fixed point of m -> 0.5 m + 0.3; at n = 20 the
  // remaining bias 0.6 * 0.5^20 sits below 1e-6 and the support (2^20, no
  // merging for this dyadic family) still fits the default cap.
  const auto law20 = pdifs::exact_pushforward(sys, init, 20);
  double mean = 0.0;
  for (const auto& [key, w] : law20.atoms()) mean += w * key.p(0);
  CHECK(std::abs(mean - 0.6) <= 1e-6);

  // Mass conservation at every horizon.
  const auto canon = fixtures::canonical();
  StateLaw law = pdifs::delta_law(pt(-5.0));
  for (int n = 0; n < 12; ++n) {
    law = pdifs::exact_pushforward(canon, law, 1);
    CHECK(std::abs(law.mass() - 1.0) <= 1e-12);
  }

  CHECK_THROWS_AS(
      (void)pdifs::exact_pushforward(canon, pdifs::delta_law(pt(0.0)), 40,
                                     1 << 10),
      pdifs::SupportCapExceeded);
}

TEST_CASE("pushforward agrees with word enumeration oracle") {
  const auto sys = fixtures::canonical();
  for (int n = 1; n <= 6; ++n) {
    const auto fast = pdifs::exact_pushforward(sys, pdifs::delta_law(pt(-5.0)), n);
    const auto slow = enumerate_forward_law(sys, pt(-5.0), n);
    CHECK(laws_equal(fast, slow, 1e-12));
  }
}

TEST_CASE("euclidean metric axioms on random triples") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(
        3, [&](Eigen::Index) { return rng.next_double() * 4 - 2; });
    Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(
        3, [&](Eigen::Index) { return rng.next_double() * 4 - 2; });
    Eigen::VectorXd c = Eigen::VectorXd::NullaryExpr(
        3, [&](Eigen::Index) { return rng.next_double() * 4 - 2; });
    CHECK((a - b).norm() == (b - a).norm());
    CHECK((a - a).norm() == 0.0);
    CHECK((a - b).norm() <= (a - c).norm() + (c - b).norm() + 1e-12);
  }
}

TEST_CASE("point merging uses the tolerance") {
  auto law = pdifs::merge_points(
      {{pt(0.0), 0.5}, {pt(5e-13), 0.25}, {pt(1.0), 0.25}});
  CHECK(law.size() == 2);
  CHECK(law.atoms()[0].second == doctest::Approx(0.75).epsilon(1e-14));
}

}  // TEST_SUITE
