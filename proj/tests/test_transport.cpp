#include <doctest.h>

#include <cmath>

#include "pdifs/rng.hpp"
#include "pdifs/transport.hpp"
#include "support/lp_oracle.hpp"

using pdifs::SplitMix64;
namespace tp = pdifs::transport;

namespace {

struct LineInstance {
  std::vector<double> z;
  std::vector<double> w;
  Eigen::VectorXd supply, demand;
  std::vector<double> za, zb;
};

// Two random 1-d probability laws merged onto a common sorted support.
LineInstance random_line_instance(int na, int nb, SplitMix64& rng) {
  LineInstance in;
  in.supply.resize(na);
  in.demand.resize(nb);
  std::vector<std::pair<double, double>> atoms;
  double total = 0.0;
  for (int i = 0; i < na; ++i) {
    in.za.push_back((rng.next_double() - 0.5) * 8.0);
    in.supply(i) = rng.next_double() + 1e-3;
    total += in.supply(i);
  }
  in.supply /= total;
  total = 0.0;
  for (int j = 0; j < nb; ++j) {
    in.zb.push_back((rng.next_double() - 0.5) * 8.0);
    in.demand(j) = rng.next_double() + 1e-3;
    total += in.demand(j);
  }
  in.demand /= total;
  for (int i = 0; i < na; ++i) atoms.emplace_back(in.za[static_cast<std::size_t>(i)], in.supply(i));
  for (int j = 0; j < nb; ++j) atoms.emplace_back(in.zb[static_cast<std::size_t>(j)], -in.demand(j));
  std::sort(atoms.begin(), atoms.end());
  for (const auto& [z, w] : atoms) {
    if (!in.z.empty() && in.z.back() == z) {
      in.w.back() += w;
    } else {
      in.z.push_back(z);
      in.w.push_back(w);
    }
  }
  return in;
}

Eigen::MatrixXd cost_matrix(const std::vector<double>& za,
                            const std::vector<double>& zb, bool truncate) {
  Eigen::MatrixXd c(za.size(), zb.size());
  for (std::size_t i = 0; i < za.size(); ++i)
    for (std::size_t j = 0; j < zb.size(); ++j) {
      const double d = std::abs(za[i] - zb[j]);
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          truncate ? std::min(d, 2.0) : d;
    }
  return c;
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("bipartite solver on a hand instance") {
  Eigen::MatrixXd cost(2, 2);
  cost << 0.0, 1.0, 1.0, 0.0;
  Eigen::VectorXd a(2), b(2);
  a << 0.5, 0.5;
  b << 0.25, 0.75;
  const auto res = tp::solve_bipartite(cost, a, b);
  CHECK(res.value == doctest::Approx(0.25).epsilon(1e-12));
  CHECK((res.plan.rowwise().sum() - a).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((res.plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff() <=
        1e-10);
}

TEST_CASE("bipartite solver matches the simplex oracle") {
  SplitMix64 rng(31337);
  for (int trial = 0; trial < 60; ++trial) {
    const int na = 2 + static_cast<int>(rng.next_u64() % 7);
    const int nb = 2 + static_cast<int>(rng.next_u64() % 7);
    Eigen::MatrixXd cost(na, nb);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) cost(i, j) = rng.next_double() * 3.0;
    Eigen::VectorXd a(na), b(nb);
    for (int i = 0; i < na; ++i) a(i) = rng.next_double() + 0.05;
    for (int j = 0; j < nb; ++j) b(j) = rng.next_double() + 0.05;
    a /= a.sum();
    b /= b.sum();
    const double got = tp::solve_bipartite(cost, a, b).value;
    const double want = oracle::transport_value(cost, a, b);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("plan marginals are feasible") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_line_instance(6, 9, rng);
    const auto res = tp::solve_bipartite(cost_matrix(in.za, in.zb, false),
                                         in.supply, in.demand);
    CHECK((res.plan.array() >= -1e-12).all());
    CHECK((res.plan.rowwise().sum() - in.supply).cwiseAbs().maxCoeff() <=
          1e-10);
    CHECK(
        (res.plan.colwise().sum().transpose() - in.demand).cwiseAbs().maxCoeff() <=
        1e-10);
  }
}

TEST_CASE("line W1 equals the LP value") {
  SplitMix64 rng(8080);
  for (int trial = 0; trial < 40; ++trial) {
    const auto in = random_line_instance(8, 8, rng);
    const double sorted_value = tp::line_w1(in.z, in.w);
    const double lp = oracle::transport_value(cost_matrix(in.za, in.zb, false),
                                              in.supply, in.demand);
    CHECK(sorted_value == doctest::Approx(lp).epsilon(1e-9));
  }
}

TEST_CASE("line flat metric equals the truncated-cost LP value") {
  SplitMix64 rng(5150);
  for (int trial = 0; trial < 60; ++trial) {
    const int na = 1 + static_cast<int>(rng.next_u64() % 8);
    const int nb = 1 + static_cast<int>(rng.next_u64() % 8);
    const auto in = random_line_instance(na, nb, rng);
    const double dp = tp::line_flat(in.z, in.w);
    const double lp = oracle::transport_value(cost_matrix(in.za, in.zb, true),
                                              in.supply, in.demand);
    CHECK(dp == doctest::Approx(lp).epsilon(1e-9));
  }
}

TEST_CASE("line flat handles point masses") {
  CHECK(tp::line_flat({0.0, 10.0}, {1.0, -1.0}) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(tp::line_flat({0.0, 0.5}, {1.0, -1.0}) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tp::line_flat({1.0}, {0.0}) == 0.0);
}

}  // TEST_SUITE
