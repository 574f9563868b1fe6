#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "pdifs/errors.hpp"
#include "pdifs/rng.hpp"

namespace pdifs {

inline constexpr double kWeightPruneTol = 1e-15;
inline constexpr double kMassTol = 1e-12;

// Finite nonnegative measure with weighted atoms over an ordered label type.
// Labels are opaque identities; any numeric payload (map index, state point)
// is attached by the caller. Atoms are kept sorted and distinct; weights
// below kWeightPruneTol are dropped on construction so that exact pushforward
// supports stay tight.
template <class Label>
class DiscreteMeasure {
 public:
  using Atom = std::pair<Label, double>;

  DiscreteMeasure() = default;

  // Sorts, merges duplicate labels by summing, prunes negligible weights.
  // Throws on negative weights.
  static DiscreteMeasure from_atoms(std::vector<Atom> raw) {
    for (const auto& [label, w] : raw) {
      if (!(w >= 0.0)) throw Error("DiscreteMeasure: negative or NaN weight");
    }
    std::sort(raw.begin(), raw.end(),
              [](const Atom& a, const Atom& b) { return a.first < b.first; });
    DiscreteMeasure m;
    m.atoms_.reserve(raw.size());
    for (auto& atom : raw) {
      if (!m.atoms_.empty() && m.atoms_.back().first == atom.first) {
        m.atoms_.back().second += atom.second;
      } else {
        m.atoms_.push_back(std::move(atom));
      }
    }
    std::erase_if(m.atoms_,
                  [](const Atom& a) { return a.second < kWeightPruneTol; });
    m.mass_ = 0.0;
    for (const auto& [label, w] : m.atoms_) m.mass_ += w;
    return m;
  }

  static DiscreteMeasure point_mass(Label label, double w = 1.0) {
    return from_atoms({{std::move(label), w}});
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  double mass() const { return mass_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  bool is_probability(double tol = kMassTol) const {
    return std::abs(mass_ - 1.0) <= tol;
  }

  double weight_of(const Label& label) const {
    auto it = std::lower_bound(
        atoms_.begin(), atoms_.end(), label,
        [](const Atom& a, const Label& l) { return a.first < l; });
    if (it != atoms_.end() && it->first == label) return it->second;
    return 0.0;
  }

 private:
  std::vector<Atom> atoms_;
  double mass_ = 0.0;
};

// Total variation in the full L1 convention: sum over atoms of |mu - nu|.
// For probability measures this equals 2 * (1 - mass(meet(mu, nu))), i.e.
// twice the "half" convention some texts use.
template <class Label>
double tv_norm_diff(const DiscreteMeasure<Label>& mu,
                    const DiscreteMeasure<Label>& nu) {
  const auto& a = mu.atoms();
  const auto& b = nu.atoms();
  double total = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      total += a[i].second;
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      total += b[j].second;
      ++j;
    } else {
      total += std::abs(a[i].second - b[j].second);
      ++i;
      ++j;
    }
  }
  return total;
}

// Greatest lower bound in the lattice of finite measures: atomwise minimum.
template <class Label>
DiscreteMeasure<Label> meet(const DiscreteMeasure<Label>& mu,
                            const DiscreteMeasure<Label>& nu) {
  const auto& a = mu.atoms();
  const auto& b = nu.atoms();
  std::vector<typename DiscreteMeasure<Label>::Atom> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      out.emplace_back(a[i].first, std::min(a[i].second, b[j].second));
      ++i;
      ++j;
    }
  }
  return DiscreteMeasure<Label>::from_atoms(std::move(out));
}

// Normalized residual (p - q) / (1 - mass(q)). Returns nullopt (the zero
// residual) when q already carries essentially all of p's mass. Requires
// q <= p atomwise up to kMassTol.
template <class Label>
std::optional<DiscreteMeasure<Label>> residual_normalized(
    const DiscreteMeasure<Label>& p, const DiscreteMeasure<Label>& q) {
  for (const auto& [label, w] : q.atoms()) {
    if (w > p.weight_of(label) + kMassTol)
      throw ViolatedDomination("residual_normalized: q exceeds p on an atom");
  }
  if (q.mass() >= 1.0 - kMassTol) return std::nullopt;
  const double scale = 1.0 / (1.0 - q.mass());
  std::vector<typename DiscreteMeasure<Label>::Atom> out;
  out.reserve(p.size());
  for (const auto& [label, w] : p.atoms()) {
    const double r = w - q.weight_of(label);
    if (r > 0.0) out.emplace_back(label, r * scale);
  }
  return DiscreteMeasure<Label>::from_atoms(std::move(out));
}

// Draws a label with probability weight / mass. Deterministic given the
// stream state. Throws EmptyMeasure on zero mass.
template <class Label>
const Label& sample_atom(const DiscreteMeasure<Label>& m, SplitMix64& rng) {
  if (m.mass() <= 0.0 || m.empty())
    throw EmptyMeasure("sample_atom: measure has zero mass");
  const double u = rng.next_double() * m.mass();
  double acc = 0.0;
  for (const auto& atom : m.atoms()) {
    acc += atom.second;
    if (u < acc) return atom.first;
  }
  return m.atoms().back().first;  // u landed on accumulated round-off
}

}  // namespace pdifs
