#pragma once

// Independent reference computations for the tests. None of these call the
// library routine they are used to check.

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "groupoid/groupoid.hpp"

namespace oracle {

using namespace groupoid;

/// E ×_G E built from raw pairs: points p = (x, a) of X × G, pairs (p₁,p₂)
/// modulo (p₁,p₂) ~ (p₁g, p₂g), composition [p₁,p₂]∘[p₃,p₄] = [p₁, p₄g⁻¹]
/// whenever p₃ = p₂g.
struct RawGauge {
  using Point = std::pair<std::size_t, std::size_t>;  // (x, element id)
  using Pair = std::pair<Point, Point>;

  FiniteGroupoid groupoid;
  std::vector<std::vector<Pair>> classes;  // members of each arrow
  std::map<Pair, std::size_t> class_of;
};

inline RawGauge raw_gauge(std::size_t n, const FiniteGroup& G) {
  using Point = RawGauge::Point;
  using Pair = RawGauge::Pair;
  const std::size_t k = G.size();
  const auto act = [&](Point p, std::size_t g) {
    return Point{p.first, idx(G.mul(element_at(p.second), element_at(g)))};
  };
  RawGauge r;
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t b = 0; b < k; ++b) {
          const Pair p{{y, a}, {x, b}};
          if (r.class_of.count(p)) continue;
          const std::size_t c = r.classes.size();
          r.classes.emplace_back();
          for (std::size_t g = 0; g < k; ++g) {
            const Pair q{act(p.first, g), act(p.second, g)};
            if (r.class_of.emplace(q, c).second) r.classes[c].push_back(q);
          }
        }
  std::vector<std::string> bases, names;
  std::vector<Base> src, tgt;
  std::vector<Arrow> inv, identity;
  for (std::size_t x = 0; x < n; ++x) bases.push_back(std::to_string(x));
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const Pair& p = r.classes[c].front();
    names.push_back("c" + std::to_string(c));
    tgt.push_back(base_at(p.first.first));
    src.push_back(base_at(p.second.first));
    inv.push_back(arrow_at(r.class_of.at({p.second, p.first})));
  }
  for (std::size_t x = 0; x < n; ++x) identity.push_back(arrow_at(r.class_of.at({{x, 0}, {x, 0}})));
  r.groupoid = FiniteGroupoid::generate(
      std::move(bases), std::move(names), std::move(src), std::move(tgt),
      [&](Arrow c1, Arrow c2) {
        const Pair& p = r.classes[idx(c1)].front();
        const Pair& q = r.classes[idx(c2)].front();
        // find g with q.first = p.second·g
        for (std::size_t g = 0; g < k; ++g)
          if (act(p.second, g) == q.first)
            return arrow_at(r.class_of.at({p.first, act(q.second, idx(G.inv(element_at(g))))}));
        throw std::logic_error("raw pairs not composable");
      },
      std::move(inv), std::move(identity));
  return r;
}

/// Number of composable triples on which associativity fails, by direct
/// enumeration of the tables.
inline std::size_t associativity_failures(const FiniteGroupoid& g) {
  std::size_t bad = 0;
  for (Arrow a : g.arrows())
    for (Arrow b : g.arrows()) {
      if (g.src(a) != g.tgt(b)) continue;
      for (Arrow c : g.arrows()) {
        if (g.src(b) != g.tgt(c)) continue;
        if (g.compose(g.compose(a, b), c) != g.compose(a, g.compose(b, c))) ++bad;
      }
    }
  return bad;
}

/// (f₁*f₂)(g) = Σ_{h·k = g} f₁(h)f₂(k) on a group, as a plain double loop.
inline std::vector<std::complex<double>> group_algebra_convolve(const FiniteGroup& G,
                                                                 const std::vector<std::complex<double>>& f1,
                                                                 const std::vector<std::complex<double>>& f2) {
  std::vector<std::complex<double>> out(G.size());
  for (Element h : G.elements())
    for (Element k : G.elements()) out[idx(G.mul(h, k))] += f1[idx(h)] * f2[idx(k)];
  return out;
}

/// The built-in groups of order ≤ 8.
inline std::vector<FiniteGroup> small_groups() {
  std::vector<FiniteGroup> gs;
  for (std::size_t n = 1; n <= 8; ++n) gs.push_back(FiniteGroup::cyclic(n));
  gs.push_back(FiniteGroup::symmetric(3));
  gs.push_back(FiniteGroup::dihedral4());
  gs.push_back(FiniteGroup::klein4());
  gs.push_back(FiniteGroup::quaternion8());
  return gs;
}

/// Uniformly random permutation of 0..n-1 (Fisher–Yates on the library Rng).
inline std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

}  // namespace oracle
