#pragma once

#include <optional>
#include <string>
#include <vector>

#include "groupoid/convolution.hpp"
#include "groupoid/group.hpp"
#include "groupoid/linalg.hpp"
#include "groupoid/random.hpp"
#include "groupoid/representation.hpp"
#include "groupoid/semidirect.hpp"

namespace groupoid {

/// Trivialized bundle E = X × G over X = {0, …, n−1}, right action
/// (x,a)·g = (x,ag).
struct FinitePrincipalBundle {
  std::size_t base_count = 0;
  FiniteGroup group;
};

/// s(x) = (x, σ(x)).
struct Section {
  std::vector<Element> sigma;
  Element operator()(Base x) const { return sigma.at(idx(x)); }
};

inline Section identity_section(const FinitePrincipalBundle& b) {
  return {std::vector<Element>(b.base_count, b.group.identity())};
}

inline Section random_section(const FinitePrincipalBundle& b, Rng& rng) {
  Section s;
  for (std::size_t x = 0; x < b.base_count; ++x) s.sigma.push_back(element_at(rng.below(b.group.size())));
  return s;
}

/// Every section, in lexicographic order of (σ(0), σ(1), …).
inline std::vector<Section> all_sections(const FinitePrincipalBundle& b) {
  std::vector<Section> out;
  std::vector<std::size_t> digits(b.base_count, 0);
  for (;;) {
    Section s;
    for (std::size_t d : digits) s.sigma.push_back(element_at(d));
    out.push_back(std::move(s));
    std::size_t i = b.base_count;
    while (i > 0 && ++digits[i - 1] == b.group.size()) digits[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

inline void require_section(const FinitePrincipalBundle& b, const Section& s) {
  if (s.sigma.size() != b.base_count) throw PreconditionError("section must assign one element per base point");
  for (Element e : s.sigma)
    if (idx(e) >= b.group.size()) throw PreconditionError("section value is not a group element");
}

/// E ×_G E in the normal form (y, g, x) = [(y,g),(x,e)].
struct GaugeGroupoid {
  FinitePrincipalBundle bundle;
  FiniteGroupoid groupoid;

  Arrow arrow(Base y, Element g, Base x) const {
    const std::size_t n = bundle.base_count;
    return arrow_at((idx(y) * bundle.group.size() + idx(g)) * n + idx(x));
  }
  struct Triple {
    Base y;
    Element g;
    Base x;
  };
  Triple triple(Arrow a) const {
    const std::size_t n = bundle.base_count, k = bundle.group.size();
    const std::size_t i = idx(a);
    return {base_at(i / n / k), element_at(i / n % k), base_at(i % n)};
  }
  /// Normal form of the class [(y,a),(x,b)].
  Arrow class_of(Base y, Element a, Base x, Element b) const {
    return arrow(y, bundle.group.mul(a, bundle.group.inv(b)), x);
  }
};

inline GaugeGroupoid gauge_groupoid(const FinitePrincipalBundle& b) {
  if (b.base_count == 0) throw PreconditionError("bundle base must be non-empty");
  const FiniteGroup& G = b.group;
  GaugeGroupoid gg{b, {}};
  const std::size_t n = b.base_count;
  std::vector<std::string> bases, names;
  std::vector<Base> src, tgt;
  std::vector<Arrow> inv, identity;
  for (std::size_t x = 0; x < n; ++x) bases.push_back(std::to_string(x));
  for (std::size_t y = 0; y < n; ++y)
    for (Element g : G.elements())
      for (std::size_t x = 0; x < n; ++x) {
        names.push_back("(" + std::to_string(y) + "," + G.name(g) + "," + std::to_string(x) + ")");
        src.push_back(base_at(x));
        tgt.push_back(base_at(y));
        inv.push_back(gg.arrow(base_at(x), G.inv(g), base_at(y)));
      }
  for (std::size_t x = 0; x < n; ++x) identity.push_back(gg.arrow(base_at(x), G.identity(), base_at(x)));
  gg.groupoid = FiniteGroupoid::generate(
      std::move(bases), std::move(names), std::move(src), std::move(tgt),
      [&](Arrow a, Arrow c) {
        const auto p = gg.triple(a), q = gg.triple(c);
        return gg.arrow(p.y, G.mul(p.g, q.g), q.x);
      },
      std::move(inv), std::move(identity));
  return gg;
}

/// {(x, g, x)}.
inline SubgroupoidSelection lorentz_subgroupoid(const GaugeGroupoid& gg) {
  std::vector<Arrow> out;
  for (std::size_t x = 0; x < gg.bundle.base_count; ++x)
    for (Element g : gg.bundle.group.elements()) out.push_back(gg.arrow(base_at(x), g, base_at(x)));
  return {gg.groupoid, std::move(out)};
}

/// {[s(y), s(x)]} = {(y, σ(y)σ(x)⁻¹, x)}.
inline SubgroupoidSelection translation_subgroupoid(const GaugeGroupoid& gg, const Section& s) {
  require_section(gg.bundle, s);
  const FiniteGroup& G = gg.bundle.group;
  std::vector<Arrow> out;
  for (Base y : gg.groupoid.bases())
    for (Base x : gg.groupoid.bases()) out.push_back(gg.arrow(y, G.mul(s(y), G.inv(s(x))), x));
  return {gg.groupoid, std::move(out)};
}

/// Γ₀ ⋊ Γ₁ for the Lorentz and section-translation subgroupoids.
struct PoincareSetup {
  GaugeGroupoid gauge;
  Section section;
  SemidirectGroupoid sd;
};

inline PoincareSetup poincare_setup(const FinitePrincipalBundle& b, const Section& s) {
  GaugeGroupoid gg = gauge_groupoid(b);
  SemidirectGroupoid sd = semidirect_product(gg.groupoid, lorentz_subgroupoid(gg), translation_subgroupoid(gg, s));
  return {std::move(gg), s, std::move(sd)};
}

struct PoincareReport {
  std::size_t arrow_count = 0;
  bool lorentz_is_isotropy = false;
  SubgroupoidProperties translation_properties;
  bool j_exists = false;
  bool J_is_iso = false;
  MorphismReport J_report;
  bool i_verified = false;
  std::size_t section_identity_checked = 0;
  std::size_t section_identity_failures = 0;
  std::optional<Arrow> section_identity_witness;

  bool passed() const {
    return lorentz_is_isotropy && translation_properties.is_closed && translation_properties.is_wide &&
           translation_properties.is_transitive && j_exists && J_is_iso && i_verified &&
           section_identity_failures == 0;
  }
};

/// Γ ≅ Γ₀ ⋊ Γ₁ for the section s, plus the identity
/// i(ρ([s(x)g, s(y)])) = [s(x), s(y)] on every arrow.
inline PoincareReport verify_poincare_decomposition(const FinitePrincipalBundle& b, const Section& s,
                                                    const IsoSearchOptions& opts = {}) {
  require_section(b, s);
  const GaugeGroupoid gg = gauge_groupoid(b);
  const FiniteGroup& G = b.group;
  PoincareReport r;
  r.arrow_count = gg.groupoid.arrow_count();
  const SubgroupoidSelection g0 = lorentz_subgroupoid(gg);
  const SubgroupoidSelection g1 = translation_subgroupoid(gg, s);
  r.lorentz_is_isotropy = g0 == isotropy_subgroupoid(gg.groupoid);
  r.translation_properties = subgroupoid_properties(gg.groupoid, g1);
  if (!r.lorentz_is_isotropy || !r.translation_properties.is_closed || !r.translation_properties.is_wide ||
      !r.translation_properties.is_transitive)
    return r;

  const Prop1Result p = prop1_equivalence(gg.groupoid, g0, g1, opts);
  r.j_exists = p.j_exists;
  r.J_is_iso = p.J_is_iso;
  r.J_report = p.J_report;
  r.i_verified = p.i_verified();
  if (!p.i_map) return r;

  const Quotient q = quotient_by_isotropy(gg.groupoid, g0);
  const InducedSubgroupoid t = induce(gg.groupoid, g1);
  for (Arrow a : gg.groupoid.arrows()) {
    // a = (x, k, y) = [s(x)g, s(y)] with g = σ(x)⁻¹kσ(y)
    const auto [x, k, y] = gg.triple(a);
    const Arrow cls = q.projection.arrow_map[idx(a)];
    const Arrow image = t.parent(p.i_map->arrow_map[idx(cls)]);
    ++r.section_identity_checked;
    if (image != gg.arrow(x, G.mul(s(x), G.inv(s(y))), y)) {
      ++r.section_identity_failures;
      if (!r.section_identity_witness) r.section_identity_witness = a;
    }
  }
  return r;
}

/// The product on Γ₀ ⋊ Γ₁ as the explicit double sum over z ∈ X and g′ ∈ G,
/// with counting μ and dg:
///   (f₁*f₂)(γ₀,γ₁) = Σ_z Σ_{g′} f₁([s(x)g′,s(x)], [s(x),s(z)])
///                                · f₂([s(z)g′⁻¹g,s(z)], [s(z),s(y)])
/// where γ₀ = [s(x)g, s(x)] and γ₁ = [s(x), s(y)].
inline GroupoidFunction poincare_convolve(const PoincareSetup& ps, const GroupoidFunction& f1,
                                          const GroupoidFunction& f2) {
  const auto& sd = ps.sd;
  const auto& gg = ps.gauge;
  const Section& s = ps.section;
  const FiniteGroup& G = gg.bundle.group;
  detail::require_size(sd.carrier, f1);
  detail::require_size(sd.carrier, f2);
  // [s(u)h, s(v)] in normal form
  const auto bracket = [&](Base u, Element h, Base v) { return gg.arrow(u, G.mul(G.mul(s(u), h), G.inv(s(v))), v); };
  GroupoidFunction out = GroupoidFunction::zero(sd.carrier.arrow_count());
  for (Arrow c : sd.carrier.arrows()) {
    const auto [a0, a1] = sd.pair_of[idx(c)];
    const auto t0 = gg.triple(a0);
    const Base x = t0.y, y = gg.triple(a1).x;
    const Element g = G.mul(G.mul(G.inv(s(x)), t0.g), s(x));
    Complex acc{};
    for (Base z : gg.groupoid.bases())
      for (Element gp : G.elements()) {
        const Arrow l1 = sd.arrow_of(bracket(x, gp, x), bracket(x, G.identity(), z));
        const Arrow l2 = sd.arrow_of(bracket(z, G.mul(G.inv(gp), g), z), bracket(z, G.identity(), y));
        acc += f1(l1) * f2(l2);
      }
    out[c] = acc;
  }
  return out;
}

/// Left multiplication by h on ℂ^G, basis ordered by element id.
inline Matrix left_regular(const FiniteGroup& G, Element h) {
  Matrix m(G.size(), G.size());
  for (Element g : G.elements()) m(idx(G.mul(h, g)), idx(g)) = 1.0;
  return m;
}

/// U₀(x,g,x) = L(g) on every fiber, indexed by sd.isotropy local ids.
inline UnitaryRep lorentz_regular_rep(const PoincareSetup& ps) {
  const auto& iso = ps.sd.isotropy;
  UnitaryRep r{{std::vector<std::size_t>(ps.gauge.bundle.base_count, ps.gauge.bundle.group.size())}, {}};
  for (Arrow parent : iso.to_parent) r.U.push_back(left_regular(ps.gauge.bundle.group, ps.gauge.triple(parent).g));
  return r;
}

/// i_x^y = L(σ(y)σ(x)⁻¹), indexed by sd.translations local ids. Satisfies
/// the commutation relation with lorentz_regular_rep for every section.
inline UnitaryRep section_translation_rep(const PoincareSetup& ps) {
  const auto& t = ps.sd.translations;
  UnitaryRep r{{std::vector<std::size_t>(ps.gauge.bundle.base_count, ps.gauge.bundle.group.size())}, {}};
  for (Arrow parent : t.to_parent) r.U.push_back(left_regular(ps.gauge.bundle.group, ps.gauge.triple(parent).g));
  return r;
}

}  // namespace groupoid
