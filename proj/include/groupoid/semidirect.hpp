#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "groupoid/core.hpp"

namespace groupoid {

/// Conjugation action α_{γ₁}(γ₀) = γ₁∘γ₀∘γ₁⁻¹ of an arrow on the isotropy
/// group at its source. Lands in the isotropy group at tgt(γ₁).
inline Arrow alpha(const FiniteGroupoid& parent, Arrow g1, Arrow g0) {
  if (!parent.is_loop(g0) || parent.src(g0) != parent.src(g1))
    throw PreconditionError("alpha: " + parent.arrow_name(g0) + " is not an isotropy arrow at the source of " +
                            parent.arrow_name(g1));
  return parent.compose(parent.compose(g1, g0), parent.inv(g1));
}

/// Γ₀ ⋊ Γ₁ materialized as a FiniteGroupoid, with each carrier arrow tagged
/// by its pair (γ₀, γ₁) of parent arrow ids.
struct SemidirectGroupoid {
  FiniteGroupoid parent;
  SubgroupoidSelection isotropy_selection;
  SubgroupoidSelection translation_selection;
  InducedSubgroupoid isotropy;      // Γ₀
  InducedSubgroupoid translations;  // Γ₁
  FiniteGroupoid carrier;
  std::vector<std::pair<Arrow, Arrow>> pair_of;
  std::vector<Arrow> pair_index;  // parent γ₀·n + γ₁ → carrier arrow

  Arrow arrow_of(Arrow g0, Arrow g1) const {
    const Arrow c = pair_index[idx(g0) * parent.arrow_count() + idx(g1)];
    if (c == kNoArrow)
      throw PreconditionError("(" + parent.arrow_name(g0) + ", " + parent.arrow_name(g1) +
                              ") is not an arrow of the semidirect product");
    return c;
  }
  Arrow isotropy_part(Arrow c) const { return pair_of[idx(c)].first; }
  Arrow translation_part(Arrow c) const { return pair_of[idx(c)].second; }
};

/// Definition of Γ₀ ⋊ Γ₁: arrows are the pairs with d(γ₀) = r(γ₁),
/// (γ₀,γ₁)∘(γ₀',γ₁') = (γ₀∘α_{γ₁}(γ₀'), γ₁∘γ₁') and
/// (γ₀,γ₁)⁻¹ = (α_{γ₁⁻¹}(γ₀⁻¹), γ₁⁻¹).
///
/// `g0` must be the full isotropy subgroupoid and `g1` a wide, transitive,
/// closed selection.
inline SemidirectGroupoid semidirect_product(const FiniteGroupoid& parent, const SubgroupoidSelection& g0,
                                             const SubgroupoidSelection& g1) {
  check_selection(parent, g0);
  check_selection(parent, g1);
  if (!(g0 == isotropy_subgroupoid(parent)))
    throw PreconditionError("semidirect product needs Γ₀ to be the full isotropy subgroupoid");
  const auto p1 = subgroupoid_properties(parent, g1);
  if (!p1.is_closed) throw PreconditionError("Γ₁ is not closed under composition and inverses");
  if (!p1.is_wide) throw PreconditionError("Γ₁ is not a wide subgroupoid");
  if (!p1.is_transitive) throw PreconditionError("Γ₁ is not transitive: (r×d) does not surject onto X×X");

  SemidirectGroupoid sd;
  sd.parent = parent;
  sd.isotropy_selection = g0;
  sd.translation_selection = g1;
  sd.isotropy = induce(parent, g0);
  sd.translations = induce(parent, g1);

  const std::size_t np = parent.arrow_count();
  sd.pair_index.assign(np * np, kNoArrow);
  std::vector<std::string> names, labels;
  std::vector<Base> src, tgt;
  for (Arrow a1 : g1.arrows())
    for (Arrow a0 : parent.loops_at(parent.tgt(a1))) {
      const Arrow c = arrow_at(sd.pair_of.size());
      sd.pair_of.emplace_back(a0, a1);
      sd.pair_index[idx(a0) * np + idx(a1)] = c;
      names.push_back("s" + std::to_string(idx(c)));
      labels.push_back("(" + parent.arrow_name(a0) + "," + parent.arrow_name(a1) + ")");
      src.push_back(parent.src(a1));
      tgt.push_back(parent.tgt(a0));
    }

  const auto at = [&](Arrow a0, Arrow a1) { return sd.pair_index[idx(a0) * np + idx(a1)]; };
  std::vector<Arrow> inv, identity;
  for (const auto& [a0, a1] : sd.pair_of) {
    const Arrow i1 = parent.inv(a1);
    inv.push_back(at(alpha(parent, i1, parent.inv(a0)), i1));
  }
  for (Base x : parent.bases()) identity.push_back(at(parent.identity(x), parent.identity(x)));

  sd.carrier = FiniteGroupoid::generate(
      parent.base_names(), std::move(names), std::move(src), std::move(tgt),
      [&](Arrow c, Arrow c2) {
        const auto [a0, a1] = sd.pair_of[idx(c)];
        const auto [b0, b1] = sd.pair_of[idx(c2)];
        return at(parent.compose(a0, alpha(parent, a1, b0)), parent.compose(a1, b1));
      },
      std::move(inv), std::move(identity), std::move(labels));
  return sd;
}

/// J(γ₀,γ₁) = γ₀∘γ₁ from the carrier into the parent.
inline GroupoidMorphism J_map(const SemidirectGroupoid& sd) {
  GroupoidMorphism m;
  for (const auto& [a0, a1] : sd.pair_of) m.arrow_map.push_back(sd.parent.compose(a0, a1));
  for (Base x : sd.parent.bases()) m.base_map.push_back(x);
  return m;
}

struct Prop1Result {
  bool j_exists = false;   // Γ₁ ≅ Γ/Γ₀ by exhaustive search
  bool J_is_iso = false;   // J: Γ₀ ⋊ Γ₁ → Γ is an isomorphism
  std::optional<GroupoidMorphism> j;      // Γ₁ → Γ/Γ₀ (Γ₁ in local ids)
  std::optional<GroupoidMorphism> i_map;  // Γ/Γ₀ → Γ₁, i([γ]) = pr₂(J⁻¹(γ))
  MorphismReport J_report;
  MorphismReport i_report;
  bool agree() const noexcept { return j_exists == J_is_iso; }
  bool i_verified() const { return i_map.has_value() && i_report.ok(); }
};

/// Evaluates both sides of the biconditional Γ₁ ≅ Γ/Γ₀ ⇔ Γ₀ ⋊ Γ₁ ≅ Γ
/// independently. When J is invertible, also builds i from I = J⁻¹ and
/// checks it is well defined on classes and an isomorphism.
inline Prop1Result prop1_equivalence(const FiniteGroupoid& parent, const SubgroupoidSelection& g0,
                                     const SubgroupoidSelection& g1, const IsoSearchOptions& opts = {}) {
  Prop1Result r;
  const SemidirectGroupoid sd = semidirect_product(parent, g0, g1);
  const Quotient q = quotient_by_isotropy(parent, g0);

  r.j = find_isomorphism(sd.translations.groupoid, q.groupoid, opts);
  r.j_exists = r.j.has_value();

  const GroupoidMorphism J = J_map(sd);
  r.J_report = verify_morphism(sd.carrier, parent, J, true);
  r.J_is_iso = r.J_report.ok();
  if (!r.J_is_iso) return r;

  const GroupoidMorphism I = invert(J);
  GroupoidMorphism i;
  i.arrow_map.assign(q.groupoid.arrow_count(), kNoArrow);
  for (Arrow a : parent.arrows()) {
    const Arrow cls = q.projection.arrow_map[idx(a)];
    const Arrow g1_local = sd.translations.local(sd.translation_part(I.arrow_map[idx(a)]));
    Arrow& slot = i.arrow_map[idx(cls)];
    if (slot == kNoArrow) {
      slot = g1_local;
    } else if (slot != g1_local) {
      r.i_report.add(MorphismRule::kShape, {a},
                     "pr₂∘I is not constant on the class of " + parent.arrow_name(a));
    }
  }
  for (Base x : parent.bases()) i.base_map.push_back(sd.translations.base_from_parent[idx(x)]);
  if (r.i_report.ok()) r.i_report = verify_morphism(q.groupoid, sd.translations.groupoid, i, true);
  r.i_map = std::move(i);
  return r;
}

}  // namespace groupoid
