#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "groupoid/error.hpp"

namespace groupoid {

enum class Arrow : std::uint32_t {};
enum class Base : std::uint32_t {};

constexpr std::size_t idx(Arrow a) noexcept { return static_cast<std::size_t>(a); }
constexpr std::size_t idx(Base b) noexcept { return static_cast<std::size_t>(b); }
constexpr Arrow arrow_at(std::size_t i) noexcept { return Arrow{static_cast<std::uint32_t>(i)}; }
constexpr Base base_at(std::size_t i) noexcept { return Base{static_cast<std::uint32_t>(i)}; }

inline constexpr Arrow kNoArrow{UINT32_MAX};
inline constexpr Base kNoBase{UINT32_MAX};

inline auto arrow_range(std::size_t n) {
  return std::views::iota(std::size_t{0}, n) | std::views::transform(arrow_at);
}
inline auto base_range(std::size_t n) {
  return std::views::iota(std::size_t{0}, n) | std::views::transform(base_at);
}

/// Raw table form of a finite groupoid, as read from or written to a
/// description file. `compose` lists (γ, ξ, γ∘ξ) for every pair with
/// src(γ) = tgt(ξ).
struct GroupoidTables {
  std::vector<std::string> base;
  std::vector<std::string> arrows;
  std::vector<Base> src;
  std::vector<Base> tgt;
  std::vector<std::array<Arrow, 3>> compose;
  std::vector<Arrow> inv;
  std::vector<Arrow> identity;
  std::vector<std::string> labels;  // empty, or one per arrow
};

/// A finite groupoid over a finite base with dense integer ids.
///
/// Construction only checks structural integrity (ids in range, composition
/// entries on exactly the composable pairs). The groupoid axioms are checked
/// separately by validate_groupoid, so corrupted tables can be represented
/// and diagnosed.
class FiniteGroupoid {
 public:
  FiniteGroupoid() = default;

  explicit FiniteGroupoid(GroupoidTables t) {
    const std::size_t n = t.arrows.size();
    const std::size_t nb = t.base.size();
    if (t.src.size() != n || t.tgt.size() != n || t.inv.size() != n)
      throw MalformedTable("src/tgt/inv tables must have one entry per arrow");
    if (t.identity.size() != nb)
      throw MalformedTable("identity table must have one entry per base point");
    if (!t.labels.empty() && t.labels.size() != n)
      throw MalformedTable("labels must be empty or one per arrow");
    require_unique(t.base, "base point");
    require_unique(t.arrows, "arrow");

    for (std::size_t i = 0; i < n; ++i) {
      if (idx(t.src[i]) >= nb || idx(t.tgt[i]) >= nb)
        throw MalformedTable("arrow '" + t.arrows[i] + "' has a dangling source or target");
      if (idx(t.inv[i]) >= n)
        throw MalformedTable("inverse of arrow '" + t.arrows[i] + "' is a dangling arrow id");
    }
    for (std::size_t x = 0; x < nb; ++x)
      if (idx(t.identity[x]) >= n)
        throw MalformedTable("identity of base point '" + t.base[x] + "' is a dangling arrow id");

    table_.assign(n * n, kNoArrow);
    std::size_t filled = 0;
    for (const auto& [g, xi, r] : t.compose) {
      if (idx(g) >= n || idx(xi) >= n || idx(r) >= n)
        throw MalformedTable("compose entry references a dangling arrow id");
      if (t.src[idx(g)] != t.tgt[idx(xi)])
        throw MalformedTable("compose entry on non-composable pair (" + t.arrows[idx(g)] + ", " +
                             t.arrows[idx(xi)] + ")");
      Arrow& slot = table_[idx(g) * n + idx(xi)];
      if (slot != kNoArrow) {
        if (slot != r)
          throw MalformedTable("conflicting compose entries for (" + t.arrows[idx(g)] + ", " +
                               t.arrows[idx(xi)] + ")");
        continue;
      }
      slot = r;
      ++filled;
    }

    base_names_ = std::move(t.base);
    arrow_names_ = std::move(t.arrows);
    labels_ = std::move(t.labels);
    src_ = std::move(t.src);
    tgt_ = std::move(t.tgt);
    inv_ = std::move(t.inv);
    identity_ = std::move(t.identity);

    out_.assign(nb, {});
    in_.assign(nb, {});
    loops_.assign(nb, {});
    std::size_t composable_pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      out_[idx(src_[i])].push_back(arrow_at(i));
      in_[idx(tgt_[i])].push_back(arrow_at(i));
      if (src_[i] == tgt_[i]) loops_[idx(src_[i])].push_back(arrow_at(i));
    }
    for (std::size_t x = 0; x < nb; ++x) composable_pairs += out_[x].size() * in_[x].size();
    if (filled != composable_pairs)
      throw MalformedTable("compose table is not total on composable pairs (" +
                           std::to_string(filled) + " of " + std::to_string(composable_pairs) +
                           " entries)");
  }

  /// Builds the tables from a composition callback evaluated on every
  /// composable pair.
  template <class ComposeFn>
  static FiniteGroupoid generate(std::vector<std::string> base, std::vector<std::string> arrows,
                                 std::vector<Base> src, std::vector<Base> tgt, ComposeFn&& compose,
                                 std::vector<Arrow> inv, std::vector<Arrow> identity,
                                 std::vector<std::string> labels = {}) {
    GroupoidTables t;
    const std::size_t n = arrows.size();
    if (src.size() != n || tgt.size() != n)
      throw MalformedTable("src/tgt tables must have one entry per arrow");
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t xi = 0; xi < n; ++xi)
        if (src[g] == tgt[xi]) t.compose.push_back({arrow_at(g), arrow_at(xi), compose(arrow_at(g), arrow_at(xi))});
    t.base = std::move(base);
    t.arrows = std::move(arrows);
    t.src = std::move(src);
    t.tgt = std::move(tgt);
    t.inv = std::move(inv);
    t.identity = std::move(identity);
    t.labels = std::move(labels);
    return FiniteGroupoid(std::move(t));
  }

  std::size_t base_count() const noexcept { return base_names_.size(); }
  std::size_t arrow_count() const noexcept { return arrow_names_.size(); }
  auto arrows() const { return arrow_range(arrow_count()); }
  auto bases() const { return base_range(base_count()); }

  Base src(Arrow a) const { return src_[idx(a)]; }
  Base tgt(Arrow a) const { return tgt_[idx(a)]; }
  Arrow inv(Arrow a) const { return inv_[idx(a)]; }
  Arrow identity(Base x) const { return identity_[idx(x)]; }
  bool is_loop(Arrow a) const { return src(a) == tgt(a); }

  /// γ∘ξ is defined exactly when src(γ) = tgt(ξ).
  bool composable(Arrow g, Arrow xi) const { return src(g) == tgt(xi); }

  Arrow compose(Arrow g, Arrow xi) const {
    if (!composable(g, xi))
      throw PreconditionError("arrows (" + arrow_name(g) + ", " + arrow_name(xi) +
                              ") are not composable");
    return table_[idx(g) * arrow_count() + idx(xi)];
  }

  /// Γ_x: arrows with source x.
  std::span<const Arrow> arrows_from(Base x) const { return out_[idx(x)]; }
  /// Γ^x: arrows with target x.
  std::span<const Arrow> arrows_to(Base x) const { return in_[idx(x)]; }
  /// Γ_x^x: the isotropy group at x.
  std::span<const Arrow> loops_at(Base x) const { return loops_[idx(x)]; }

  const std::string& base_name(Base x) const { return base_names_[idx(x)]; }
  const std::string& arrow_name(Arrow a) const { return arrow_names_[idx(a)]; }
  bool has_labels() const noexcept { return !labels_.empty(); }
  const std::string& label(Arrow a) const {
    return labels_.empty() ? arrow_names_[idx(a)] : labels_[idx(a)];
  }
  const std::vector<std::string>& base_names() const noexcept { return base_names_; }
  const std::vector<std::string>& arrow_names() const noexcept { return arrow_names_; }

  std::optional<Arrow> find_arrow(std::string_view name) const {
    for (std::size_t i = 0; i < arrow_names_.size(); ++i)
      if (arrow_names_[i] == name) return arrow_at(i);
    return std::nullopt;
  }
  std::optional<Base> find_base(std::string_view name) const {
    for (std::size_t i = 0; i < base_names_.size(); ++i)
      if (base_names_[i] == name) return base_at(i);
    return std::nullopt;
  }

  /// Table form, compose triples in (γ, ξ) id order.
  GroupoidTables tables() const {
    GroupoidTables t;
    t.base = base_names_;
    t.arrows = arrow_names_;
    t.src = src_;
    t.tgt = tgt_;
    t.inv = inv_;
    t.identity = identity_;
    t.labels = labels_;
    const std::size_t n = arrow_count();
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t xi = 0; xi < n; ++xi)
        if (table_[g * n + xi] != kNoArrow) t.compose.push_back({arrow_at(g), arrow_at(xi), table_[g * n + xi]});
    return t;
  }

  FiniteGroupoid with_labels(std::vector<std::string> labels) const {
    GroupoidTables t = tables();
    t.labels = std::move(labels);
    return FiniteGroupoid(std::move(t));
  }

 private:
  static void require_unique(const std::vector<std::string>& names, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& s : names)
      if (!seen.insert(s).second) throw MalformedTable(std::string("duplicate ") + what + " id '" + s + "'");
  }

  std::vector<std::string> base_names_;
  std::vector<std::string> arrow_names_;
  std::vector<std::string> labels_;
  std::vector<Base> src_;
  std::vector<Base> tgt_;
  std::vector<Arrow> inv_;
  std::vector<Arrow> identity_;
  std::vector<Arrow> table_;
  std::vector<std::vector<Arrow>> out_;
  std::vector<std::vector<Arrow>> in_;
  std::vector<std::vector<Arrow>> loops_;
};

// ---------------------------------------------------------------------------
// Validation reports

enum class Axiom {
  kCompositionEndpoints,  // src(γ∘ξ) = src(ξ), tgt(γ∘ξ) = tgt(γ)
  kAssociativity,         // (i)
  kIdentity,              // (ii)
  kInverse,               // (iii)
  kIdentityEndpoints,     // src(ε(x)) = tgt(ε(x)) = x
};

constexpr std::string_view to_string(Axiom a) {
  switch (a) {
    case Axiom::kCompositionEndpoints: return "composition endpoints";
    case Axiom::kAssociativity: return "associativity (i)";
    case Axiom::kIdentity: return "identities (ii)";
    case Axiom::kInverse: return "inverses (iii)";
    case Axiom::kIdentityEndpoints: return "identity endpoints";
  }
  return "?";
}

enum class MorphismRule {
  kShape,
  kTarget,
  kSource,
  kMultiplicative,
  kIdentity,
  kArrowBijection,
  kBaseBijection,
};

constexpr std::string_view to_string(MorphismRule r) {
  switch (r) {
    case MorphismRule::kShape: return "shape";
    case MorphismRule::kTarget: return "tgt∘f = f∘tgt";
    case MorphismRule::kSource: return "src∘f = f∘src";
    case MorphismRule::kMultiplicative: return "f(γ∘ξ) = f(γ)∘f(ξ)";
    case MorphismRule::kIdentity: return "f(ε(x)) = ε(f(x))";
    case MorphismRule::kArrowBijection: return "arrow map bijective";
    case MorphismRule::kBaseBijection: return "base map bijective";
  }
  return "?";
}

template <class Rule>
struct Violation {
  Rule rule;
  std::vector<Arrow> witnesses;
  std::string detail;
};

/// List of violated rules; empty means the checked object is valid.
template <class Rule>
struct CheckReport {
  std::vector<Violation<Rule>> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool cites(Rule r) const {
    return std::ranges::any_of(violations, [r](const auto& v) { return v.rule == r; });
  }
  bool cites(Rule r, Arrow witness) const {
    return std::ranges::any_of(violations, [&](const auto& v) {
      return v.rule == r && std::ranges::find(v.witnesses, witness) != v.witnesses.end();
    });
  }
  void add(Rule r, std::vector<Arrow> w, std::string detail) {
    violations.push_back({r, std::move(w), std::move(detail)});
  }
};

using ValidationReport = CheckReport<Axiom>;
using MorphismReport = CheckReport<MorphismRule>;

/// Checks the five groupoid invariants by exhaustive enumeration.
///
/// Associativity is checked on triples where both adjacent pairs are
/// composable. Definedness mismatches outside those triples can only arise
/// from a composition-endpoint violation, which is reported on its own.
inline ValidationReport validate_groupoid(const FiniteGroupoid& g) {
  ValidationReport report;
  const auto name = [&](Arrow a) { return g.arrow_name(a); };

  for (Base x : g.bases()) {
    const Arrow e = g.identity(x);
    if (g.src(e) != x || g.tgt(e) != x)
      report.add(Axiom::kIdentityEndpoints, {e},
                 "identity " + name(e) + " of '" + g.base_name(x) + "' is not a loop at it");
  }

  for (Arrow a : g.arrows())
    for (Arrow b : g.arrows_to(g.src(a))) {
      const Arrow ab = g.compose(a, b);
      if (g.src(ab) != g.src(b) || g.tgt(ab) != g.tgt(a))
        report.add(Axiom::kCompositionEndpoints, {a, b},
                   name(a) + "∘" + name(b) + " = " + name(ab) + " has wrong endpoints");
    }

  for (Arrow a : g.arrows())
    for (Arrow b : g.arrows_to(g.src(a)))
      for (Arrow c : g.arrows_to(g.src(b))) {
        const Arrow ab = g.compose(a, b);
        const Arrow bc = g.compose(b, c);
        const bool left = g.composable(ab, c);
        const bool right = g.composable(a, bc);
        if (left != right) {
          report.add(Axiom::kAssociativity, {a, b, c},
                     "only one grouping of " + name(a) + "∘" + name(b) + "∘" + name(c) + " is defined");
        } else if (left && g.compose(ab, c) != g.compose(a, bc)) {
          report.add(Axiom::kAssociativity, {a, b, c},
                     "(" + name(a) + "∘" + name(b) + ")∘" + name(c) + " ≠ " + name(a) + "∘(" +
                         name(b) + "∘" + name(c) + ")");
        }
      }

  for (Arrow a : g.arrows()) {
    const Arrow er = g.identity(g.tgt(a));
    const Arrow ed = g.identity(g.src(a));
    if (!g.composable(er, a) || g.compose(er, a) != a)
      report.add(Axiom::kIdentity, {a}, "ε(r(γ))∘γ ≠ γ for γ = " + name(a));
    if (!g.composable(a, ed) || g.compose(a, ed) != a)
      report.add(Axiom::kIdentity, {a}, "γ∘ε(d(γ)) ≠ γ for γ = " + name(a));
  }

  for (Arrow a : g.arrows()) {
    const Arrow ai = g.inv(a);
    if (!g.composable(a, ai) || g.compose(a, ai) != g.identity(g.tgt(a)))
      report.add(Axiom::kInverse, {a}, "γ∘ι(γ) ≠ ε(r(γ)) for γ = " + name(a));
    if (!g.composable(ai, a) || g.compose(ai, a) != g.identity(g.src(a)))
      report.add(Axiom::kInverse, {a}, "ι(γ)∘γ ≠ ε(d(γ)) for γ = " + name(a));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Subgroupoids

/// A subset of a parent groupoid's arrows, kept sorted.
class SubgroupoidSelection {
 public:
  SubgroupoidSelection() = default;
  SubgroupoidSelection(const FiniteGroupoid& parent, std::vector<Arrow> arrows)
      : member_(parent.arrow_count(), 0) {
    for (Arrow a : arrows) {
      if (idx(a) >= parent.arrow_count())
        throw PreconditionError("selection references arrow id " + std::to_string(idx(a)) +
                                " outside the parent");
      member_[idx(a)] = 1;
    }
    for (Arrow a : parent.arrows())
      if (member_[idx(a)]) arrows_.push_back(a);
  }

  std::span<const Arrow> arrows() const& noexcept { return arrows_; }
  // by value on temporaries, so `for (a : make_selection().arrows())` is safe
  std::vector<Arrow> arrows() && { return std::move(arrows_); }
  std::size_t size() const noexcept { return arrows_.size(); }
  std::size_t parent_arrow_count() const noexcept { return member_.size(); }
  bool contains(Arrow a) const { return idx(a) < member_.size() && member_[idx(a)]; }

  friend bool operator==(const SubgroupoidSelection&, const SubgroupoidSelection&) = default;

 private:
  std::vector<Arrow> arrows_;
  std::vector<char> member_;
};

inline SubgroupoidSelection check_selection(const FiniteGroupoid& g, const SubgroupoidSelection& h) {
  if (h.parent_arrow_count() != g.arrow_count())
    throw PreconditionError("selection was made over a different parent groupoid");
  return h;
}

/// Γ₀ = ⋃ₓ Γₓˣ, the arrows whose source and target coincide.
inline SubgroupoidSelection isotropy_subgroupoid(const FiniteGroupoid& g) {
  std::vector<Arrow> loops;
  for (Arrow a : g.arrows())
    if (g.is_loop(a)) loops.push_back(a);
  return {g, std::move(loops)};
}

struct SubgroupoidProperties {
  bool is_wide = false;
  bool is_transitive = false;
  bool is_closed = false;
  friend bool operator==(const SubgroupoidProperties&, const SubgroupoidProperties&) = default;
};

inline SubgroupoidProperties subgroupoid_properties(const FiniteGroupoid& g, const SubgroupoidSelection& h) {
  check_selection(g, h);
  const std::size_t nb = g.base_count();
  std::vector<char> touched(nb, 0);
  std::vector<char> pairs(nb * nb, 0);
  bool closed = true;
  for (Arrow a : h.arrows()) {
    touched[idx(g.src(a))] = touched[idx(g.tgt(a))] = 1;
    pairs[idx(g.tgt(a)) * nb + idx(g.src(a))] = 1;
    if (!h.contains(g.inv(a))) closed = false;
  }
  for (Base x : g.bases())
    if (touched[idx(x)] && !h.contains(g.identity(x))) closed = false;
  for (Arrow a : h.arrows()) {
    if (!closed) break;
    for (Arrow b : g.arrows_to(g.src(a)))
      if (h.contains(b) && !h.contains(g.compose(a, b))) {
        closed = false;
        break;
      }
  }
  SubgroupoidProperties p;
  p.is_closed = closed;
  p.is_wide = std::ranges::all_of(touched, [](char c) { return c != 0; });
  p.is_transitive = std::ranges::all_of(pairs, [](char c) { return c != 0; });
  return p;
}

/// A closed selection materialized as a groupoid in its own right, with the
/// id translation back to the parent. Local ids follow parent id order.
struct InducedSubgroupoid {
  FiniteGroupoid groupoid;
  std::vector<Arrow> to_parent;
  std::vector<Base> base_to_parent;
  std::vector<Arrow> from_parent;  // kNoArrow outside the selection
  std::vector<Base> base_from_parent;

  Arrow local(Arrow parent_arrow) const {
    const Arrow a = idx(parent_arrow) < from_parent.size() ? from_parent[idx(parent_arrow)] : kNoArrow;
    if (a == kNoArrow) throw PreconditionError("arrow is not in the subgroupoid");
    return a;
  }
  Arrow parent(Arrow local_arrow) const { return to_parent[idx(local_arrow)]; }
  bool contains(Arrow parent_arrow) const {
    return idx(parent_arrow) < from_parent.size() && from_parent[idx(parent_arrow)] != kNoArrow;
  }
};

inline InducedSubgroupoid induce(const FiniteGroupoid& parent, const SubgroupoidSelection& sel) {
  if (!subgroupoid_properties(parent, sel).is_closed)
    throw PreconditionError("selection is not closed under composition and inverses");
  InducedSubgroupoid out;
  out.from_parent.assign(parent.arrow_count(), kNoArrow);
  out.base_from_parent.assign(parent.base_count(), kNoBase);
  std::vector<char> touched(parent.base_count(), 0);
  for (Arrow a : sel.arrows()) touched[idx(parent.src(a))] = touched[idx(parent.tgt(a))] = 1;
  for (Base x : parent.bases())
    if (touched[idx(x)]) {
      out.base_from_parent[idx(x)] = base_at(out.base_to_parent.size());
      out.base_to_parent.push_back(x);
    }
  for (Arrow a : sel.arrows()) {
    out.from_parent[idx(a)] = arrow_at(out.to_parent.size());
    out.to_parent.push_back(a);
  }

  GroupoidTables t;
  for (Base x : out.base_to_parent) {
    t.base.push_back(parent.base_name(x));
    t.identity.push_back(out.from_parent[idx(parent.identity(x))]);
  }
  for (Arrow a : out.to_parent) {
    t.arrows.push_back(parent.arrow_name(a));
    if (parent.has_labels()) t.labels.push_back(parent.label(a));
    t.src.push_back(out.base_from_parent[idx(parent.src(a))]);
    t.tgt.push_back(out.base_from_parent[idx(parent.tgt(a))]);
    t.inv.push_back(out.from_parent[idx(parent.inv(a))]);
  }
  for (Arrow a : out.to_parent)
    for (Arrow b : out.to_parent)
      if (parent.composable(a, b))
        t.compose.push_back({out.from_parent[idx(a)], out.from_parent[idx(b)],
                             out.from_parent[idx(parent.compose(a, b))]});
  out.groupoid = FiniteGroupoid(std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// Morphisms

struct GroupoidMorphism {
  std::vector<Arrow> arrow_map;
  std::vector<Base> base_map;
  friend bool operator==(const GroupoidMorphism&, const GroupoidMorphism&) = default;
};

inline GroupoidMorphism identity_morphism(const FiniteGroupoid& g) {
  GroupoidMorphism m;
  for (Arrow a : g.arrows()) m.arrow_map.push_back(a);
  for (Base x : g.bases()) m.base_map.push_back(x);
  return m;
}

inline MorphismReport verify_morphism(const FiniteGroupoid& dom, const FiniteGroupoid& cod,
                                      const GroupoidMorphism& m, bool require_iso) {
  MorphismReport report;
  if (m.arrow_map.size() != dom.arrow_count() || m.base_map.size() != dom.base_count()) {
    report.add(MorphismRule::kShape, {}, "maps are not total on the domain");
    return report;
  }
  for (Arrow a : m.arrow_map)
    if (idx(a) >= cod.arrow_count()) {
      report.add(MorphismRule::kShape, {}, "arrow map leaves the codomain");
      return report;
    }
  for (Base x : m.base_map)
    if (idx(x) >= cod.base_count()) {
      report.add(MorphismRule::kShape, {}, "base map leaves the codomain");
      return report;
    }

  const auto f = [&](Arrow a) { return m.arrow_map[idx(a)]; };
  const auto fb = [&](Base x) { return m.base_map[idx(x)]; };
  for (Arrow a : dom.arrows()) {
    if (cod.tgt(f(a)) != fb(dom.tgt(a)))
      report.add(MorphismRule::kTarget, {a}, "target not preserved at " + dom.arrow_name(a));
    if (cod.src(f(a)) != fb(dom.src(a)))
      report.add(MorphismRule::kSource, {a}, "source not preserved at " + dom.arrow_name(a));
  }
  for (Base x : dom.bases())
    if (f(dom.identity(x)) != cod.identity(fb(x)))
      report.add(MorphismRule::kIdentity, {dom.identity(x)},
                 "identity of '" + dom.base_name(x) + "' not preserved");
  for (Arrow a : dom.arrows())
    for (Arrow b : dom.arrows_to(dom.src(a))) {
      const Arrow fa = f(a), fbb = f(b);
      if (!cod.composable(fa, fbb) || cod.compose(fa, fbb) != f(dom.compose(a, b)))
        report.add(MorphismRule::kMultiplicative, {a, b},
                   "product " + dom.arrow_name(a) + "∘" + dom.arrow_name(b) + " not preserved");
    }

  if (require_iso) {
    std::vector<Arrow> hit(cod.arrow_count(), kNoArrow);
    bool arrow_bij = dom.arrow_count() == cod.arrow_count();
    for (Arrow a : dom.arrows()) {
      if (hit[idx(f(a))] != kNoArrow) {
        report.add(MorphismRule::kArrowBijection, {hit[idx(f(a))], a},
                   "arrows " + dom.arrow_name(hit[idx(f(a))]) + " and " + dom.arrow_name(a) +
                       " share an image");
        arrow_bij = false;
      } else {
        hit[idx(f(a))] = a;
      }
    }
    if (arrow_bij && std::ranges::find(hit, kNoArrow) != hit.end()) arrow_bij = false;
    if (!arrow_bij && !report.cites(MorphismRule::kArrowBijection))
      report.add(MorphismRule::kArrowBijection, {}, "arrow map is not surjective");

    std::vector<char> bhit(cod.base_count(), 0);
    bool base_bij = dom.base_count() == cod.base_count();
    for (Base x : dom.bases()) {
      if (bhit[idx(fb(x))]) base_bij = false;
      bhit[idx(fb(x))] = 1;
    }
    if (!base_bij || std::ranges::find(bhit, 0) != bhit.end())
      report.add(MorphismRule::kBaseBijection, {}, "base map is not a bijection");
  }
  return report;
}

/// Inverse of a bijective morphism (caller guarantees bijectivity).
inline GroupoidMorphism invert(const GroupoidMorphism& m) {
  GroupoidMorphism inv;
  inv.arrow_map.assign(m.arrow_map.size(), kNoArrow);
  inv.base_map.assign(m.base_map.size(), kNoBase);
  for (std::size_t i = 0; i < m.arrow_map.size(); ++i) {
    if (idx(m.arrow_map[i]) >= inv.arrow_map.size()) throw PreconditionError("morphism is not bijective");
    inv.arrow_map[idx(m.arrow_map[i])] = arrow_at(i);
  }
  for (std::size_t i = 0; i < m.base_map.size(); ++i) {
    if (idx(m.base_map[i]) >= inv.base_map.size()) throw PreconditionError("morphism is not bijective");
    inv.base_map[idx(m.base_map[i])] = base_at(i);
  }
  if (std::ranges::find(inv.arrow_map, kNoArrow) != inv.arrow_map.end() ||
      std::ranges::find(inv.base_map, kNoBase) != inv.base_map.end())
    throw PreconditionError("morphism is not bijective");
  return inv;
}

// ---------------------------------------------------------------------------
// Quotient Γ/Γ₀

struct Quotient {
  FiniteGroupoid groupoid;
  GroupoidMorphism projection;        // ρ: Γ → Γ/Γ₀
  std::vector<Arrow> representative;  // smallest parent id in each class
};

/// Classes are orbits of γ ↦ γ₀∘γ. The selection must be a wide, closed
/// bundle of loops; composition and inversion of classes are checked on all
/// representatives before the table is emitted, which fails exactly when the
/// selection is not stable under conjugation.
inline Quotient quotient_by_isotropy(const FiniteGroupoid& g, const SubgroupoidSelection& g0) {
  check_selection(g, g0);
  for (Arrow a : g0.arrows())
    if (!g.is_loop(a))
      throw PreconditionError("quotient selection contains non-loop arrow " + g.arrow_name(a));
  const auto props = subgroupoid_properties(g, g0);
  if (!props.is_closed || !props.is_wide)
    throw PreconditionError("quotient selection must be a wide, closed subgroupoid");

  const std::size_t n = g.arrow_count();
  std::vector<std::size_t> class_of(n, SIZE_MAX);
  std::vector<std::vector<Arrow>> members;
  for (Arrow a : g.arrows()) {
    if (class_of[idx(a)] != SIZE_MAX) continue;
    const std::size_t c = members.size();
    members.emplace_back();
    for (Arrow l : g.loops_at(g.tgt(a))) {
      if (!g0.contains(l)) continue;
      const Arrow b = g.compose(l, a);
      if (class_of[idx(b)] == SIZE_MAX) {
        class_of[idx(b)] = c;
        members[c].push_back(b);
      }
    }
    std::ranges::sort(members[c]);
  }

  const std::size_t nc = members.size();
  const auto rep = [&](std::size_t c) { return members[c].front(); };
  std::vector<std::size_t> table(nc * nc, SIZE_MAX);
  for (std::size_t c1 = 0; c1 < nc; ++c1)
    for (std::size_t c2 = 0; c2 < nc; ++c2) {
      if (!g.composable(rep(c1), rep(c2))) continue;
      const std::size_t expect = class_of[idx(g.compose(rep(c1), rep(c2)))];
      for (Arrow a : members[c1])
        for (Arrow b : members[c2])
          if (class_of[idx(g.compose(a, b))] != expect)
            throw QuotientUndefined("[γ]∘[γ'] depends on representatives: " + g.arrow_name(a) + "∘" +
                                    g.arrow_name(b) + " and " + g.arrow_name(rep(c1)) + "∘" +
                                    g.arrow_name(rep(c2)) + " land in different classes");
      table[c1 * nc + c2] = expect;
    }
  for (std::size_t c = 0; c < nc; ++c)
    for (Arrow a : members[c])
      if (class_of[idx(g.inv(a))] != class_of[idx(g.inv(rep(c)))])
        throw QuotientUndefined("[γ]⁻¹ depends on representatives: " + g.arrow_name(a) + " vs " +
                                g.arrow_name(rep(c)));

  GroupoidTables t;
  t.base = g.base_names();
  for (Base x : g.bases()) t.identity.push_back(arrow_at(class_of[idx(g.identity(x))]));
  Quotient q;
  for (std::size_t c = 0; c < nc; ++c) {
    t.arrows.push_back("[" + g.arrow_name(rep(c)) + "]");
    t.src.push_back(g.src(rep(c)));
    t.tgt.push_back(g.tgt(rep(c)));
    t.inv.push_back(arrow_at(class_of[idx(g.inv(rep(c)))]));
    q.representative.push_back(rep(c));
  }
  for (std::size_t c1 = 0; c1 < nc; ++c1)
    for (std::size_t c2 = 0; c2 < nc; ++c2)
      if (table[c1 * nc + c2] != SIZE_MAX)
        t.compose.push_back({arrow_at(c1), arrow_at(c2), arrow_at(table[c1 * nc + c2])});
  q.groupoid = FiniteGroupoid(std::move(t));
  for (Arrow a : g.arrows()) q.projection.arrow_map.push_back(arrow_at(class_of[idx(a)]));
  for (Base x : g.bases()) q.projection.base_map.push_back(x);
  return q;
}

// ---------------------------------------------------------------------------
// Isomorphism search

struct IsoSearchOptions {
  std::size_t max_arrows = 64;
};

namespace detail {

inline std::size_t loop_order(const FiniteGroupoid& g, Arrow a) {
  if (!g.is_loop(a)) return 0;
  const Arrow e = g.identity(g.src(a));
  Arrow p = a;
  for (std::size_t k = 1; k <= g.arrow_count() + 1; ++k) {
    if (p == e) return k;
    p = g.compose(p, a);
  }
  return SIZE_MAX;
}

struct BaseSignature {
  std::size_t out = 0, in = 0;
  std::vector<std::size_t> loop_orders;
  auto operator<=>(const BaseSignature&) const = default;
};

inline std::vector<BaseSignature> base_signatures(const FiniteGroupoid& g, const std::vector<std::size_t>& orders) {
  std::vector<BaseSignature> sig(g.base_count());
  for (Base x : g.bases()) {
    sig[idx(x)].out = g.arrows_from(x).size();
    sig[idx(x)].in = g.arrows_to(x).size();
    for (Arrow l : g.loops_at(x)) sig[idx(x)].loop_orders.push_back(orders[idx(l)]);
    std::ranges::sort(sig[idx(x)].loop_orders);
  }
  return sig;
}

inline std::vector<std::size_t> hom_sizes(const FiniteGroupoid& g) {
  const std::size_t nb = g.base_count();
  std::vector<std::size_t> h(nb * nb, 0);
  for (Arrow a : g.arrows()) ++h[idx(g.tgt(a)) * nb + idx(g.src(a))];
  return h;
}

class IsoSearch {
 public:
  IsoSearch(const FiniteGroupoid& g, const FiniteGroupoid& h)
      : g_(g), h_(h), hom_g_(hom_sizes(g)), hom_h_(hom_sizes(h)) {
    for (Arrow a : g.arrows()) order_g_.push_back(loop_order(g, a));
    for (Arrow a : h.arrows()) order_h_.push_back(loop_order(h, a));
    sig_g_ = base_signatures(g, order_g_);
    sig_h_ = base_signatures(h, order_h_);
  }

  std::optional<GroupoidMorphism> run() {
    if (g_.base_count() != h_.base_count() || g_.arrow_count() != h_.arrow_count()) return std::nullopt;
    auto a = sig_g_, b = sig_h_;
    std::ranges::sort(a);
    std::ranges::sort(b);
    if (a != b) return std::nullopt;
    base_map_.assign(g_.base_count(), kNoBase);
    base_used_.assign(h_.base_count(), 0);
    return search_bases(0);
  }

 private:
  struct State {
    std::vector<Arrow> f, finv;
    std::vector<Arrow> assigned;
  };

  std::optional<GroupoidMorphism> search_bases(std::size_t x) {
    const std::size_t nb = g_.base_count();
    if (x == nb) return search_arrows();
    for (std::size_t y = 0; y < nb; ++y) {
      if (base_used_[y] || sig_g_[x] != sig_h_[y]) continue;
      base_map_[x] = base_at(y);
      bool consistent = true;
      for (std::size_t x2 = 0; x2 <= x && consistent; ++x2) {
        const std::size_t y2 = idx(base_map_[x2]);
        consistent = hom_g_[x * nb + x2] == hom_h_[y * nb + y2] && hom_g_[x2 * nb + x] == hom_h_[y2 * nb + y];
      }
      if (!consistent) continue;
      base_used_[y] = 1;
      if (auto r = search_bases(x + 1)) return r;
      base_used_[y] = 0;
    }
    base_map_[x] = kNoBase;
    return std::nullopt;
  }

  std::optional<GroupoidMorphism> search_arrows() {
    State s;
    s.f.assign(g_.arrow_count(), kNoArrow);
    s.finv.assign(h_.arrow_count(), kNoArrow);
    for (Base x : g_.bases())
      if (!assign(s, g_.identity(x), h_.identity(base_map_[idx(x)]))) return std::nullopt;
    return extend(std::move(s));
  }

  std::optional<GroupoidMorphism> extend(State s) {
    auto next = std::ranges::find(s.f, kNoArrow);
    if (next == s.f.end()) {
      GroupoidMorphism m{s.f, base_map_};
      if (verify_morphism(g_, h_, m, true).ok()) return m;
      return std::nullopt;
    }
    const Arrow a = arrow_at(static_cast<std::size_t>(next - s.f.begin()));
    const Base ty = base_map_[idx(g_.tgt(a))];
    for (Arrow b : h_.arrows_to(ty)) {
      if (s.finv[idx(b)] != kNoArrow || h_.src(b) != base_map_[idx(g_.src(a))]) continue;
      if (order_g_[idx(a)] != order_h_[idx(b)]) continue;
      State t = s;
      if (!assign(t, a, b)) continue;
      if (auto r = extend(std::move(t))) return r;
    }
    return std::nullopt;
  }

  /// Sets f(a) = b and propagates everything forced by inverses and products
  /// with already-assigned arrows. Returns false on conflict.
  bool assign(State& s, Arrow a0, Arrow b0) {
    std::vector<std::pair<Arrow, Arrow>> queue{{a0, b0}};
    while (!queue.empty()) {
      auto [a, b] = queue.back();
      queue.pop_back();
      if (s.f[idx(a)] == b) continue;
      if (s.f[idx(a)] != kNoArrow || s.finv[idx(b)] != kNoArrow) return false;
      if (h_.src(b) != base_map_[idx(g_.src(a))] || h_.tgt(b) != base_map_[idx(g_.tgt(a))]) return false;
      if (order_g_[idx(a)] != order_h_[idx(b)]) return false;
      s.f[idx(a)] = b;
      s.finv[idx(b)] = a;
      s.assigned.push_back(a);
      queue.emplace_back(g_.inv(a), h_.inv(b));
      for (Arrow c : s.assigned) {
        const Arrow fc = s.f[idx(c)];
        if (g_.composable(a, c)) queue.emplace_back(g_.compose(a, c), h_.compose(b, fc));
        if (g_.composable(c, a)) queue.emplace_back(g_.compose(c, a), h_.compose(fc, b));
      }
    }
    return true;
  }

  const FiniteGroupoid& g_;
  const FiniteGroupoid& h_;
  std::vector<std::size_t> hom_g_, hom_h_;
  std::vector<std::size_t> order_g_, order_h_;
  std::vector<BaseSignature> sig_g_, sig_h_;
  std::vector<Base> base_map_;
  std::vector<char> base_used_;
};

}  // namespace detail

/// Backtracking search over base bijections, then arrow bijections, pruned by
/// fiber sizes and isotropy element orders. Assignments propagate through
/// products, so each branch only guesses generators.
inline std::optional<GroupoidMorphism> find_isomorphism(const FiniteGroupoid& g, const FiniteGroupoid& h,
                                                        const IsoSearchOptions& opts = {}) {
  if (g.arrow_count() > opts.max_arrows || h.arrow_count() > opts.max_arrows)
    throw InstanceTooLarge("isomorphism search capped at " + std::to_string(opts.max_arrows) +
                           " arrows (got " + std::to_string(g.arrow_count()) + " and " +
                           std::to_string(h.arrow_count()) + ")");
  return detail::IsoSearch(g, h).run();
}

// ---------------------------------------------------------------------------
// Builders

/// Pair groupoid X × X over n points; arrow (y,x) has target y and source x,
/// and has id y·n + x.
inline FiniteGroupoid pair_groupoid(std::size_t n) {
  std::vector<std::string> base, names;
  std::vector<Base> src, tgt;
  std::vector<Arrow> inv, identity;
  for (std::size_t x = 0; x < n; ++x) base.push_back(std::to_string(x));
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      names.push_back("(" + std::to_string(y) + "," + std::to_string(x) + ")");
      tgt.push_back(base_at(y));
      src.push_back(base_at(x));
      inv.push_back(arrow_at(x * n + y));
    }
  for (std::size_t x = 0; x < n; ++x) identity.push_back(arrow_at(x * n + x));
  return FiniteGroupoid::generate(
      std::move(base), std::move(names), std::move(src), std::move(tgt),
      [n](Arrow a, Arrow b) { return arrow_at((idx(a) / n) * n + idx(b) % n); }, std::move(inv),
      std::move(identity));
}

/// Copy of `g` with arrow i renamed to id arrow_perm[i] and base x to
/// base_perm[x]. The map i ↦ arrow_perm[i] is an isomorphism g → result.
inline FiniteGroupoid relabeled(const FiniteGroupoid& g, std::span<const std::size_t> arrow_perm,
                                std::span<const std::size_t> base_perm) {
  if (arrow_perm.size() != g.arrow_count() || base_perm.size() != g.base_count())
    throw PreconditionError("permutation sizes do not match the groupoid");
  const GroupoidTables src = g.tables();
  GroupoidTables t;
  t.base.resize(g.base_count());
  t.identity.resize(g.base_count());
  t.arrows.resize(g.arrow_count());
  t.src.resize(g.arrow_count());
  t.tgt.resize(g.arrow_count());
  t.inv.resize(g.arrow_count());
  const auto pa = [&](Arrow a) { return arrow_at(arrow_perm[idx(a)]); };
  const auto pb = [&](Base x) { return base_at(base_perm[idx(x)]); };
  for (Base x : g.bases()) {
    t.base[idx(pb(x))] = src.base[idx(x)];
    t.identity[idx(pb(x))] = pa(src.identity[idx(x)]);
  }
  for (Arrow a : g.arrows()) {
    t.arrows[idx(pa(a))] = src.arrows[idx(a)];
    t.src[idx(pa(a))] = pb(src.src[idx(a)]);
    t.tgt[idx(pa(a))] = pb(src.tgt[idx(a)]);
    t.inv[idx(pa(a))] = pa(src.inv[idx(a)]);
  }
  for (const auto& [a, b, c] : src.compose) t.compose.push_back({pa(a), pa(b), pa(c)});
  return FiniteGroupoid(std::move(t));
}

}  // namespace groupoid
