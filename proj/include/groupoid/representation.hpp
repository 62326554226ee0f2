#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "groupoid/convolution.hpp"
#include "groupoid/linalg.hpp"
#include "groupoid/semidirect.hpp"

namespace groupoid {

/// Dimensions of the spaces H_x, one per base point.
struct HilbertBundle {
  std::vector<std::size_t> dims;

  std::size_t dim(Base x) const { return dims.at(idx(x)); }
  std::size_t total() const {
    std::size_t n = 0;
    for (std::size_t d : dims) n += d;
    return n;
  }
  std::size_t offset(Base x) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < idx(x); ++i) n += dims[i];
    return n;
  }
  friend bool operator==(const HilbertBundle&, const HilbertBundle&) = default;
};

/// U(γ): H_{d(γ)} → H_{r(γ)} for each arrow of some groupoid.
struct UnitaryRep {
  HilbertBundle bundle;
  std::vector<Matrix> U;
  const Matrix& operator()(Arrow a) const { return U.at(idx(a)); }
};

/// One named check with its worst deviation and the arrows where it occurred.
struct CheckResult {
  CheckResult() = default;
  explicit CheckResult(std::string n) : name(std::move(n)) {}

  std::string name;
  bool passed = true;
  double max_deviation = 0.0;
  std::vector<Arrow> witness;
  std::string note;

  void observe(double d, std::vector<Arrow> where) {
    if (witness.empty() || d > max_deviation) {
      max_deviation = d;
      witness = std::move(where);
    }
  }
  void close(double tol) { passed = max_deviation <= tol; }
};

struct CheckSuite {
  std::vector<CheckResult> checks;
  bool passed() const {
    return std::ranges::all_of(checks, [](const CheckResult& c) { return c.passed; });
  }
  const CheckResult& at(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw PreconditionError("no check named '" + std::string(name) + "'");
  }
};

inline void require_rep_shape(const FiniteGroupoid& g, const UnitaryRep& rep) {
  if (rep.bundle.dims.size() != g.base_count()) throw PreconditionError("bundle has the wrong number of fibers");
  for (std::size_t d : rep.bundle.dims)
    if (d == 0) throw PreconditionError("Hilbert bundle dimensions must be positive");
  if (rep.U.size() != g.arrow_count()) throw PreconditionError("representation needs one matrix per arrow");
  for (Arrow a : g.arrows()) {
    const Matrix& m = rep(a);
    if (m.rows() != rep.bundle.dim(g.tgt(a)) || m.cols() != rep.bundle.dim(g.src(a)))
      throw PreconditionError("U(" + g.arrow_name(a) + ") has shape " + std::to_string(m.rows()) + "×" +
                              std::to_string(m.cols()) + ", expected dim(r)×dim(d)");
  }
}

/// Conditions of a unitary representation: identities, multiplicativity,
/// inverses/unitarity. Measurability is vacuous over a finite base.
inline CheckSuite validate_rep(const FiniteGroupoid& g, const UnitaryRep& rep, double tol) {
  require_rep_shape(g, rep);
  CheckResult ident{"identity"}, mult{"multiplicative"}, inverse{"inverse"};
  for (Base x : g.bases())
    ident.observe(max_abs_diff(rep(g.identity(x)), Matrix::identity(rep.bundle.dim(x))), {g.identity(x)});
  for (Arrow a : g.arrows())
    for (Arrow b : g.arrows_to(g.src(a))) mult.observe(max_abs_diff(rep(g.compose(a, b)), rep(a) * rep(b)), {a, b});
  for (Arrow a : g.arrows()) {
    const double d = std::max(max_abs_diff(rep(g.inv(a)), rep(a).adjoint()), unitarity_defect(rep(a)));
    inverse.observe(d, {a});
  }
  ident.close(tol);
  mult.close(tol);
  inverse.close(tol);
  CheckResult meas{"measurability"};
  meas.note = "vacuous: finite base";
  return {{ident, mult, inverse, meas}};
}

inline UnitaryRep trivial_rep(const FiniteGroupoid& g) {
  UnitaryRep r{{std::vector<std::size_t>(g.base_count(), 1)}, {}};
  r.U.assign(g.arrow_count(), Matrix::identity(1));
  return r;
}

/// Left regular representation of each isotropy group on ℂ^{Γ₀,ₓ}, basis
/// ordered by arrow id. `g` is expected to be a bundle of groups.
inline UnitaryRep regular_isotropy_rep(const FiniteGroupoid& g) {
  UnitaryRep r;
  for (Base x : g.bases()) r.bundle.dims.push_back(g.loops_at(x).size());
  for (Arrow a : g.arrows()) {
    if (!g.is_loop(a)) throw PreconditionError("regular_isotropy_rep needs a groupoid of loops only");
    const auto loops = g.loops_at(g.src(a));
    Matrix m(loops.size(), loops.size());
    for (std::size_t j = 0; j < loops.size(); ++j) {
      const Arrow image = g.compose(a, loops[j]);
      const auto i = static_cast<std::size_t>(std::ranges::find(loops, image) - loops.begin());
      m(i, j) = 1.0;
    }
    r.U.push_back(std::move(m));
  }
  return r;
}

/// i_x^y = identity for each arrow; needs all fibers of equal dimension.
inline UnitaryRep identity_translation_rep(const FiniteGroupoid& g1, const HilbertBundle& bundle) {
  for (std::size_t d : bundle.dims)
    if (d != bundle.dims.front()) throw PreconditionError("identity translations need equal fiber dimensions");
  UnitaryRep r{bundle, {}};
  for (Arrow a : g1.arrows()) r.U.push_back(Matrix::identity(bundle.dim(g1.src(a))));
  return r;
}

namespace detail {

inline void require_pair(const SemidirectGroupoid& sd, const UnitaryRep& U0, const UnitaryRep& I) {
  require_rep_shape(sd.isotropy.groupoid, U0);
  require_rep_shape(sd.translations.groupoid, I);
  if (!(U0.bundle == I.bundle)) throw PreconditionError("U₀ and the translations live on different bundles");
}

}  // namespace detail

/// U₁(γ₁)U₀(γ₀)U₁(γ₁⁻¹) = U₀(α_{γ₁}(γ₀)) for γ₀ at d(γ₁). U0 is indexed by
/// sd.isotropy local ids, I by sd.translations local ids; witnesses are
/// parent arrows (γ₀, γ₁).
inline CheckResult check_commutation(const SemidirectGroupoid& sd, const UnitaryRep& U0, const UnitaryRep& I,
                                     double tol) {
  detail::require_pair(sd, U0, I);
  const FiniteGroupoid& g = sd.parent;
  CheckResult c{"commutation"};
  for (Arrow g1 : sd.translation_selection.arrows()) {
    const Matrix& u1 = I(sd.translations.local(g1));
    const Matrix& u1inv = I(sd.translations.local(g.inv(g1)));
    for (Arrow g0 : g.loops_at(g.src(g1))) {
      const Matrix lhs = u1 * U0(sd.isotropy.local(g0)) * u1inv;
      c.observe(max_abs_diff(lhs, U0(sd.isotropy.local(alpha(g, g1, g0)))), {g0, g1});
    }
  }
  c.close(tol);
  return c;
}

/// U(γ₀,γ₁) = U₀(γ₀)·i_x^y on the carrier of sd.
inline UnitaryRep simple_extension(const SemidirectGroupoid& sd, const UnitaryRep& U0, const UnitaryRep& I,
                                   double tol) {
  detail::require_pair(sd, U0, I);
  const CheckSuite irep = validate_rep(sd.translations.groupoid, I, tol);
  if (!irep.passed()) throw PreconditionError("translation family is not a unitary representation of Γ₁");
  const CheckResult c = check_commutation(sd, U0, I, tol);
  if (!c.passed)
    throw PreconditionError("commutation relation fails at (" + sd.parent.arrow_name(c.witness[0]) + ", " +
                            sd.parent.arrow_name(c.witness[1]) + "), deviation " + std::to_string(c.max_deviation));
  UnitaryRep out{U0.bundle, {}};
  for (const auto& [g0, g1] : sd.pair_of)
    out.U.push_back(U0(sd.isotropy.local(g0)) * I(sd.translations.local(g1)));
  return out;
}

/// α*_γ on fiber functions, the pushforward along α_γ:
/// (α*_γ a)(η) = a(α_{γ⁻¹}(η)) for η ∈ Γ₀,r(γ). Equals β_{γ⁻¹}.
inline GroupoidFunction alpha_star(const FiniteGroupoid& g, Arrow gamma, const GroupoidFunction& a) {
  return beta(g, g.inv(gamma), a);
}

/// a restricted to Γ₀,ₓ.
inline GroupoidFunction restrict_to_fiber(const FiniteGroupoid& g, const GroupoidFunction& a, Base x) {
  GroupoidFunction out = GroupoidFunction::zero(g.arrow_count());
  for (Arrow l : g.loops_at(x)) out[l] = a(l);
  return out;
}

/// U₀,ₓ(a) = Σ_{γ∈Γ₀,ₓ} w(γ)·a(γ)·U₀(γ). `a` and `w` are on parent arrows.
inline Matrix quantize(const SemidirectGroupoid& sd, const UnitaryRep& U0, const GroupoidFunction& a, Base x,
                       const HaarWeights& w) {
  require_rep_shape(sd.isotropy.groupoid, U0);
  require_fiber_support(sd.parent, a, x);
  const std::size_t n = U0.bundle.dim(x);
  Matrix m(n, n);
  for (Arrow l : sd.parent.loops_at(x))
    if (a(l) != Complex{}) m += (w(l) * a(l)) * U0(sd.isotropy.local(l));
  return m;
}

/// Base-indexed family x ↦ B_x on H_x.
struct RandomOperator {
  HilbertBundle bundle;
  std::vector<Matrix> blocks;

  Matrix direct_sum() const { return block_diagonal(blocks); }
  std::vector<double> block_norms(const PowerIterationOptions& opts = {}) const {
    std::vector<double> out;
    for (const Matrix& b : blocks) out.push_back(spectral_norm(b, opts));
    return out;
  }
  /// max_x ‖B_x‖; the essential supremum for counting μ over finite X.
  double norm(const PowerIterationOptions& opts = {}) const {
    double m = 0.0;
    for (double v : block_norms(opts)) m = std::max(m, v);
    return m;
  }
};

/// r_a with (r_a)_x = U₀,ₓ(a|ₓ) for a supported on Γ₀.
inline RandomOperator random_operator_from(const SemidirectGroupoid& sd, const UnitaryRep& U0,
                                           const GroupoidFunction& a, const HaarWeights& w) {
  detail::require_size(sd.parent, a);
  for (Arrow arr : sd.parent.arrows())
    if (!sd.parent.is_loop(arr) && a(arr) != Complex{})
      throw PreconditionError("function has support at " + sd.parent.arrow_name(arr) + ", outside Γ₀");
  RandomOperator r{U0.bundle, {}};
  for (Base x : sd.parent.bases()) r.blocks.push_back(quantize(sd, U0, restrict_to_fiber(sd.parent, a, x), x, w));
  return r;
}

/// Σ_{γ∈Γ₀,ₓ} w(γ)|a(γ)|, the bound on ‖(r_a)_x‖.
inline double fiber_l1(const FiniteGroupoid& g, const GroupoidFunction& a, Base x, const HaarWeights& w) {
  double s = 0.0;
  for (Arrow l : g.loops_at(x)) s += w(l) * std::abs(a(l));
  return s;
}

struct NormReport {
  double norm = 0.0;
  std::vector<double> block_norms;
  std::vector<double> bounds;
  bool bound_holds = true;
};

inline NormReport random_operator_norm(const SemidirectGroupoid& sd, const RandomOperator& r,
                                       const GroupoidFunction& a, const HaarWeights& w,
                                       const PowerIterationOptions& opts = {}) {
  NormReport rep;
  rep.block_norms = r.block_norms(opts);
  for (Base x : sd.parent.bases()) {
    rep.bounds.push_back(fiber_l1(sd.parent, a, x, w));
    if (rep.block_norms[idx(x)] > rep.bounds.back()) rep.bound_holds = false;
    rep.norm = std::max(rep.norm, rep.block_norms[idx(x)]);
  }
  return rep;
}

/// Both transformation rules of r_a:
///   U₀(γ₀)·U₀,ₓ(a)·U₀(γ₀⁻¹) = U₀,ₓ(α*_{γ₀}(a))      for γ₀ ∈ Γ₀,ₓ
///   U₁(γ₁)·U₀,ₓ(a)·U₁(γ₁⁻¹) = U₀,y(α*_{γ₁}(a))      for γ₁: x → y in Γ₁
/// with a restricted to the relevant fiber.
inline CheckSuite check_equivariance(const SemidirectGroupoid& sd, const GroupoidFunction& a, const UnitaryRep& U0,
                                     const UnitaryRep& I, const HaarWeights& w, double tol) {
  detail::require_pair(sd, U0, I);
  const FiniteGroupoid& g = sd.parent;
  CheckResult isotropy_rule{"isotropy_rule"}, translation_rule{"translation_rule"};
  std::vector<Matrix> q;
  std::vector<GroupoidFunction> ax;
  for (Base x : g.bases()) {
    ax.push_back(restrict_to_fiber(g, a, x));
    q.push_back(quantize(sd, U0, ax.back(), x, w));
  }
  for (Base x : g.bases())
    for (Arrow g0 : g.loops_at(x)) {
      const Matrix lhs = U0(sd.isotropy.local(g0)) * q[idx(x)] * U0(sd.isotropy.local(g.inv(g0)));
      const Matrix rhs = quantize(sd, U0, alpha_star(g, g0, ax[idx(x)]), x, w);
      isotropy_rule.observe(max_abs_diff(lhs, rhs), {g0});
    }
  for (Arrow g1 : sd.translation_selection.arrows()) {
    const Base x = g.src(g1), y = g.tgt(g1);
    const Matrix lhs = I(sd.translations.local(g1)) * q[idx(x)] * I(sd.translations.local(g.inv(g1)));
    const Matrix rhs = quantize(sd, U0, alpha_star(g, g1, ax[idx(x)]), y, w);
    translation_rule.observe(max_abs_diff(lhs, rhs), {g1});
  }
  isotropy_rule.close(tol);
  translation_rule.close(tol);
  return {{isotropy_rule, translation_rule}};
}

/// Generators of M₀: U₀,ₓ(δ_γ) = U₀(γ) for γ ∈ Γ₀, embedded block-diagonally
/// in ⊕ₓ H_x. With `fiber`, only the block at that base point, on H_x alone.
inline std::vector<Matrix> m0_generators(const SemidirectGroupoid& sd, const UnitaryRep& U0,
                                         std::optional<Base> fiber = std::nullopt) {
  require_rep_shape(sd.isotropy.groupoid, U0);
  const FiniteGroupoid& g = sd.parent;
  std::vector<Matrix> out;
  if (fiber) {
    if (idx(*fiber) >= g.base_count()) throw PreconditionError("fiber is not a base point");
    for (Arrow l : g.loops_at(*fiber)) out.push_back(U0(sd.isotropy.local(l)));
    return out;
  }
  const std::size_t n = U0.bundle.total();
  for (Base x : g.bases()) {
    const std::size_t off = U0.bundle.offset(x);
    for (Arrow l : g.loops_at(x)) {
      const Matrix& u = U0(sd.isotropy.local(l));
      Matrix m(n, n);
      for (std::size_t i = 0; i < u.rows(); ++i)
        for (std::size_t j = 0; j < u.cols(); ++j) m(off + i, off + j) = u(i, j);
      out.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace groupoid
