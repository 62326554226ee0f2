#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "groupoid/core.hpp"
#include "groupoid/random.hpp"
#include "groupoid/semidirect.hpp"

namespace groupoid {

using Complex = std::complex<double>;

/// Complex-valued function on the arrows of a finite groupoid.
struct GroupoidFunction {
  std::vector<Complex> values;

  static GroupoidFunction zero(std::size_t n) { return {std::vector<Complex>(n)}; }
  static GroupoidFunction delta(std::size_t n, Arrow a) {
    GroupoidFunction f = zero(n);
    f.values.at(idx(a)) = 1.0;
    return f;
  }

  std::size_t size() const noexcept { return values.size(); }
  Complex operator()(Arrow a) const { return values[idx(a)]; }
  Complex& operator[](Arrow a) { return values[idx(a)]; }

  GroupoidFunction& operator+=(const GroupoidFunction& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  friend GroupoidFunction operator+(GroupoidFunction a, const GroupoidFunction& b) { return a += b; }
  friend GroupoidFunction operator*(Complex s, GroupoidFunction a) {
    for (auto& v : a.values) v *= s;
    return a;
  }
};

inline double max_abs_diff(const GroupoidFunction& a, const GroupoidFunction& b) {
  if (a.size() != b.size()) throw PreconditionError("functions live on different carriers");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

/// Weighted counting measures. Weights are positive, constant on each
/// isotropy group, and equal on isotropy groups joined by an arrow, so that
/// the restricted measures are invariant under α.
class HaarWeights {
 public:
  static HaarWeights counting(const FiniteGroupoid& g) { return uniform(g, 1.0); }
  static HaarWeights uniform(const FiniteGroupoid& g, double c) {
    return checked(g, std::vector<double>(g.arrow_count(), c));
  }

  static HaarWeights checked(const FiniteGroupoid& g, std::vector<double> w) {
    if (w.size() != g.arrow_count()) throw PreconditionError("one Haar weight per arrow required");
    for (double v : w)
      if (!std::isfinite(v) || v <= 0.0) throw PreconditionError("Haar weights must be finite and positive");
    const auto same = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); };
    for (Base x : g.bases()) {
      const auto loops = g.loops_at(x);
      for (Arrow l : loops)
        if (!same(w[idx(l)], w[idx(loops.front())]))
          throw PreconditionError("Haar weights are not constant on the isotropy group at '" + g.base_name(x) + "'");
    }
    for (Arrow a : g.arrows()) {
      const auto from = g.loops_at(g.src(a));
      const auto to = g.loops_at(g.tgt(a));
      if (!from.empty() && !to.empty() && !same(w[idx(from.front())], w[idx(to.front())]))
        throw PreconditionError("Haar weights are not invariant under conjugation by " + g.arrow_name(a));
    }
    HaarWeights h;
    h.w_ = std::move(w);
    return h;
  }

  double operator()(Arrow a) const { return w_[idx(a)]; }
  std::size_t size() const noexcept { return w_.size(); }

 private:
  std::vector<double> w_;
};

/// Product weights w(γ₀)·w(γ₁) on a semidirect carrier.
inline HaarWeights carrier_weights(const SemidirectGroupoid& sd, const HaarWeights& w) {
  if (w.size() != sd.parent.arrow_count()) throw PreconditionError("weights are not on the parent groupoid");
  std::vector<double> cw;
  for (const auto& [a0, a1] : sd.pair_of) cw.push_back(w(a0) * w(a1));
  return HaarWeights::checked(sd.carrier, std::move(cw));
}

namespace detail {

inline void require_size(const FiniteGroupoid& g, const GroupoidFunction& f) {
  if (f.size() != g.arrow_count()) throw PreconditionError("function carrier does not match the groupoid");
  for (const Complex& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw PreconditionError("function value is not finite");
}

inline void require_weights(const FiniteGroupoid& g, const HaarWeights& w) {
  if (w.size() != g.arrow_count()) throw PreconditionError("Haar weights do not match the groupoid");
}

}  // namespace detail

/// Checks that `a` lies in A_x = functions on the isotropy group Γ₀,ₓ.
inline void require_fiber_support(const FiniteGroupoid& g, const GroupoidFunction& a, Base x) {
  detail::require_size(g, a);
  for (Arrow arr : g.arrows())
    if (a(arr) != Complex{} && (!g.is_loop(arr) || g.src(arr) != x))
      throw PreconditionError("function has support at " + g.arrow_name(arr) + ", outside the isotropy group at '" +
                              g.base_name(x) + "'");
}

/// Fiber algebra product (a₁•a₂)(γ₀) = Σ_{γ₀'∈Γ₀,ₓ} w(γ₀')·a₁(γ₀')·a₂(γ₀'⁻¹∘γ₀).
inline GroupoidFunction fiber_convolve(const FiniteGroupoid& g, const GroupoidFunction& a1,
                                       const GroupoidFunction& a2, Base x, const HaarWeights& w) {
  require_fiber_support(g, a1, x);
  require_fiber_support(g, a2, x);
  detail::require_weights(g, w);
  GroupoidFunction out = GroupoidFunction::zero(g.arrow_count());
  const auto loops = g.loops_at(x);
  for (Arrow target : loops) {
    Complex acc{};
    for (Arrow s : loops) acc += w(s) * a1(s) * a2(g.compose(g.inv(s), target));
    out[target] = acc;
  }
  return out;
}

/// Dual action β_{γ₁}: A_{r(γ₁)} → A_{d(γ₁)}, (β_{γ₁}a)(γ₀) = a(α_{γ₁}(γ₀)).
inline GroupoidFunction beta(const FiniteGroupoid& g, Arrow g1, const GroupoidFunction& a) {
  require_fiber_support(g, a, g.tgt(g1));
  GroupoidFunction out = GroupoidFunction::zero(g.arrow_count());
  for (Arrow g0 : g.loops_at(g.src(g1))) out[g0] = a(alpha(g, g1, g0));
  return out;
}

/// Element of the crossed product A ⋊ Γ₁: one fiber element per Γ₁ arrow,
/// indexed by the local id in sd.translations. fibers[k] lives on parent
/// arrows and is supported on Γ₀,r(γ₁).
struct BundleFunction {
  std::vector<GroupoidFunction> fibers;
};

inline void require_bundle(const SemidirectGroupoid& sd, const BundleFunction& F) {
  if (F.fibers.size() != sd.translations.groupoid.arrow_count())
    throw PreconditionError("bundle function must have one fiber element per Γ₁ arrow");
  for (std::size_t k = 0; k < F.fibers.size(); ++k) {
    const Arrow g1 = sd.translations.to_parent[k];
    require_fiber_support(sd.parent, F.fibers[k], sd.parent.tgt(g1));
  }
}

inline BundleFunction zero_bundle(const SemidirectGroupoid& sd) {
  return {std::vector<GroupoidFunction>(sd.translations.groupoid.arrow_count(),
                                        GroupoidFunction::zero(sd.parent.arrow_count()))};
}

/// Twisted convolution
/// (F₁⊛F₂)(γ₁) = Σ_{γ₁'∈Γ₁^{r(γ₁)}} w(γ₁')·F₁(γ₁') • β_{γ₁'⁻¹}(F₂(γ₁'⁻¹∘γ₁)),
/// with • taken in A_{r(γ₁)}.
inline BundleFunction twisted_convolve(const SemidirectGroupoid& sd, const BundleFunction& F1,
                                       const BundleFunction& F2, const HaarWeights& w) {
  require_bundle(sd, F1);
  require_bundle(sd, F2);
  detail::require_weights(sd.parent, w);
  const FiniteGroupoid& g = sd.parent;
  const auto& t = sd.translations;
  BundleFunction out = zero_bundle(sd);
  for (std::size_t k = 0; k < out.fibers.size(); ++k) {
    const Arrow g1 = t.to_parent[k];
    const Base y = g.tgt(g1);
    GroupoidFunction acc = GroupoidFunction::zero(g.arrow_count());
    for (Arrow h1 : g.arrows_to(y)) {
      if (!t.contains(h1)) continue;
      const Arrow h1inv = g.inv(h1);
      const GroupoidFunction& f2 = F2.fibers[idx(t.local(g.compose(h1inv, g1)))];
      acc += w(h1) * fiber_convolve(g, F1.fibers[idx(t.local(h1))], beta(g, h1inv, f2), y, w);
    }
    out.fibers[k] = std::move(acc);
  }
  return out;
}

/// Convolution on any finite groupoid,
/// (f₁*f₂)(γ) = Σ_{η: r(η)=r(γ)} w(η)·f₁(η)·f₂(η⁻¹∘γ).
inline GroupoidFunction groupoid_convolve(const FiniteGroupoid& g, const GroupoidFunction& f1,
                                          const GroupoidFunction& f2, const HaarWeights& w) {
  detail::require_size(g, f1);
  detail::require_size(g, f2);
  detail::require_weights(g, w);
  GroupoidFunction out = GroupoidFunction::zero(g.arrow_count());
  for (Arrow arr : g.arrows()) {
    Complex acc{};
    for (Arrow eta : g.arrows_to(g.tgt(arr))) acc += w(eta) * f1(eta) * f2(g.compose(g.inv(eta), arr));
    out[arr] = acc;
  }
  return out;
}

/// The same product on Γ₀ ⋊ Γ₁ written as the iterated sum over
/// γ₁' ∈ Γ₁^{r(γ₁)} and γ₀' ∈ Γ₀,r(γ₁) with product weights dγ₀'dγ₁'.
inline GroupoidFunction semidirect_iterated_convolve(const SemidirectGroupoid& sd, const GroupoidFunction& f1,
                                                     const GroupoidFunction& f2, const HaarWeights& w) {
  detail::require_size(sd.carrier, f1);
  detail::require_size(sd.carrier, f2);
  detail::require_weights(sd.parent, w);
  const FiniteGroupoid& g = sd.parent;
  const FiniteGroupoid& c = sd.carrier;
  GroupoidFunction out = GroupoidFunction::zero(c.arrow_count());
  for (Arrow arr : c.arrows()) {
    const Base y = g.tgt(sd.translation_part(arr));
    Complex acc{};
    for (Arrow h1 : g.arrows_to(y)) {
      if (!sd.translations.contains(h1)) continue;
      for (Arrow h0 : g.loops_at(y)) {
        const Arrow eta = sd.arrow_of(h0, h1);
        acc += w(h0) * w(h1) * f1(eta) * f2(c.compose(c.inv(eta), arr));
      }
    }
    out[arr] = acc;
  }
  return out;
}

/// (KF)(γ₀,γ₁) = (F(γ₁))(γ₀).
inline GroupoidFunction K_map(const SemidirectGroupoid& sd, const BundleFunction& F) {
  require_bundle(sd, F);
  GroupoidFunction f = GroupoidFunction::zero(sd.carrier.arrow_count());
  for (Arrow c : sd.carrier.arrows()) {
    const auto [a0, a1] = sd.pair_of[idx(c)];
    f[c] = F.fibers[idx(sd.translations.local(a1))](a0);
  }
  return f;
}

/// (F(γ₁))(γ₀) = f(γ₀,γ₁).
inline BundleFunction K_inverse(const SemidirectGroupoid& sd, const GroupoidFunction& f) {
  detail::require_size(sd.carrier, f);
  BundleFunction F = zero_bundle(sd);
  for (Arrow c : sd.carrier.arrows()) {
    const auto [a0, a1] = sd.pair_of[idx(c)];
    F.fibers[idx(sd.translations.local(a1))][a0] = f(c);
  }
  return F;
}

inline GroupoidFunction random_function(std::size_t n, Rng& rng) {
  GroupoidFunction f = GroupoidFunction::zero(n);
  for (auto& v : f.values) v = rng.unit_square();
  return f;
}

/// Random element of A_x.
inline GroupoidFunction random_fiber_function(const FiniteGroupoid& g, Base x, Rng& rng) {
  GroupoidFunction f = GroupoidFunction::zero(g.arrow_count());
  for (Arrow l : g.loops_at(x)) f[l] = rng.unit_square();
  return f;
}

inline BundleFunction random_bundle_function(const SemidirectGroupoid& sd, Rng& rng) {
  BundleFunction F = zero_bundle(sd);
  for (std::size_t k = 0; k < F.fibers.size(); ++k)
    F.fibers[k] = random_fiber_function(sd.parent, sd.parent.tgt(sd.translations.to_parent[k]), rng);
  return F;
}

struct Theorem1Report {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  double tol = 0.0;
  double max_deviation = 0.0;
  std::optional<std::pair<std::size_t, Arrow>> witness;  // (trial, carrier arrow) at the max
  std::size_t identity_pairs_checked = 0;
  std::size_t identity_failures = 0;
  std::optional<std::pair<Arrow, Arrow>> identity_witness;
  bool passed() const { return max_deviation <= tol && identity_failures == 0; }
};

/// Randomized check of K(F₁⊛F₂) = K(F₁)*K(F₂), plus the exact identity
/// (γ₀',γ₁')⁻¹∘(γ₀,γ₁) = (α_{γ₁'⁻¹}(γ₀'⁻¹∘γ₀), γ₁'⁻¹∘γ₁) on every
/// composable pair.
inline Theorem1Report verify_theorem1(const SemidirectGroupoid& sd, std::size_t trials, std::uint64_t seed,
                                      double tol, const HaarWeights* weights = nullptr) {
  Theorem1Report r;
  r.seed = seed;
  r.trials = trials;
  r.tol = tol;
  const FiniteGroupoid& g = sd.parent;
  const FiniteGroupoid& c = sd.carrier;

  for (Arrow a : c.arrows())
    for (Arrow b : c.arrows()) {
      if (c.tgt(a) != c.tgt(b)) continue;
      ++r.identity_pairs_checked;
      const auto [a0, a1] = sd.pair_of[idx(a)];
      const auto [b0, b1] = sd.pair_of[idx(b)];
      const Arrow a1inv = g.inv(a1);
      const Arrow expect = sd.arrow_of(alpha(g, a1inv, g.compose(g.inv(a0), b0)), g.compose(a1inv, b1));
      if (c.compose(c.inv(a), b) != expect) {
        if (!r.identity_witness) r.identity_witness = {a, b};
        ++r.identity_failures;
      }
    }

  const HaarWeights w = weights ? *weights : HaarWeights::counting(g);
  const HaarWeights cw = carrier_weights(sd, w);
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const BundleFunction F1 = random_bundle_function(sd, rng);
    const BundleFunction F2 = random_bundle_function(sd, rng);
    const GroupoidFunction lhs = K_map(sd, twisted_convolve(sd, F1, F2, w));
    const GroupoidFunction rhs = groupoid_convolve(c, K_map(sd, F1), K_map(sd, F2), cw);
    for (Arrow a : c.arrows()) {
      const double d = std::abs(lhs(a) - rhs(a));
      if (!r.witness || d > r.max_deviation) {
        r.witness = {t, a};
        r.max_deviation = d;
      }
    }
  }
  return r;
}

}  // namespace groupoid
