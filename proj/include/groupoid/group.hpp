#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groupoid/core.hpp"
#include "groupoid/error.hpp"

namespace groupoid {

enum class Element : std::uint32_t {};
constexpr std::size_t idx(Element g) noexcept { return static_cast<std::size_t>(g); }
constexpr Element element_at(std::size_t i) noexcept { return Element{static_cast<std::uint32_t>(i)}; }

/// A finite group given by its multiplication table, validated on
/// construction.
class FiniteGroup {
 public:
  FiniteGroup() = default;

  FiniteGroup(std::vector<std::string> names, std::vector<std::vector<std::size_t>> mul, std::size_t identity)
      : names_(std::move(names)), identity_(element_at(identity)) {
    const std::size_t n = names_.size();
    if (n == 0) throw InvalidGroup("group must have at least one element");
    if (mul.size() != n) throw InvalidGroup("multiplication table must be n×n");
    if (identity >= n) throw InvalidGroup("identity is not an element");
    {
      std::vector<std::string> sorted = names_;
      std::ranges::sort(sorted);
      if (std::ranges::adjacent_find(sorted) != sorted.end()) throw InvalidGroup("duplicate element names");
    }
    mul_.resize(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      if (mul[a].size() != n) throw InvalidGroup("multiplication table must be n×n");
      for (std::size_t b = 0; b < n; ++b) {
        if (mul[a][b] >= n) throw InvalidGroup("multiplication table leaves the group");
        mul_[a * n + b] = element_at(mul[a][b]);
      }
    }
    for (std::size_t a = 0; a < n; ++a)
      if (mul_[identity * n + a] != element_at(a) || mul_[a * n + identity] != element_at(a))
        throw InvalidGroup("identity law fails at '" + names_[a] + "'");
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          if (mul_[idx(mul_[a * n + b]) * n + c] != mul_[a * n + idx(mul_[b * n + c])])
            throw InvalidGroup("associativity fails at ('" + names_[a] + "', '" + names_[b] + "', '" +
                               names_[c] + "')");
    inv_.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
      std::optional<std::size_t> found;
      for (std::size_t b = 0; b < n && !found; ++b)
        if (mul_[a * n + b] == identity_ && mul_[b * n + a] == identity_) found = b;
      if (!found) throw InvalidGroup("element '" + names_[a] + "' has no inverse");
      inv_[a] = element_at(*found);
    }
  }

  std::size_t size() const noexcept { return names_.size(); }
  Element identity() const noexcept { return identity_; }
  Element mul(Element a, Element b) const { return mul_[idx(a) * size() + idx(b)]; }
  Element inv(Element a) const { return inv_[idx(a)]; }
  const std::string& name(Element a) const { return names_[idx(a)]; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  auto elements() const {
    return std::views::iota(std::size_t{0}, size()) | std::views::transform(element_at);
  }
  std::optional<Element> find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return element_at(i);
    return std::nullopt;
  }
  std::vector<std::vector<std::size_t>> table() const {
    std::vector<std::vector<std::size_t>> t(size(), std::vector<std::size_t>(size()));
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b = 0; b < size(); ++b) t[a][b] = idx(mul_[a * size() + b]);
    return t;
  }

  static FiniteGroup cyclic(std::size_t n) {
    if (n == 0) throw InvalidGroup("cyclic group order must be positive");
    std::vector<std::string> names;
    for (std::size_t k = 0; k < n; ++k) names.push_back(k == 0 ? "e" : k == 1 ? "a" : "a^" + std::to_string(k));
    std::vector<std::vector<std::size_t>> mul(n, std::vector<std::size_t>(n));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) mul[a][b] = (a + b) % n;
    return {std::move(names), std::move(mul), 0};
  }

  /// All permutations of {0,…,k−1} in lexicographic order; composition
  /// (p·q)(i) = p(q(i)).
  static FiniteGroup symmetric(std::size_t k) {
    std::vector<std::vector<std::size_t>> perms;
    std::vector<std::size_t> p(k);
    std::iota(p.begin(), p.end(), 0);
    do perms.push_back(p);
    while (std::ranges::next_permutation(p).found);
    return from_permutations(std::move(perms));
  }

  /// Symmetries of the square acting on vertices 0..3.
  static FiniteGroup dihedral4() {
    return generated_by({{1, 2, 3, 0}, {0, 3, 2, 1}});
  }

  static FiniteGroup klein4() { return generated_by({{1, 0, 3, 2}, {2, 3, 0, 1}}); }

  /// Unit quaternions ±1, ±i, ±j, ±k.
  static FiniteGroup quaternion8() {
    // basis index: 0 = 1, 1 = i, 2 = j, 3 = k; element = 2·basis + sign bit
    static constexpr int unit[4][4][2] = {
        {{0, 1}, {1, 1}, {2, 1}, {3, 1}},
        {{1, 1}, {0, -1}, {3, 1}, {2, -1}},
        {{2, 1}, {3, -1}, {0, -1}, {1, 1}},
        {{3, 1}, {2, 1}, {1, -1}, {0, -1}},
    };
    const char* basis[4] = {"1", "i", "j", "k"};
    std::vector<std::string> names;
    for (int b = 0; b < 4; ++b) {
      names.push_back(basis[b]);
      names.push_back(std::string("-") + basis[b]);
    }
    std::vector<std::vector<std::size_t>> mul(8, std::vector<std::size_t>(8));
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) {
        const auto& u = unit[a / 2][b / 2];
        const int sign = u[1] * ((a % 2) ? -1 : 1) * ((b % 2) ? -1 : 1);
        mul[a][b] = static_cast<std::size_t>(2 * u[0] + (sign < 0 ? 1 : 0));
      }
    return {std::move(names), std::move(mul), 0};
  }

  /// Built-in names: Z<n>, S3, D4, V4, Q8.
  static std::optional<FiniteGroup> builtin(std::string_view name) {
    if (name == "S3") return symmetric(3);
    if (name == "D4") return dihedral4();
    if (name == "V4") return klein4();
    if (name == "Q8") return quaternion8();
    if (name.size() >= 2 && name[0] == 'Z' &&
        std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      const std::size_t n = std::stoul(std::string(name.substr(1)));
      if (n >= 1 && n <= 64) return cyclic(n);
    }
    return std::nullopt;
  }

  static FiniteGroup from_permutations(std::vector<std::vector<std::size_t>> perms) {
    const std::size_t n = perms.size();
    std::map<std::vector<std::size_t>, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[perms[i]] = i;
    std::vector<std::string> names;
    std::size_t identity = SIZE_MAX;
    for (std::size_t i = 0; i < n; ++i) {
      names.push_back(cycle_notation(perms[i]));
      if (names.back() == "e") identity = i;
    }
    if (identity == SIZE_MAX) throw InvalidGroup("permutation set lacks the identity");
    std::vector<std::vector<std::size_t>> mul(n, std::vector<std::size_t>(n));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        std::vector<std::size_t> c(perms[a].size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = perms[a][perms[b][i]];
        auto it = index.find(c);
        if (it == index.end()) throw InvalidGroup("permutation set is not closed");
        mul[a][b] = it->second;
      }
    return {std::move(names), std::move(mul), identity};
  }

 private:
  static FiniteGroup generated_by(const std::vector<std::vector<std::size_t>>& gens) {
    const std::size_t k = gens.front().size();
    std::vector<std::size_t> id(k);
    std::iota(id.begin(), id.end(), 0);
    std::vector<std::vector<std::size_t>> elems{id};
    std::map<std::vector<std::size_t>, std::size_t> seen{{id, 0}};
    for (std::size_t i = 0; i < elems.size(); ++i)
      for (const auto& s : gens) {
        std::vector<std::size_t> c(k);
        for (std::size_t j = 0; j < k; ++j) c[j] = s[elems[i][j]];
        if (seen.emplace(c, elems.size()).second) elems.push_back(c);
      }
    return from_permutations(std::move(elems));
  }

  static std::string cycle_notation(const std::vector<std::size_t>& p) {
    std::string out;
    std::vector<char> done(p.size(), 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (done[i] || p[i] == i) continue;
      out += "(";
      for (std::size_t j = i; !done[j]; j = p[j]) {
        if (j != i) out += " ";
        out += std::to_string(j);
        done[j] = 1;
      }
      out += ")";
    }
    return out.empty() ? "e" : out;
  }

  std::vector<std::string> names_;
  std::vector<Element> mul_;
  std::vector<Element> inv_;
  Element identity_{0};
};

/// A group as a groupoid over a one-point base; arrow ids equal element ids.
inline FiniteGroupoid group_as_groupoid(const FiniteGroup& g) {
  const std::size_t n = g.size();
  std::vector<Base> ends(n, base_at(0));
  std::vector<Arrow> inv;
  for (Element a : g.elements()) inv.push_back(arrow_at(idx(g.inv(a))));
  return FiniteGroupoid::generate(
      {"0"}, g.names(), ends, ends,
      [&g](Arrow a, Arrow b) { return arrow_at(idx(g.mul(element_at(idx(a)), element_at(idx(b))))); },
      std::move(inv), {arrow_at(idx(g.identity()))});
}

}  // namespace groupoid
