#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "groupoid/convolution.hpp"
#include "groupoid/core.hpp"
#include "groupoid/gauge.hpp"
#include "groupoid/group.hpp"

// JSON file formats. Writers use ordered_json so key order is stable.
namespace groupoid::io {

using json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path, "cannot open file for writing");
  out << text;
}

inline json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + " at byte " + std::to_string(e.byte), e.what());
  }
}

inline json load(const std::string& path) { return parse_text(read_file(path), path); }

namespace detail {

inline const json& member(const json& j, const char* key, const std::string& ptr) {
  if (!j.is_object()) throw ParseError(ptr.empty() ? "/" : ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(ptr + "/" + key, "missing key");
  return *it;
}

inline const std::string& str(const json& j, const std::string& ptr) {
  if (!j.is_string()) throw ParseError(ptr, "expected a string");
  return j.get_ref<const std::string&>();
}

inline const json& array(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw ParseError(ptr, "expected an array");
  return j;
}

inline double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw ParseError(ptr, "expected a number");
  return j.get<double>();
}

template <class Id>
Id lookup(const std::map<std::string, Id>& ids, const std::string& name, const std::string& ptr, const char* what) {
  auto it = ids.find(name);
  if (it == ids.end()) throw MalformedTable(ptr + ": " + what + " '" + name + "' is not declared");
  return it->second;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Groupoid description file

inline json groupoid_to_json(const FiniteGroupoid& g) {
  json j;
  j["base"] = g.base_names();
  json arrows = json::array();
  for (Arrow a : g.arrows())
    arrows.push_back({{"id", g.arrow_name(a)}, {"src", g.base_name(g.src(a))}, {"tgt", g.base_name(g.tgt(a))}});
  j["arrows"] = std::move(arrows);
  json compose = json::array();
  for (Arrow a : g.arrows())
    for (Arrow b : g.arrows_to(g.src(a)))
      compose.push_back({g.arrow_name(a), g.arrow_name(b), g.arrow_name(g.compose(a, b))});
  j["compose"] = std::move(compose);
  json inv = json::object();
  for (Arrow a : g.arrows()) inv[g.arrow_name(a)] = g.arrow_name(g.inv(a));
  j["inv"] = std::move(inv);
  json identity = json::object();
  for (Base x : g.bases()) identity[g.base_name(x)] = g.arrow_name(g.identity(x));
  j["identity"] = std::move(identity);
  if (g.has_labels()) {
    json labels = json::object();
    for (Arrow a : g.arrows()) labels[g.arrow_name(a)] = g.label(a);
    j["labels"] = std::move(labels);
  }
  return j;
}

/// Structural problems (unknown ids, non-composable entries, missing
/// entries) raise MalformedTable; shape problems raise ParseError.
inline FiniteGroupoid groupoid_from_json(const json& j) {
  using namespace detail;
  GroupoidTables t;
  std::map<std::string, Base> bases;
  std::map<std::string, Arrow> arrows;

  const json& jb = array(member(j, "base", ""), "/base");
  for (std::size_t i = 0; i < jb.size(); ++i) {
    const std::string& name = str(jb[i], "/base/" + std::to_string(i));
    if (!bases.emplace(name, base_at(i)).second) throw MalformedTable("/base: duplicate base point '" + name + "'");
    t.base.push_back(name);
  }
  const json& ja = array(member(j, "arrows", ""), "/arrows");
  for (std::size_t i = 0; i < ja.size(); ++i) {
    const std::string ptr = "/arrows/" + std::to_string(i);
    const std::string& name = str(member(ja[i], "id", ptr), ptr + "/id");
    if (!arrows.emplace(name, arrow_at(i)).second) throw MalformedTable(ptr + ": duplicate arrow '" + name + "'");
    t.arrows.push_back(name);
    t.src.push_back(lookup(bases, str(member(ja[i], "src", ptr), ptr + "/src"), ptr + "/src", "base point"));
    t.tgt.push_back(lookup(bases, str(member(ja[i], "tgt", ptr), ptr + "/tgt"), ptr + "/tgt", "base point"));
  }
  const json& jc = array(member(j, "compose", ""), "/compose");
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string ptr = "/compose/" + std::to_string(i);
    if (!jc[i].is_array() || jc[i].size() != 3) throw ParseError(ptr, "expected a [γ, ξ, result] triple");
    std::array<Arrow, 3> e{};
    for (std::size_t k = 0; k < 3; ++k) {
      const std::string p = ptr + "/" + std::to_string(k);
      e[k] = lookup(arrows, str(jc[i][k], p), p, "arrow");
    }
    t.compose.push_back(e);
  }
  const json& ji = member(j, "inv", "");
  if (!ji.is_object()) throw ParseError("/inv", "expected an object");
  t.inv.assign(t.arrows.size(), kNoArrow);
  for (const auto& [k, v] : ji.items()) {
    const Arrow a = lookup(arrows, k, "/inv", "arrow");
    t.inv[idx(a)] = lookup(arrows, str(v, "/inv/" + k), "/inv/" + k, "arrow");
  }
  for (std::size_t i = 0; i < t.inv.size(); ++i)
    if (t.inv[i] == kNoArrow) throw MalformedTable("/inv: no inverse given for '" + t.arrows[i] + "'");
  const json& jid = member(j, "identity", "");
  if (!jid.is_object()) throw ParseError("/identity", "expected an object");
  t.identity.assign(t.base.size(), kNoArrow);
  for (const auto& [k, v] : jid.items()) {
    const Base x = lookup(bases, k, "/identity", "base point");
    t.identity[idx(x)] = lookup(arrows, str(v, "/identity/" + k), "/identity/" + k, "arrow");
  }
  for (std::size_t i = 0; i < t.identity.size(); ++i)
    if (t.identity[i] == kNoArrow) throw MalformedTable("/identity: no identity given for '" + t.base[i] + "'");
  if (auto it = j.find("labels"); it != j.end()) {
    if (!it->is_object()) throw ParseError("/labels", "expected an object");
    t.labels.assign(t.arrows.size(), "");
    for (const auto& [k, v] : it->items())
      t.labels[idx(lookup(arrows, k, "/labels", "arrow"))] = str(v, "/labels/" + k);
  }
  return FiniteGroupoid(std::move(t));
}

/// A selection file is a JSON array of arrow ids.
inline SubgroupoidSelection selection_from_json(const FiniteGroupoid& g, const json& j) {
  detail::array(j, "");
  std::vector<Arrow> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = "/" + std::to_string(i);
    const std::string& name = detail::str(j[i], p);
    const auto a = g.find_arrow(name);
    if (!a) throw MalformedTable(p + ": arrow '" + name + "' is not in the groupoid");
    out.push_back(*a);
  }
  return {g, std::move(out)};
}

// ---------------------------------------------------------------------------
// Group table file: {"elements": [...], "mul": [[...]], "identity": ...}
// with table entries and identity given as element names or indices.

inline FiniteGroup group_from_json(const json& j) {
  using namespace detail;
  std::vector<std::string> names;
  std::map<std::string, std::size_t> ids;
  const json& je = array(member(j, "elements", ""), "/elements");
  for (std::size_t i = 0; i < je.size(); ++i) {
    names.push_back(str(je[i], "/elements/" + std::to_string(i)));
    ids.emplace(names.back(), i);
  }
  const auto element = [&](const json& v, const std::string& p) -> std::size_t {
    if (v.is_number_integer()) {
      const auto k = v.get<std::int64_t>();
      if (k < 0 || static_cast<std::size_t>(k) >= names.size()) throw ParseError(p, "element index out of range");
      return static_cast<std::size_t>(k);
    }
    if (v.is_string()) {
      auto it = ids.find(v.get<std::string>());
      if (it == ids.end()) throw ParseError(p, "unknown element '" + v.get<std::string>() + "'");
      return it->second;
    }
    throw ParseError(p, "expected an element name or index");
  };
  const json& jm = array(member(j, "mul", ""), "/mul");
  std::vector<std::vector<std::size_t>> mul;
  for (std::size_t a = 0; a < jm.size(); ++a) {
    const std::string p = "/mul/" + std::to_string(a);
    array(jm[a], p);
    mul.emplace_back();
    for (std::size_t b = 0; b < jm[a].size(); ++b) mul.back().push_back(element(jm[a][b], p + "/" + std::to_string(b)));
  }
  const std::size_t identity = element(member(j, "identity", ""), "/identity");
  return {std::move(names), std::move(mul), identity};
}

inline json group_to_json(const FiniteGroup& g) {
  json j;
  j["elements"] = g.names();
  json mul = json::array();
  for (Element a : g.elements()) {
    json row = json::array();
    for (Element b : g.elements()) row.push_back(g.name(g.mul(a, b)));
    mul.push_back(std::move(row));
  }
  j["mul"] = std::move(mul);
  j["identity"] = g.name(g.identity());
  return j;
}

// ---------------------------------------------------------------------------
// Section file: {"<base>": "<element>", ...}; base names are "0".."n-1".

inline Section section_from_json(const FinitePrincipalBundle& b, const json& j) {
  if (!j.is_object()) throw ParseError("/", "expected an object");
  Section s;
  for (std::size_t x = 0; x < b.base_count; ++x) {
    const std::string key = std::to_string(x);
    const std::string& name = detail::str(detail::member(j, key.c_str(), ""), "/" + key);
    const auto e = b.group.find(name);
    if (!e) throw ParseError("/" + key, "unknown element '" + name + "'");
    s.sigma.push_back(*e);
  }
  if (j.size() != b.base_count) throw ParseError("/", "section has entries for unknown base points");
  return s;
}

inline json section_to_json(const FinitePrincipalBundle& b, const Section& s) {
  json j = json::object();
  for (std::size_t x = 0; x < b.base_count; ++x) j[std::to_string(x)] = b.group.name(s.sigma[x]);
  return j;
}

// ---------------------------------------------------------------------------
// Function file: {"<arrow id>": [re, im], ...}; missing arrows are zero.

inline GroupoidFunction function_from_json(const FiniteGroupoid& g, const json& j) {
  if (!j.is_object()) throw ParseError("/", "expected an object");
  GroupoidFunction f = GroupoidFunction::zero(g.arrow_count());
  for (const auto& [k, v] : j.items()) {
    const std::string p = "/" + k;
    const auto a = g.find_arrow(k);
    if (!a) throw ParseError(p, "unknown arrow '" + k + "'");
    if (!v.is_array() || v.size() != 2) throw ParseError(p, "expected [re, im]");
    f[*a] = {detail::number(v[0], p + "/0"), detail::number(v[1], p + "/1")};
  }
  return f;
}

inline json function_to_json(const FiniteGroupoid& g, const GroupoidFunction& f) {
  json j = json::object();
  for (Arrow a : g.arrows()) j[g.arrow_name(a)] = {f(a).real(), f(a).imag()};
  return j;
}

}  // namespace groupoid::io
