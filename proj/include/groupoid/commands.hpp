#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "groupoid/convolution.hpp"
#include "groupoid/core.hpp"
#include "groupoid/gauge.hpp"
#include "groupoid/io.hpp"
#include "groupoid/linalg.hpp"
#include "groupoid/representation.hpp"
#include "groupoid/semidirect.hpp"

// Subcommands of the verification CLI. Each maps onto one library
// operation; the executable only parses flags and writes the report.
namespace groupoid::cli {

using json = io::json;

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kBadInput = 2, kTooLarge = 3 };

struct RunConfig {
  std::string command;
  std::optional<std::string> in;
  std::optional<std::string> translations;
  std::optional<std::size_t> base;
  std::optional<std::string> group;
  std::string section = "identity";  // identity | random | <file>
  std::uint64_t seed = 0;
  double tol = 1e-9;
  std::size_t trials = 50;
  int levels = 1;
  std::optional<std::size_t> fiber;
  std::optional<std::string> f1, f2;
  std::optional<std::string> out;
  bool poincare = false;
  std::size_t iso_cap = 64;
  std::size_t commutant_cap = 1000000;
};

/// Cap overrides from GROUPOID_ISO_CAP and GROUPOID_COMMUTANT_CAP.
inline void apply_env_caps(RunConfig& cfg) {
  const auto read = [](const char* name, std::size_t& slot) {
    if (const char* v = std::getenv(name)) {
      char* end = nullptr;
      const unsigned long long n = std::strtoull(v, &end, 10);
      if (end == v || *end != '\0' || n == 0) throw ParseError(name, "expected a positive integer");
      slot = static_cast<std::size_t>(n);
    }
  };
  read("GROUPOID_ISO_CAP", cfg.iso_cap);
  read("GROUPOID_COMMUTANT_CAP", cfg.commutant_cap);
}

struct RunResult {
  int exit_code = kPass;
  json report;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify-groupoid", "semidirect",   "quotient", "verify-prop1",
                                              "verify-theorem1", "rep-check",    "random-op", "commutant",
                                              "verify-poincare", "convolve"};
  return names;
}

namespace detail {

inline FiniteGroup resolve_group(const std::string& spec) {
  if (auto g = FiniteGroup::builtin(spec)) return *g;
  return io::group_from_json(io::load(spec));
}

struct Instance {
  FiniteGroupoid parent;
  std::optional<PoincareSetup> gauge;
  std::optional<SubgroupoidSelection> translations;
  json description;
};

inline Instance load_instance(const RunConfig& cfg) {
  Instance inst;
  if (cfg.in) {
    if (cfg.base || cfg.group) throw ParseError("arguments", "--in cannot be combined with --base/--group");
    inst.parent = io::groupoid_from_json(io::load(*cfg.in));
    inst.description = {{"kind", "file"}, {"path", *cfg.in}};
    if (cfg.translations) inst.translations = io::selection_from_json(inst.parent, io::load(*cfg.translations));
    return inst;
  }
  if (!cfg.base || !cfg.group) throw ParseError("arguments", "give --in, or --base together with --group");
  if (*cfg.base == 0) throw ParseError("--base", "base must have at least one point");
  const FinitePrincipalBundle b{*cfg.base, resolve_group(*cfg.group)};
  Section s;
  if (cfg.section == "identity") {
    s = identity_section(b);
  } else if (cfg.section == "random") {
    Rng rng(cfg.seed);
    s = random_section(b, rng);
  } else {
    s = io::section_from_json(b, io::load(cfg.section));
  }
  if (cfg.translations) throw ParseError("arguments", "--translations only applies to --in instances");
  inst.gauge = poincare_setup(b, s);
  inst.parent = inst.gauge->gauge.groupoid;
  inst.translations = translation_subgroupoid(inst.gauge->gauge, s);
  inst.description = {{"kind", "gauge"},
                      {"base_points", b.base_count},
                      {"group", *cfg.group},
                      {"group_order", b.group.size()},
                      {"section", io::section_to_json(b, s)}};
  return inst;
}

inline SemidirectGroupoid semidirect_of(const Instance& inst) {
  if (inst.gauge) return inst.gauge->sd;
  if (!inst.translations) throw ParseError("--translations", "a Γ₁ selection file is required for this command");
  return semidirect_product(inst.parent, isotropy_subgroupoid(inst.parent), *inst.translations);
}

inline json names(const FiniteGroupoid& g, std::span<const Arrow> arrows) {
  json j = json::array();
  for (Arrow a : arrows) j.push_back(g.arrow_name(a));
  return j;
}

inline json check(const std::string& name, bool passed) {
  return {{"name", name}, {"status", passed ? "pass" : "fail"}};
}

inline json check_result(const FiniteGroupoid& g, const CheckResult& c) {
  json j = check(c.name, c.passed);
  j["max_deviation"] = c.max_deviation;
  j["witness"] = names(g, c.witness);
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

template <class Rule>
json violations(const FiniteGroupoid& g, const CheckReport<Rule>& r) {
  json j = json::array();
  for (const auto& v : r.violations)
    j.push_back({{"rule", to_string(v.rule)}, {"witnesses", names(g, v.witnesses)}, {"detail", v.detail}});
  return j;
}

inline void emit(const RunConfig& cfg, json& report, const std::string& key, json artifact) {
  if (cfg.out) {
    io::write_file(*cfg.out, artifact.dump(2) + "\n");
    report["output"] = *cfg.out;
  } else {
    report[key] = std::move(artifact);
  }
}

inline GroupoidFunction isotropy_supported_random(const FiniteGroupoid& g, Rng& rng) {
  GroupoidFunction a = GroupoidFunction::zero(g.arrow_count());
  for (Arrow l : g.arrows())
    if (g.is_loop(l)) a[l] = rng.unit_square();
  return a;
}

/// U₀ and the translation family used by the representation commands.
inline std::pair<UnitaryRep, UnitaryRep> default_reps(const Instance& inst, const SemidirectGroupoid& sd) {
  if (inst.gauge) return {lorentz_regular_rep(*inst.gauge), section_translation_rep(*inst.gauge)};
  UnitaryRep U0 = regular_isotropy_rep(sd.isotropy.groupoid);
  UnitaryRep I = identity_translation_rep(sd.translations.groupoid, U0.bundle);
  return {std::move(U0), std::move(I)};
}

// --- subcommands -----------------------------------------------------------
// Each fills report["checks"] and returns whether every check passed.

inline bool verify_groupoid_cmd(const RunConfig&, const Instance& inst, json& report) {
  const ValidationReport v = validate_groupoid(inst.parent);
  json c = check("axioms", v.ok());
  c["violations"] = violations(inst.parent, v);
  report["checks"].push_back(std::move(c));
  return v.ok();
}

inline bool semidirect_cmd(const RunConfig& cfg, const Instance& inst, json& report) {
  const SemidirectGroupoid sd = semidirect_of(inst);
  const ValidationReport v = validate_groupoid(sd.carrier);
  json c = check("carrier_axioms", v.ok());
  c["violations"] = violations(sd.carrier, v);
  report["checks"].push_back(std::move(c));
  std::size_t expected = 0;
  for (Arrow a1 : sd.translation_selection.arrows()) expected += sd.parent.loops_at(sd.parent.tgt(a1)).size();
  json count = check("arrow_count", expected == sd.carrier.arrow_count());
  count["carrier_arrows"] = sd.carrier.arrow_count();
  count["expected"] = expected;
  report["checks"].push_back(std::move(count));
  const MorphismReport jm = verify_morphism(sd.carrier, sd.parent, J_map(sd), false);
  json jc = check("J_homomorphism", jm.ok());
  jc["violations"] = violations(sd.carrier, jm);
  report["checks"].push_back(std::move(jc));
  emit(cfg, report, "carrier", io::groupoid_to_json(sd.carrier));
  return v.ok() && expected == sd.carrier.arrow_count() && jm.ok();
}

inline bool quotient_cmd(const RunConfig& cfg, const Instance& inst, json& report) {
  const Quotient q = quotient_by_isotropy(inst.parent, isotropy_subgroupoid(inst.parent));
  const ValidationReport v = validate_groupoid(q.groupoid);
  json c = check("quotient_axioms", v.ok());
  c["arrows"] = q.groupoid.arrow_count();
  c["violations"] = violations(q.groupoid, v);
  report["checks"].push_back(std::move(c));
  const MorphismReport rho = verify_morphism(inst.parent, q.groupoid, q.projection, false);
  json r = check("projection_morphism", rho.ok());
  r["violations"] = violations(inst.parent, rho);
  report["checks"].push_back(std::move(r));
  emit(cfg, report, "quotient", io::groupoid_to_json(q.groupoid));
  return v.ok() && rho.ok();
}

inline bool prop1_cmd(const RunConfig& cfg, const Instance& inst, json& report) {
  const SemidirectGroupoid sd = semidirect_of(inst);
  const Prop1Result p = prop1_equivalence(sd.parent, sd.isotropy_selection, sd.translation_selection,
                                          IsoSearchOptions{cfg.iso_cap});
  json c = check("biconditional", p.agree());
  c["j_exists"] = p.j_exists;
  c["J_is_iso"] = p.J_is_iso;
  c["J_violations"] = violations(sd.carrier, p.J_report);
  report["checks"].push_back(std::move(c));
  bool ok = p.agree();
  if (p.J_is_iso) {
    json i = check("i_map", p.i_verified());
    i["violations"] = json::array();
    for (const auto& v : p.i_report.violations)
      i["violations"].push_back({{"rule", to_string(v.rule)}, {"detail", v.detail}});
    report["checks"].push_back(std::move(i));
    ok = ok && p.i_verified();
  }
  return ok;
}

inline bool theorem1_cmd(const RunConfig& cfg, const Instance& inst, json& report) {
  const SemidirectGroupoid sd = semidirect_of(inst);
  const Theorem1Report r = verify_theorem1(sd, cfg.trials, cfg.seed, cfg.tol);
  json h = check("homomorphism", r.max_deviation <= r.tol);
  h["trials"] = r.trials;
  h["seed"] = r.seed;
  h["tol"] = r.tol;
  h["max_deviation"] = r.max_deviation;
  if (r.witness) h["witness"] = {{"trial", r.witness->first}, {"arrow", sd.carrier.label(r.witness->second)}};
  report["checks"].push_back(std::move(h));
  json id = check("inverse_product_identity", r.identity_failures == 0);
  id["pairs_checked"] = r.identity_pairs_checked;
  id["failures"] = r.identity_failures;
  if (r.identity_witness)
    id["witness"] = {sd.carrier.label(r.identity_witness->first), sd.carrier.label(r.identity_witness->second)};
  report["checks"].push_back(std::move(id));
  return r.passed();
}

inline bool rep_check_cmd(const RunConfig& cfg, const Instance& inst, json& report) {
  const SemidirectGroupoid sd = semidirect_of(inst);
  const auto [U0, I] = default_reps(inst, sd);
  bool ok = true;
  const auto add_suite = [&](const std::string& prefix, const FiniteGroupoid& g, const CheckSuite& s) {
    for (const CheckResult& c : s.checks) {
      json j = check_result(g, c);
      j["name"] = prefix + "." + c.name;
      report["checks"].push_back(std::move(j));
    }
    ok = ok && s.passed();
  };
  add_suite("U0", sd.isotropy.groupoid, validate_rep(sd.isotropy.groupoid, U0, cfg.tol));
  add_suite("I", sd.translations.groupoid, validate_rep(sd.translations.groupoid, I, cfg.tol));
  const CheckResult comm = check_commutation(sd, U0, I, cfg.tol);
  report["checks"].push_back(check_result(sd.parent, comm));
  ok = ok && comm.passed;
  if (comm.passed) add_suite("extension", sd.carrier, validate_rep(sd.carrier, simple_extension(sd, U0, I, cfg.tol), cfg.tol));

  const HaarWeights w = HaarWeights::counting(sd.parent);
  Rng rng(cfg.seed);
  CheckResult iso{"equivariance.isotropy_rule"}, trans{"equivariance.translation_rule"};
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const CheckSuite e = check_equivariance(sd, isotropy_supported_random(sd.parent, rng), U0, I, w, cfg.tol);
    iso.observe(e.checks[0].max_deviation, e.checks[0].witness);
    trans.observe(e.checks[1].max_deviation, e.checks[1].witness);
  }
  iso.close(cfg.tol);
  trans.close(cfg.tol);
  json ji = check_result(sd.parent, iso), jt = check_result(sd.parent, trans);
  ji["trials"] = jt["trials"] = cfg.trials;
  report["checks"].push_back(std::move(ji));
  report["checks"].push_back(std::move(jt));
  return ok && iso.passed && trans.passed;
}

inline bool random_op_cmd(const RunConfig& cfg, const Instance& inst, json& report) {
  const SemidirectGroupoid sd = semidirect_of(inst);
  const auto [U0, I] = default_reps(inst, sd);
  const HaarWeights w = HaarWeights::counting(sd.parent);

  std::vector<GroupoidFunction> samples;
  if (cfg.f1) {
    samples.push_back(io::function_from_json(sd.parent, io::load(*cfg.f1)));
  } else {
    Rng rng(cfg.seed);
    for (std::size_t t = 0; t < cfg.trials; ++t) samples.push_back(isotropy_supported_random(sd.parent, rng));
  }
  bool bound_ok = true;
  double max_norm = 0.0, max_ratio = 0.0;
  for (const GroupoidFunction& a : samples) {
    const NormReport n = random_operator_norm(sd, random_operator_from(sd, U0, a, w), a, w);
    bound_ok = bound_ok && n.bound_holds;
    max_norm = std::max(max_norm, n.norm);
    for (std::size_t x = 0; x < n.bounds.size(); ++x)
      if (n.bounds[x] > 0.0) max_ratio = std::max(max_ratio, n.block_norms[x] / n.bounds[x]);
  }
  json b = check("norm_bound", bound_ok);
  b["samples"] = samples.size();
  b["max_norm"] = max_norm;
  b["max_norm_to_bound_ratio"] = max_ratio;
  report["checks"].push_back(std::move(b));

  GroupoidFunction delta = GroupoidFunction::zero(sd.parent.arrow_count());
  for (Base x : sd.parent.bases()) delta[sd.parent.identity(x)] = 1.0;
  const double dn = random_operator_from(sd, U0, delta, w).norm();
  json d = check("identity_norm", std::abs(dn - 1.0) <= cfg.tol);
  d["norm"] = dn;
  report["checks"].push_back(std::move(d));
  report["measure"] = "counting measure on a finite base; direct integral realized as a direct sum";
  return bound_ok && std::abs(dn - 1.0) <= cfg.tol;
}

inline bool commutant_cmd(const RunConfig& cfg, const Instance& inst, json& report) {
  const SemidirectGroupoid sd = semidirect_of(inst);
  const auto [U0, I] = default_reps(inst, sd);
  std::optional<Base> fiber;
  if (cfg.fiber) fiber = base_at(*cfg.fiber);
  const std::vector<Matrix> gens = m0_generators(sd, U0, fiber);
  EliminationOptions opts;
  opts.max_entries = cfg.commutant_cap;
  const CommutantReport r = commutant(gens, cfg.levels, opts);
  report["total_dimension"] = r.total_dimension;
  report["generators"] = gens.size();
  json c = check("commutes_with_generators", r.max_commutator <= cfg.tol);
  c["commutant_dimension"] = r.commutant_dimension;
  c["max_commutator"] = r.max_commutator;
  report["checks"].push_back(std::move(c));
  if (cfg.levels == 2) {
    json b = check("generators_in_bicommutant", r.max_generator_residual <= cfg.tol);
    b["bicommutant_dimension"] = r.bicommutant_dimension;
    b["max_residual"] = r.max_generator_residual;
    report["checks"].push_back(std::move(b));
    json t = check("third_commutant_dimension", r.tricommutant_dimension == r.commutant_dimension);
    t["third_commutant_dimension"] = r.tricommutant_dimension;
    report["checks"].push_back(std::move(t));
  }
  report["dimension"] = r.dimension;
  return r.passed(cfg.tol);
}

inline bool poincare_cmd(const RunConfig& cfg, const Instance& inst, json& report) {
  if (!inst.gauge) throw ParseError("arguments", "verify-poincare needs --base and --group");
  const PoincareSetup& ps = *inst.gauge;
  const PoincareReport p = verify_poincare_decomposition(ps.gauge.bundle, ps.section, IsoSearchOptions{cfg.iso_cap});
  json d = check("decomposition", p.j_exists && p.J_is_iso && p.i_verified && p.lorentz_is_isotropy &&
                                      p.translation_properties.is_transitive);
  d["arrows"] = p.arrow_count;
  d["lorentz_is_isotropy"] = p.lorentz_is_isotropy;
  d["translations"] = {{"wide", p.translation_properties.is_wide},
                       {"transitive", p.translation_properties.is_transitive},
                       {"closed", p.translation_properties.is_closed}};
  d["j_exists"] = p.j_exists;
  d["J_is_iso"] = p.J_is_iso;
  d["i_verified"] = p.i_verified;
  report["checks"].push_back(std::move(d));
  json s = check("section_identity", p.section_identity_failures == 0 && p.section_identity_checked > 0);
  s["arrows_checked"] = p.section_identity_checked;
  s["failures"] = p.section_identity_failures;
  if (p.section_identity_witness) s["witness"] = ps.gauge.groupoid.arrow_name(*p.section_identity_witness);
  report["checks"].push_back(std::move(s));

  Rng rng(cfg.seed);
  const HaarWeights cw = HaarWeights::counting(ps.sd.carrier);
  double dev = 0.0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const GroupoidFunction f1 = random_function(ps.sd.carrier.arrow_count(), rng);
    const GroupoidFunction f2 = random_function(ps.sd.carrier.arrow_count(), rng);
    dev = std::max(dev, max_abs_diff(poincare_convolve(ps, f1, f2), groupoid_convolve(ps.sd.carrier, f1, f2, cw)));
  }
  json f = check("explicit_formula", dev <= cfg.tol);
  f["trials"] = cfg.trials;
  f["max_deviation"] = dev;
  report["checks"].push_back(std::move(f));
  report["measure"] = "μ and dg replaced by counting measures";
  return p.passed() && dev <= cfg.tol;
}

inline bool convolve_cmd(const RunConfig& cfg, const Instance& inst, json& report) {
  if (cfg.poincare && !inst.gauge) throw ParseError("--poincare", "the explicit formula needs --base and --group");
  const FiniteGroupoid& g = cfg.poincare ? inst.gauge->sd.carrier : inst.parent;
  Rng rng(cfg.seed);
  const GroupoidFunction f1 =
      cfg.f1 ? io::function_from_json(g, io::load(*cfg.f1)) : random_function(g.arrow_count(), rng);
  const GroupoidFunction f2 =
      cfg.f2 ? io::function_from_json(g, io::load(*cfg.f2)) : random_function(g.arrow_count(), rng);
  const GroupoidFunction prod = groupoid_convolve(g, f1, f2, HaarWeights::counting(g));
  bool ok = true;
  if (cfg.poincare) {
    const double dev = max_abs_diff(poincare_convolve(*inst.gauge, f1, f2), prod);
    json f = check("explicit_formula", dev <= cfg.tol);
    f["max_deviation"] = dev;
    report["checks"].push_back(std::move(f));
    ok = dev <= cfg.tol;
  }
  emit(cfg, report, "product", io::function_to_json(g, prod));
  return ok;
}

inline json config_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["tol"] = cfg.tol;
  j["trials"] = cfg.trials;
  if (cfg.command == "commutant") {
    j["levels"] = cfg.levels;
    if (cfg.fiber) j["fiber"] = *cfg.fiber;
  }
  j["iso_cap"] = cfg.iso_cap;
  j["commutant_cap"] = cfg.commutant_cap;
  return j;
}

}  // namespace detail

/// Runs one subcommand. The report carries per-check status, the config
/// (seed included) and a trailing "timing" object, the only field that
/// varies between identical runs.
inline RunResult run(const RunConfig& cfg) {
  using namespace detail;
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  json& report = res.report;
  report["command"] = cfg.command;
  report["config"] = config_json(cfg);
  report["checks"] = json::array();
  try {
    if (!(cfg.tol > 0.0)) throw ParseError("--tol", "tolerance must be positive");
    if (cfg.trials < 1) throw ParseError("--trials", "need at least one trial");
    if (cfg.levels != 1 && cfg.levels != 2) throw ParseError("--levels", "levels must be 1 or 2");
    const Instance inst = load_instance(cfg);
    report["instance"] = inst.description;
    report["instance"]["base_points"] = inst.parent.base_count();
    report["instance"]["arrows"] = inst.parent.arrow_count();
    bool ok = false;
    const std::string& c = cfg.command;
    if (c == "verify-groupoid") ok = verify_groupoid_cmd(cfg, inst, report);
    else if (c == "semidirect") ok = semidirect_cmd(cfg, inst, report);
    else if (c == "quotient") ok = quotient_cmd(cfg, inst, report);
    else if (c == "verify-prop1") ok = prop1_cmd(cfg, inst, report);
    else if (c == "verify-theorem1") ok = theorem1_cmd(cfg, inst, report);
    else if (c == "rep-check") ok = rep_check_cmd(cfg, inst, report);
    else if (c == "random-op") ok = random_op_cmd(cfg, inst, report);
    else if (c == "commutant") ok = commutant_cmd(cfg, inst, report);
    else if (c == "verify-poincare") ok = poincare_cmd(cfg, inst, report);
    else if (c == "convolve") ok = convolve_cmd(cfg, inst, report);
    else throw ParseError("command", "unknown subcommand '" + c + "'");
    res.exit_code = ok ? kPass : kCheckFailed;
  } catch (const InstanceTooLarge& e) {
    res.exit_code = kTooLarge;
    report["error"] = {{"kind", "instance_too_large"}, {"message", e.what()}};
  } catch (const QuotientUndefined& e) {
    res.exit_code = kCheckFailed;
    report["error"] = {{"kind", "quotient_undefined"}, {"message", e.what()}};
  } catch (const ConvergenceError& e) {
    res.exit_code = kCheckFailed;
    report["error"] = {{"kind", "convergence"}, {"message", e.what()}};
  } catch (const ParseError& e) {
    res.exit_code = kBadInput;
    report["error"] = {{"kind", "parse"}, {"where", e.where()}, {"message", e.what()}};
  } catch (const MalformedTable& e) {
    res.exit_code = kBadInput;
    report["error"] = {{"kind", "malformed_table"}, {"message", e.what()}};
  } catch (const InvalidGroup& e) {
    res.exit_code = kBadInput;
    report["error"] = {{"kind", "invalid_group"}, {"message", e.what()}};
  } catch (const PreconditionError& e) {
    res.exit_code = kBadInput;
    report["error"] = {{"kind", "precondition"}, {"message", e.what()}};
  }
  report["status"] = res.exit_code == kPass ? "pass" : "fail";
  report["exit_code"] = res.exit_code;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report["timing"] = {{"wall_seconds", secs}};
  return res;
}

/// The report with timing removed, as compared for determinism.
inline json without_timing(json report) {
  report.erase("timing");
  return report;
}

}  // namespace groupoid::cli
