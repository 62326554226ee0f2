#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "groupoid/commands.hpp"

namespace cli = groupoid::cli;

int main(int argc, char** argv) {
  CLI::App app{"Finite groupoid constructions and their verification suites"};
  app.require_subcommand(1);

  cli::RunConfig cfg;
  std::string report_path;
  std::size_t base = 0, fiber = 0;
  std::string in, translations, group, f1, f2, out;

  for (const std::string& name : cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--in", in, "groupoid description file");
    sub->add_option("--translations", translations, "JSON array of Γ₁ arrow ids (with --in)");
    sub->add_option("--base", base, "number of base points of a gauge instance");
    sub->add_option("--group", group, "built-in group (Z<n>, S3, D4, V4, Q8) or group table file");
    sub->add_option("--section", cfg.section, "identity, random, or a section file");
    sub->add_option("--seed", cfg.seed);
    sub->add_option("--tol", cfg.tol);
    sub->add_option("--trials", cfg.trials);
    sub->add_option("--levels", cfg.levels, "1 = commutant, 2 = bicommutant");
    sub->add_option("--fiber", fiber, "restrict to the block at one base point");
    sub->add_option("--f1", f1, "function file");
    sub->add_option("--f2", f2, "function file");
    sub->add_option("--out", out, "write the constructed table or function here");
    sub->add_option("--report", report_path, "write the JSON report here instead of stdout");
    sub->add_option("--iso-cap", cfg.iso_cap, "arrow cap for isomorphism search");
    sub->add_option("--commutant-cap", cfg.commutant_cap, "cap on working entries of the commutant system");
    sub->add_flag("--poincare", cfg.poincare, "convolve on Γ₀ ⋊ Γ₁ and cross-check the explicit formula");
  }

  try {
    cli::apply_env_caps(cfg);
  } catch (const groupoid::ParseError& e) {
    std::cerr << e.what() << "\n";
    return cli::kBadInput;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kBadInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  if (sub->count("--in")) cfg.in = in;
  if (sub->count("--translations")) cfg.translations = translations;
  if (sub->count("--base")) cfg.base = base;
  if (sub->count("--group")) cfg.group = group;
  if (sub->count("--fiber")) cfg.fiber = fiber;
  if (sub->count("--f1")) cfg.f1 = f1;
  if (sub->count("--f2")) cfg.f2 = f2;
  if (sub->count("--out")) cfg.out = out;

  const cli::RunResult res = cli::run(cfg);
  const std::string text = res.report.dump(2) + "\n";
  if (report_path.empty()) {
    std::cout << text;
  } else {
    try {
      groupoid::io::write_file(report_path, text);
    } catch (const groupoid::ParseError& e) {
      std::cerr << e.what() << "\n";
      return cli::kBadInput;
    }
  }
  if (res.report.contains("error")) std::cerr << res.report["error"]["message"].get<std::string>() << "\n";
  return res.exit_code;
}
