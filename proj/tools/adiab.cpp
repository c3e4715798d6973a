#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "adiab/errors.hpp"
#include "adiab/harness.hpp"

namespace {

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw adiab::InvalidInput("cannot open '" + path + "' for writing");
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adiabatic evolution harness"};
  app.require_subcommand(1);

  std::string example, metric, eps_spec, sweep_eps, out, suite;
  std::vector<std::string> params;
  bool csv = false;
  int threads = 0;

  auto* run = app.add_subcommand("run", "run one gallery example");
  run->add_option("--example", example, "example label")->required();
  run->add_option("--param", params, "k=v overrides")->take_all();
  run->add_option("--eps", eps_spec, "eps grid, e.g. 2^-3:2^-12");
  run->add_option("--out", out, "output JSON path (stdout if absent)");
  run->add_option("--threads", threads, "worker count");

  auto* sw = app.add_subcommand("sweep", "sweep one metric over eps");
  sw->add_option("--example", example, "example label")->required();
  sw->add_option("--metric", metric, "metric name")->required();
  sw->add_option("--eps", sweep_eps, "eps grid")->default_val("2^-3:2^-12");
  sw->add_option("--param", params, "k=v overrides")->take_all();
  sw->add_option("--out", out, "output path (stdout if absent)");
  sw->add_flag("--csv", csv, "two-column eps,value output");
  sw->add_option("--threads", threads, "worker count");

  auto* ck = app.add_subcommand("check", "run a check suite");
  ck->add_option("--suite", suite, "invariants|gallery|rates")
      ->required()
      ->check(CLI::IsMember({"invariants", "gallery", "rates"}));

  auto* ls = app.add_subcommand("list", "list registered examples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      adiab::RunConfig cfg;
      cfg.params = adiab::parse_params(params);
      if (!eps_spec.empty()) cfg.eps = adiab::parse_eps_grid(eps_spec);
      cfg.threads = threads;
      const auto rep = adiab::run_example(example, cfg);
      write_out(out, rep.to_json().dump(2) + "\n");
      std::cerr << example << ": " << rep.verdict << "\n";
      return rep.pass ? 0 : 1;
    }
    if (sw->parsed()) {
      adiab::SweepConfig cfg;
      cfg.params = adiab::parse_params(params);
      cfg.eps = adiab::parse_eps_grid(sweep_eps);
      cfg.threads = threads;
      const auto rep = adiab::sweep(example, metric, cfg);
      write_out(out, csv ? rep.to_csv() : rep.to_json().dump(2) + "\n");
      return rep.failures.empty() ? 0 : 1;
    }
    if (ck->parsed()) {
      bool ok = true;
      for (const auto& c : adiab::run_suite(suite)) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  (" << c.detail << ")\n";
        ok = ok && c.pass;
      }
      return ok ? 0 : 1;
    }
    if (ls->parsed()) {
      for (const auto& l : adiab::example_labels()) std::cout << l << "\n";
      return 0;
    }
  } catch (const adiab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
