// ca_cli.cpp - command-line front end.
//
//   ca_cli run <scenario.json>   one run, final allocation table on stdout
//   ca_cli sweep <spec.json>     one run per capacity value, CSV to disk
//   ca_cli regime <scenario.json> demand/capacity classification report
//   ca_cli table1 --r1 V --r2 V  run the built-in twelve-user scenario
//
// Shared flags: --decay off|exp:h1,h2|rat:h3, --delta V, --max-iters N,
// --trace PATH (run/table1), --seedless (run the scenario twice and require
// bit-identical traces).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "ca/engine.hpp"
#include "ca/io.hpp"
#include "ca/oracle.hpp"

namespace {

struct CommonFlags {
  std::string decay;
  double delta = 0.0;
  int max_iters = 0;
  std::string trace_path;
  bool seedless = false;
  CLI::Option* decay_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* max_iters_opt = nullptr;
};

void add_run_flags(CLI::App* cmd, CommonFlags& flags, bool with_trace) {
  flags.decay_opt = cmd->add_option("--decay", flags.decay,
                                    "off | exp:h1,h2 | rat:h3");
  flags.delta_opt =
      cmd->add_option("--delta", flags.delta, "bid convergence threshold");
  flags.max_iters_opt =
      cmd->add_option("--max-iters", flags.max_iters, "iteration cap");
  if (with_trace)
    cmd->add_option("--trace", flags.trace_path,
                    "write the per-iteration trace CSV here");
  cmd->add_flag("--seedless", flags.seedless,
                "run twice and require bit-identical traces");
}

void apply_flags(ca::Scenario& scenario, const CommonFlags& flags) {
  if (flags.decay_opt && flags.decay_opt->count())
    scenario.settings.decay = ca::parse_decay(flags.decay);
  if (flags.delta_opt && flags.delta_opt->count())
    scenario.settings.delta = flags.delta;
  if (flags.max_iters_opt && flags.max_iters_opt->count())
    scenario.settings.max_iterations = flags.max_iters;
}

int run_scenario(const ca::Scenario& scenario, const CommonFlags& flags) {
  const ca::RunTrace trace = ca::run(scenario);
  if (flags.seedless) {
    const ca::RunTrace again = ca::run(scenario);
    if (!ca::traces_identical(trace, again)) {
      std::cerr << "determinism check failed: repeated run diverged\n";
      return 1;
    }
    std::cerr << "seedless: traces bit-identical across two runs\n";
  }
  if (!flags.trace_path.empty()) ca::emit_trace(trace, flags.trace_path);

  std::vector<int> carrier_ids;
  for (const ca::CarrierSpec& c : scenario.carriers)
    carrier_ids.push_back(c.carrier_id);
  std::sort(carrier_ids.begin(), carrier_ids.end());

  std::cout << "ue_id";
  for (int l : carrier_ids) std::cout << ",r_carrier_" << l;
  std::cout << ",total";
  for (int l : carrier_ids) std::cout << ",p_" << l;
  std::cout << ",iterations,converged\n";

  const std::map<int, double> prices = trace.final_prices();
  for (const auto& [ue, total] : trace.user_totals()) {
    std::cout << ue;
    for (int l : carrier_ids) {
      const auto it = trace.final_rates.find({ue, l});
      std::cout << ','
                << ca::format_g9(it == trace.final_rates.end() ? 0.0
                                                               : it->second);
    }
    std::cout << ',' << ca::format_g9(total);
    for (int l : carrier_ids) std::cout << ',' << ca::format_g9(prices.at(l));
    std::cout << ',' << trace.iterations_used << ','
              << (trace.converged ? "true" : "false") << '\n';
  }
  return 0;
}

std::string class_name(const std::vector<int>& cls) {
  std::string out = "{";
  for (size_t i = 0; i < cls.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(cls[i]);
  }
  return out + "}";
}

int report_regime(const ca::Scenario& scenario) {
  const ca::RegimeReport rep = ca::classify_regime(scenario);
  std::cout << "classification: " << ca::to_string(rep.classification) << '\n';
  for (const auto& [l, sum] : rep.carrier_inflection_sum)
    std::cout << "carrier " << l << ": inflection_sum " << ca::format_g9(sum)
              << " capacity " << ca::format_g9(rep.carrier_capacity.at(l))
              << '\n';
  for (const auto& [cls, sum] : rep.class_inflection_sum)
    std::cout << "class " << class_name(cls) << ": inflection_sum "
              << ca::format_g9(sum) << " reachable_capacity "
              << ca::format_g9(rep.class_capacity.at(cls)) << '\n';
  std::cout << "price_bound: " << ca::format_g9(rep.price_bound) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed utility-proportional-fair rate allocation"};
  app.require_subcommand(1);

  std::string scenario_path, sweep_path, regime_path;
  double r1 = 0.0, r2 = 0.0;
  CommonFlags run_flags, table1_flags, sweep_flags;

  CLI::App* cmd_run = app.add_subcommand("run", "run one scenario file");
  cmd_run->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();
  add_run_flags(cmd_run, run_flags, true);

  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "run a capacity sweep from a spec file");
  cmd_sweep->add_option("spec", sweep_path, "sweep spec JSON file")->required();
  add_run_flags(cmd_sweep, sweep_flags, false);

  CLI::App* cmd_regime =
      app.add_subcommand("regime", "classify a scenario's demand regime");
  cmd_regime->add_option("scenario", regime_path, "scenario JSON file")
      ->required();

  CLI::App* cmd_table1 =
      app.add_subcommand("table1", "run the built-in twelve-user scenario");
  cmd_table1->add_option("--r1", r1, "carrier 1 capacity")->required();
  cmd_table1->add_option("--r2", r2, "carrier 2 capacity")->required();
  add_run_flags(cmd_table1, table1_flags, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      ca::Scenario s = ca::load_scenario(scenario_path);
      apply_flags(s, run_flags);
      return run_scenario(s, run_flags);
    }
    if (cmd_table1->parsed()) {
      ca::Scenario s = ca::table1_scenario(r1, r2);
      apply_flags(s, table1_flags);
      return run_scenario(s, table1_flags);
    }
    if (cmd_regime->parsed()) {
      return report_regime(ca::load_scenario(regime_path));
    }
    if (cmd_sweep->parsed()) {
      ca::SweepSpec spec = ca::load_sweep_spec(sweep_path);
      apply_flags(spec.base, sweep_flags);
      if (sweep_flags.seedless) {
        const ca::RunTrace once = ca::run(spec.base);
        const ca::RunTrace twice = ca::run(spec.base);
        if (!ca::traces_identical(once, twice)) {
          std::cerr << "determinism check failed: repeated run diverged\n";
          return 1;
        }
        std::cerr << "seedless: traces bit-identical across two runs\n";
      }
      const std::vector<ca::SweepRow> rows =
          ca::run_sweep(spec.base, spec.swept_carrier, spec.values);
      std::filesystem::create_directories(spec.output_dir);
      const std::filesystem::path out_path =
          std::filesystem::path(spec.output_dir) / "sweep.csv";
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + out_path.string());
      ca::write_sweep_csv(spec.base, rows, out);
      out.flush();
      if (!out)
        throw std::runtime_error("error while writing " + out_path.string());
      std::cout << "wrote " << out_path.string() << " (" << rows.size()
                << " rows)\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
