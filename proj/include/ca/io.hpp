// io.hpp - scenario and sweep-spec files, trace and sweep-table emission.
//
// Scenario files are JSON with top-level keys carriers, users, settings;
// utilities are written {"type":"sigmoidal","a":5,"b":10} or
// {"type":"log","k":3,"r_max":100}. Unknown keys are rejected everywhere.
// All emitted numbers carry 9 significant digits.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ca/engine.hpp"
#include "ca/scenario.hpp"

namespace ca {

// %.9g
std::string format_g9(double v);

// "off" | "exp:h1,h2" | "rat:h3" (the CLI --decay syntax, reused in files).
DecayPolicy parse_decay(const std::string& text);

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);

struct TraceRow {
  int iteration;
  int ue_id;
  int carrier_id;
  double bid;
  double price;
  double rate;
};

// Header exactly: iteration,ue_id,carrier_id,bid,price,rate
// One row per covered (ue, carrier) pair per iteration, ordered by
// (iteration, ue_id, carrier_id); rate is bid / that round's price.
void emit_trace(const RunTrace& trace, const std::string& path);
std::vector<TraceRow> parse_trace(const std::string& path);

struct SweepSpec {
  Scenario base;
  int swept_carrier = 0;
  std::vector<double> values;
  std::string output_dir;
};

// Spec file keys: exactly one of "scenario" (path, relative to the spec
// file) or "builtin" ("table1", with optional "r1"/"r2" starting
// capacities); "swept_carrier"; "values" as an array or {from,to,step};
// "output_dir".
SweepSpec load_sweep_spec(const std::string& path);

struct SweepRow {
  double r_swept = 0.0;
  int ue_id = 0;
  std::vector<double> rates;   // per carrier, ascending carrier id
  double total = 0.0;
  std::vector<double> prices;  // per carrier, ascending carrier id
  int iterations = 0;
  std::string converged;       // "true" | "false" | "failed"
};

// One engine run per value; a failing point yields nan-filled rows marked
// "failed" and the sweep continues. Rows come back sorted by
// (capacity value, ue_id).
std::vector<SweepRow> run_sweep(const Scenario& base, int swept_carrier,
                                const std::vector<double>& values);

std::string sweep_header(const Scenario& base);
void write_sweep_csv(const Scenario& base, const std::vector<SweepRow>& rows,
                     std::ostream& out);

}  // namespace ca
