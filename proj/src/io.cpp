// io.cpp - JSON scenario/sweep loading, CSV trace and sweep emission.

#include "ca/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ca {

using nlohmann::json;

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

DecayPolicy parse_decay(const std::string& text) {
  try {
    auto number = [](const std::string& s) {
      size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing characters");
      return v;
    };
    if (text == "off") return DecayPolicy::off();
    if (text.rfind("exp:", 0) == 0) {
      const std::string rest = text.substr(4);
      const size_t comma = rest.find(',');
      if (comma == std::string::npos)
        throw std::invalid_argument("missing comma");
      return DecayPolicy::exponential(number(rest.substr(0, comma)),
                                      number(rest.substr(comma + 1)));
    }
    if (text.rfind("rat:", 0) == 0)
      return DecayPolicy::rational(number(text.substr(4)));
    throw std::invalid_argument("unknown form");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad decay '" + text +
                                "' (expected off, exp:h1,h2, or rat:h3)");
  }
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("parse error: ") + e.what());
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where, std::vector<std::string>& viol) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      viol.push_back(where + ": unknown field '" + key + "'");
}

const json* get_field(const json& obj, const char* key,
                      const std::string& where, bool required,
                      std::vector<std::string>& viol) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (required)
      viol.push_back(where + ": missing field '" + std::string(key) + "'");
    return nullptr;
  }
  return &*it;
}

bool get_number(const json& obj, const char* key, const std::string& where,
                bool required, std::vector<std::string>& viol, double& out) {
  const json* f = get_field(obj, key, where, required, viol);
  if (!f) return false;
  if (!f->is_number()) {
    viol.push_back(where + ": field '" + std::string(key) +
                   "' must be a number");
    return false;
  }
  out = f->get<double>();
  return true;
}

bool get_int(const json& obj, const char* key, const std::string& where,
             bool required, std::vector<std::string>& viol, int& out) {
  const json* f = get_field(obj, key, where, required, viol);
  if (!f) return false;
  if (!f->is_number_integer()) {
    viol.push_back(where + ": field '" + std::string(key) +
                   "' must be an integer");
    return false;
  }
  out = f->get<int>();
  return true;
}

bool parse_utility(const json& u, const std::string& where,
                   std::vector<std::string>& viol, UtilityFunction& out) {
  if (!u.is_object()) {
    viol.push_back(where + ": utility must be an object");
    return false;
  }
  const json* type = get_field(u, "type", where, true, viol);
  if (!type || !type->is_string()) {
    if (type) viol.push_back(where + ": utility type must be a string");
    return false;
  }
  const std::string t = type->get<std::string>();
  try {
    if (t == "sigmoidal") {
      check_keys(u, {"type", "a", "b"}, where, viol);
      double a = 0.0, b = 0.0;
      if (!get_number(u, "a", where, true, viol, a) ||
          !get_number(u, "b", where, true, viol, b))
        return false;
      out = UtilityFunction::sigmoidal(a, b);
      return true;
    }
    if (t == "log") {
      check_keys(u, {"type", "k", "r_max"}, where, viol);
      double k = 0.0, r_max = 0.0;
      if (!get_number(u, "k", where, true, viol, k) ||
          !get_number(u, "r_max", where, true, viol, r_max))
        return false;
      out = UtilityFunction::logarithmic(k, r_max);
      return true;
    }
  } catch (const std::invalid_argument& e) {
    viol.push_back(where + ": " + e.what());
    return false;
  }
  viol.push_back(where + ": utility type must be 'sigmoidal' or 'log'");
  return false;
}

Scenario build_scenario(const json& root) {
  std::vector<std::string> viol;
  if (!root.is_object())
    throw ValidationError({"scenario file must hold a JSON object"});
  check_keys(root, {"carriers", "users", "settings"}, "scenario", viol);

  Scenario s;
  const json* carriers = get_field(root, "carriers", "scenario", true, viol);
  if (carriers && !carriers->is_array()) {
    viol.push_back("scenario: 'carriers' must be an array");
    carriers = nullptr;
  }
  if (carriers) {
    int idx = 0;
    for (const json& c : *carriers) {
      const std::string where = "carriers[" + std::to_string(idx++) + "]";
      if (!c.is_object()) {
        viol.push_back(where + ": must be an object");
        continue;
      }
      check_keys(c, {"carrier_id", "capacity"}, where, viol);
      int id = 0;
      double cap = 0.0;
      const bool has_id = get_int(c, "carrier_id", where, true, viol, id);
      const bool has_cap = get_number(c, "capacity", where, true, viol, cap);
      if (has_id && has_cap) s.carriers.push_back(CarrierSpec{id, cap});
    }
  }

  const json* users = get_field(root, "users", "scenario", true, viol);
  if (users && !users->is_array()) {
    viol.push_back("scenario: 'users' must be an array");
    users = nullptr;
  }
  if (users) {
    int idx = 0;
    for (const json& u : *users) {
      const std::string where = "users[" + std::to_string(idx++) + "]";
      if (!u.is_object()) {
        viol.push_back(where + ": must be an object");
        continue;
      }
      check_keys(u, {"ue_id", "utility", "coverage"}, where, viol);
      int id = 0;
      if (!get_int(u, "ue_id", where, true, viol, id)) continue;
      const json* cov = get_field(u, "coverage", where, true, viol);
      std::vector<int> coverage;
      bool cov_ok = cov != nullptr;
      if (cov) {
        if (!cov->is_array()) {
          viol.push_back(where + ": 'coverage' must be an array of integers");
          cov_ok = false;
        } else {
          for (const json& l : *cov) {
            if (!l.is_number_integer()) {
              viol.push_back(where +
                             ": 'coverage' must be an array of integers");
              cov_ok = false;
              break;
            }
            coverage.push_back(l.get<int>());
          }
        }
      }
      const json* util = get_field(u, "utility", where, true, viol);
      UtilityFunction fn = UtilityFunction::logarithmic(1.0, 1.0);
      if (util && parse_utility(*util, where, viol, fn) && cov_ok)
        s.users.push_back(UserSpec{id, fn, std::move(coverage)});
    }
  }

  if (const json* settings =
          get_field(root, "settings", "scenario", false, viol)) {
    const std::string where = "settings";
    if (!settings->is_object()) {
      viol.push_back("scenario: 'settings' must be an object");
    } else {
      check_keys(*settings,
                 {"delta", "max_iterations", "initial_bid", "decay",
                  "solver_tol"},
                 where, viol);
      get_number(*settings, "delta", where, false, viol, s.settings.delta);
      get_int(*settings, "max_iterations", where, false, viol,
              s.settings.max_iterations);
      get_number(*settings, "initial_bid", where, false, viol,
                 s.settings.initial_bid);
      get_number(*settings, "solver_tol", where, false, viol,
                 s.settings.solver_tol);
      if (const json* decay = get_field(*settings, "decay", where, false, viol)) {
        if (!decay->is_string()) {
          viol.push_back("settings: 'decay' must be a string");
        } else {
          try {
            s.settings.decay = parse_decay(decay->get<std::string>());
          } catch (const std::invalid_argument& e) {
            viol.push_back(std::string("settings: ") + e.what());
          }
        }
      }
    }
  }

  if (!viol.empty()) throw ValidationError(std::move(viol));
  validate(s);
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  return build_scenario(parse_json(text));
}

Scenario load_scenario(const std::string& path) {
  return parse_scenario(read_file(path));
}

void emit_trace(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iteration,ue_id,carrier_id,bid,price,rate\n";
  for (const IterationRecord& rec : trace.records) {
    for (const auto& [key, bid] : rec.bids) {
      const double price = rec.prices.at(key.second);
      out << rec.iteration << ',' << key.first << ',' << key.second << ','
          << format_g9(bid) << ',' << format_g9(price) << ','
          << format_g9(bid / price) << '\n';
    }
  }
  out.flush();
  if (!out) throw std::runtime_error("error while writing " + path);
}

std::vector<TraceRow> parse_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "iteration,ue_id,carrier_id,bid,price,rate")
    throw std::runtime_error(path + ": not a trace file (bad header)");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6)
      throw std::runtime_error(path + ": bad trace row '" + line + "'");
    TraceRow row;
    row.iteration = std::stoi(fields[0]);
    row.ue_id = std::stoi(fields[1]);
    row.carrier_id = std::stoi(fields[2]);
    row.bid = std::stod(fields[3]);
    row.price = std::stod(fields[4]);
    row.rate = std::stod(fields[5]);
    rows.push_back(row);
  }
  return rows;
}

SweepSpec load_sweep_spec(const std::string& path) {
  const json root = parse_json(read_file(path));
  std::vector<std::string> viol;
  if (!root.is_object())
    throw ValidationError({"sweep spec must hold a JSON object"});
  check_keys(root,
             {"scenario", "builtin", "r1", "r2", "swept_carrier", "values",
              "output_dir"},
             "sweep", viol);

  SweepSpec spec;
  const json* scenario_ref = get_field(root, "scenario", "sweep", false, viol);
  const json* builtin_ref = get_field(root, "builtin", "sweep", false, viol);
  if ((scenario_ref != nullptr) == (builtin_ref != nullptr)) {
    viol.push_back("sweep: give exactly one of 'scenario' or 'builtin'");
    scenario_ref = builtin_ref = nullptr;  // don't chase either half
  }

  bool have_base = false;
  if (scenario_ref) {
    if (!scenario_ref->is_string()) {
      viol.push_back("sweep: 'scenario' must be a path string");
    } else {
      const std::filesystem::path p(scenario_ref->get<std::string>());
      const std::filesystem::path resolved =
          p.is_absolute() ? p : std::filesystem::path(path).parent_path() / p;
      spec.base = load_scenario(resolved.string());
      have_base = true;
    }
    if (root.contains("r1") || root.contains("r2"))
      viol.push_back("sweep: 'r1'/'r2' apply only to the builtin scenario");
  } else if (builtin_ref) {
    if (!builtin_ref->is_string() ||
        builtin_ref->get<std::string>() != "table1") {
      viol.push_back("sweep: only builtin 'table1' exists");
    } else {
      double r1 = 100.0, r2 = 70.0;
      get_number(root, "r1", "sweep", false, viol, r1);
      get_number(root, "r2", "sweep", false, viol, r2);
      spec.base = table1_scenario(r1, r2);
      have_base = true;
    }
  }

  get_int(root, "swept_carrier", "sweep", true, viol, spec.swept_carrier);
  if (have_base) {
    bool found = false;
    for (const CarrierSpec& c : spec.base.carriers)
      if (c.carrier_id == spec.swept_carrier) found = true;
    if (!found)
      viol.push_back("sweep: swept_carrier " +
                     std::to_string(spec.swept_carrier) +
                     " is not a carrier of the base scenario");
  }

  if (const json* values = get_field(root, "values", "sweep", true, viol)) {
    if (values->is_array()) {
      for (const json& v : *values) {
        if (!v.is_number()) {
          viol.push_back("sweep: 'values' entries must be numbers");
          break;
        }
        spec.values.push_back(v.get<double>());
      }
    } else if (values->is_object()) {
      check_keys(*values, {"from", "to", "step"}, "sweep values", viol);
      double from = 0.0, to = 0.0, step = 0.0;
      if (get_number(*values, "from", "sweep values", true, viol, from) &&
          get_number(*values, "to", "sweep values", true, viol, to) &&
          get_number(*values, "step", "sweep values", true, viol, step)) {
        if (!(step > 0.0) || to < from) {
          viol.push_back("sweep: need step > 0 and to >= from");
        } else {
          for (double v = from; v <= to + 1e-9 * step; v += step)
            spec.values.push_back(v);
        }
      }
    } else {
      viol.push_back("sweep: 'values' must be an array or {from,to,step}");
    }
  }
  if (spec.values.empty()) viol.push_back("sweep: no capacity values");
  for (double v : spec.values)
    if (!std::isfinite(v) || v <= 0.0) {
      viol.push_back("sweep: capacity values must be finite and positive");
      break;
    }

  if (const json* out = get_field(root, "output_dir", "sweep", true, viol)) {
    if (!out->is_string())
      viol.push_back("sweep: 'output_dir' must be a string");
    else
      spec.output_dir = out->get<std::string>();
  }

  if (!viol.empty()) throw ValidationError(std::move(viol));
  return spec;
}

std::vector<SweepRow> run_sweep(const Scenario& base, int swept_carrier,
                                const std::vector<double>& values) {
  validate(base);
  if (values.empty())
    throw std::invalid_argument("run_sweep: no capacity values");
  size_t swept_index = base.carriers.size();
  for (size_t i = 0; i < base.carriers.size(); ++i)
    if (base.carriers[i].carrier_id == swept_carrier) swept_index = i;
  if (swept_index == base.carriers.size())
    throw std::invalid_argument("run_sweep: unknown swept carrier");

  std::vector<int> carrier_ids;
  for (const CarrierSpec& c : base.carriers) carrier_ids.push_back(c.carrier_id);
  std::sort(carrier_ids.begin(), carrier_ids.end());

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SweepRow> rows;
  for (double v : values) {
    Scenario s = base;
    s.carriers[swept_index].capacity = v;
    try {
      const RunTrace trace = run(s);
      const std::map<int, double> prices = trace.final_prices();
      const std::map<int, double> totals = trace.user_totals();
      for (const auto& [ue, total] : totals) {
        SweepRow row;
        row.r_swept = v;
        row.ue_id = ue;
        for (int l : carrier_ids) {
          const auto it = trace.final_rates.find({ue, l});
          row.rates.push_back(it == trace.final_rates.end() ? 0.0
                                                            : it->second);
          row.prices.push_back(prices.at(l));
        }
        row.total = total;
        row.iterations = trace.iterations_used;
        row.converged = trace.converged ? "true" : "false";
        rows.push_back(std::move(row));
      }
    } catch (const std::exception&) {
      for (const UserSpec& u : base.users) {
        SweepRow row;
        row.r_swept = v;
        row.ue_id = u.ue_id;
        row.rates.assign(carrier_ids.size(), nan);
        row.prices.assign(carrier_ids.size(), nan);
        row.total = nan;
        row.iterations = 0;
        row.converged = "failed";
        rows.push_back(std::move(row));
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     return a.r_swept != b.r_swept ? a.r_swept < b.r_swept
                                                   : a.ue_id < b.ue_id;
                   });
  return rows;
}

std::string sweep_header(const Scenario& base) {
  std::vector<int> ids;
  for (const CarrierSpec& c : base.carriers) ids.push_back(c.carrier_id);
  std::sort(ids.begin(), ids.end());
  std::ostringstream out;
  out << "R_swept,ue_id";
  for (int l : ids) out << ",r_carrier_" << l;
  out << ",total";
  for (int l : ids) out << ",p_" << l;
  out << ",iterations,converged";
  return out.str();
}

void write_sweep_csv(const Scenario& base, const std::vector<SweepRow>& rows,
                     std::ostream& out) {
  out << sweep_header(base) << '\n';
  for (const SweepRow& row : rows) {
    out << format_g9(row.r_swept) << ',' << row.ue_id;
    for (double r : row.rates) out << ',' << format_g9(r);
    out << ',' << format_g9(row.total);
    for (double p : row.prices) out << ',' << format_g9(p);
    out << ',' << row.iterations << ',' << row.converged << '\n';
  }
}

}  // namespace ca
