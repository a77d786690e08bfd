// qcarnot: batch front end for the harmonic-oscillator heat engine library.
//
// Exit codes: 0 ok, 1 computation error, 2 configuration error. Errors are
// reported on standard error as "<ErrorName>: message".

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "qcarnot/core.hpp"
#include "qcarnot/cycle.hpp"
#include "qcarnot/presets.hpp"
#include "qcarnot/protocols.hpp"
#include "qcarnot/thermo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qcarnot;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCompute = 1;
constexpr int kExitConfig = 2;
constexpr const char* kOutputRootEnv = "QCARNOT_OUTPUT_ROOT";

// ---------------------------------------------------------------------------
// Configuration

struct RunConfig {
  std::string label;  // preset name or config file stem
  std::string preset;
  CycleSpec spec;
  bool strict_carnot = true;
  std::optional<SweepAxis> axis;
  std::vector<double> values;
  std::string output;
  std::size_t jobs = 1;
  LimitCycleOptions limit_cycle;
  json normalized;  // the accepted inputs, used for the manifest and hash
};

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(yaml_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : node) {
        out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      }
      return out;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  // Quoted scalars stay strings; plain ones are tried as number, then bool.
  if (node.Tag() != "!") {
    double d;
    if (YAML::convert<double>::decode(node, d)) return d;
    bool b;
    if (YAML::convert<bool>::decode(node, b)) return b;
  }
  return node.as<std::string>();
}

json read_config_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();
  try {
    if (path.extension() == ".json") return json::parse(text);
    return yaml_to_json(YAML::Load(text));
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  } catch (const YAML::Exception& e) {
    throw ConfigError("invalid YAML in " + path.string() + ": " + e.what());
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a mapping");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError("unknown key '" + key + "' in " + where + " (allowed: " + list + ")");
    }
  }
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

std::vector<double> get_numbers(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + " must be a non-empty list of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + " must contain numbers only");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse '" + item + "' in --values");
    }
  }
  if (out.empty()) throw ConfigError("--values is empty");
  return out;
}

// Builds and validates the run configuration from a preset name, a config
// document, or both (the document overrides the preset).
RunConfig load_config(const std::string& preset_name, const std::string& config_path) {
  RunConfig rc;
  json doc = json::object();
  if (!config_path.empty()) {
    doc = read_config_file(config_path);
    rc.label = fs::path(config_path).stem().string();
  }
  reject_unknown(doc, {"preset", "cycle", "sweep", "output", "jobs", "tolerances"}, "config");

  rc.preset = preset_name;
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) throw ConfigError("config.preset must be a string");
    if (!preset_name.empty() && preset_name != doc["preset"].get<std::string>()) {
      throw ConfigError("--preset and config.preset disagree");
    }
    rc.preset = doc["preset"].get<std::string>();
  }
  if (rc.label.empty()) rc.label = rc.preset.empty() ? "run" : rc.preset;
  if (!rc.preset.empty()) {
    rc.spec = preset(rc.preset);
    rc.strict_carnot = preset_is_strict(rc.preset);
  } else if (!doc.contains("cycle")) {
    throw ConfigError("either --preset or a config with a 'cycle' section is required");
  }

  if (doc.contains("cycle")) {
    const json& c = doc["cycle"];
    const std::string where = "cycle";
    reject_unknown(c, {"kind", "corners", "t_hot_bath", "t_cold_bath", "coupling",
                       "cycle_time", "open_stroke_duration", "adiabat_duration",
                       "t_hot_internal", "t_cold_internal", "mu_magnitude", "gamma_d",
                       "strict_carnot"},
                   where);
    CycleSpec& s = rc.spec;
    if (c.contains("kind")) {
      if (!c["kind"].is_string()) throw ConfigError("cycle.kind must be a string");
      s.kind = cycle_kind_from_string(c["kind"].get<std::string>());
      if (rc.preset.empty()) rc.strict_carnot = s.kind == CycleKind::CarnotShortcut;
    }
    if (c.contains("corners")) {
      const auto w = get_numbers(c["corners"], "cycle.corners");
      if (w.size() != 4) throw ConfigError("cycle.corners needs four frequencies");
      s.omega1 = w[0];
      s.omega2 = w[1];
      s.omega3 = w[2];
      s.omega4 = w[3];
    }
    auto set = [&](const char* key, double& field) {
      if (c.contains(key)) field = get_number(c, key, where);
    };
    set("t_hot_bath", s.t_hot_bath);
    set("t_cold_bath", s.t_cold_bath);
    set("coupling", s.coupling);
    set("open_stroke_duration", s.open_stroke_duration);
    set("adiabat_duration", s.adiabat_duration);
    set("t_hot_internal", s.t_hot_internal);
    set("t_cold_internal", s.t_cold_internal);
    set("mu_magnitude", s.mu_magnitude);
    set("gamma_d", s.gamma_d);
    if (c.contains("strict_carnot")) {
      if (!c["strict_carnot"].is_boolean()) throw ConfigError("cycle.strict_carnot must be true or false");
      rc.strict_carnot = c["strict_carnot"].get<bool>();
    }
    if (c.contains("cycle_time")) {
      if (c.contains("open_stroke_duration") || c.contains("mu_magnitude")) {
        throw ConfigError("cycle.cycle_time conflicts with open_stroke_duration / mu_magnitude");
      }
      const double tau = get_number(c, "cycle_time", where);
      if (!(tau > 0.0)) throw ConfigError("cycle.cycle_time must be positive");
      s = s.with_cycle_time(to_atomic_time(tau));
    }
  }

  if (doc.contains("sweep")) {
    const json& sw = doc["sweep"];
    reject_unknown(sw, {"axis", "values"}, "sweep");
    if (sw.contains("axis")) {
      if (!sw["axis"].is_string()) throw ConfigError("sweep.axis must be a string");
      rc.axis = sweep_axis_from_string(sw["axis"].get<std::string>());
    }
    if (sw.contains("values")) rc.values = get_numbers(sw["values"], "sweep.values");
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ConfigError("config.output must be a string");
    rc.output = doc["output"].get<std::string>();
  }
  if (doc.contains("jobs")) {
    const double j = get_number(doc, "jobs", "config");
    if (!(j >= 1.0) || j != std::floor(j)) throw ConfigError("config.jobs must be a positive integer");
    rc.jobs = static_cast<std::size_t>(j);
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    reject_unknown(t, {"limit_cycle", "ode_abs", "ode_rel", "max_cycles"}, "tolerances");
    if (t.contains("limit_cycle")) rc.limit_cycle.tol = get_number(t, "limit_cycle", "tolerances");
    if (t.contains("ode_abs")) rc.limit_cycle.propagation.tol.abs = get_number(t, "ode_abs", "tolerances");
    if (t.contains("ode_rel")) rc.limit_cycle.propagation.tol.rel = get_number(t, "ode_rel", "tolerances");
    if (t.contains("max_cycles")) {
      const double m = get_number(t, "max_cycles", "tolerances");
      if (!(m >= 1.0)) throw ConfigError("tolerances.max_cycles must be at least 1");
      rc.limit_cycle.max_cycles = static_cast<std::size_t>(m);
    }
  }
  rc.normalized = doc;
  if (!rc.preset.empty()) rc.normalized["preset"] = rc.preset;
  return rc;
}

// Validation and tolerance overrides from the command line, applied before
// any computation.
void finalize(RunConfig& rc, std::optional<double> tol, std::optional<std::size_t> jobs,
              bool validate_spec = true) {
  if (tol) {
    if (!(*tol > 0.0)) throw ConfigError("--tol must be positive");
    rc.limit_cycle.tol = *tol;
  }
  if (jobs) {
    if (*jobs == 0) throw ConfigError("--jobs must be at least 1");
    rc.jobs = *jobs;
  }
  if (!(rc.limit_cycle.tol > 0.0) || !(rc.limit_cycle.propagation.tol.abs > 0.0) ||
      !(rc.limit_cycle.propagation.tol.rel > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (validate_spec) rc.spec.validate(rc.strict_carnot);
}

json tolerances_json(const RunConfig& rc) {
  return {{"limit_cycle", rc.limit_cycle.tol},
          {"max_cycles", rc.limit_cycle.max_cycles},
          {"ode_abs", rc.limit_cycle.propagation.tol.abs},
          {"ode_rel", rc.limit_cycle.propagation.tol.rel},
          {"output_points", rc.limit_cycle.propagation.output_points}};
}

// ---------------------------------------------------------------------------
// Output

fs::path output_dir(const std::string& requested, const std::string& command,
                    const std::string& label) {
  if (!requested.empty()) return requested;
  const char* root = std::getenv(kOutputRootEnv);
  const fs::path base = root && *root ? fs::path(root) : fs::path("qcarnot-out");
  return base / (command + "-" + label);
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

// Writes through a temporary file and renames it into place.
void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + tmp.string());
    os << content;
    if (!os) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Manifest listing inputs, code version, tolerances and the content hash of
// every file written to `dir` (sorted, so the manifest is reproducible).
void write_manifest(const fs::path& dir, const std::string& command, const json& inputs,
                    const json& tolerances) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name != "manifest.json") names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  json files = json::object();
  for (const auto& n : names) files[n] = git_blob_hash(read_file(dir / n));
  const json manifest = {{"tool", "qcarnot"},
                         {"version", std::string(kVersion)},
                         {"command", command},
                         {"inputs", inputs},
                         {"config_hash", git_blob_hash(inputs.dump())},
                         {"tolerances", tolerances},
                         {"files", files}};
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Commands

struct ProtocolArgs {
  std::string kind;
  std::vector<double> numbers;  // omega_i, omega_f[, t_f]
  std::optional<double> mu;
  std::optional<double> bath;
  double coupling = 0.05;
  std::optional<double> internal;
  std::size_t points = kDefaultProtocolPoints;
  std::string out;
};

int cmd_protocol(const ProtocolArgs& a) {
  if (a.numbers.size() < 2 || a.numbers.size() > 3) {
    throw ConfigError("protocol needs omega_initial omega_final [t_f]");
  }
  const double wi = a.numbers[0], wf = a.numbers[1];
  if (!(wi > 0.0) || !(wf > 0.0)) throw ConfigError("frequencies must be positive");
  const std::optional<double> tf =
      a.numbers.size() == 3 ? std::optional<double>(a.numbers[2]) : std::nullopt;
  if (tf && !(*tf > 0.0)) throw ConfigError("t_f must be positive");
  if (a.points < 7) throw ConfigError("--points must be at least 7");
  auto need_tf = [&] {
    if (!tf) throw ConfigError(a.kind + " protocol needs t_f");
    return *tf;
  };
  auto need_bath = [&] {
    if (!a.bath) throw ConfigError(a.kind + " protocol needs --bath");
    BathSpec b{*a.bath, a.coupling};
    b.validate();
    return b;
  };

  json header = {{"kind", a.kind},
                 {"omega_initial", wi},
                 {"omega_final", wf},
                 {"version", std::string(kVersion)}};
  FrequencyProtocol proto;
  if (a.kind == "sta") {
    const double t = need_tf();
    header["t_f"] = t;
    proto = build_sta_protocol(wi, wf, t, a.points).protocol;
  } else if (a.kind == "ste") {
    const double t = need_tf();
    const BathSpec b = need_bath();
    header["t_f"] = t;
    header["bath_temperature"] = b.temperature;
    header["coupling"] = b.coupling;
    proto = build_ste_protocol(wi, wf, t, b, a.points).protocol;
  } else if (a.kind == "ste-nonthermal") {
    const double t = need_tf();
    const BathSpec b = need_bath();
    if (!a.internal) throw ConfigError("ste-nonthermal protocol needs --internal");
    header["t_f"] = t;
    header["bath_temperature"] = b.temperature;
    header["coupling"] = b.coupling;
    header["internal_temperature"] = *a.internal;
    proto = build_ste_nonthermal_protocol(wi, wf, t, *a.internal, b, a.points).protocol;
  } else if (a.kind == "constmu") {
    if (!a.mu) throw ConfigError("constmu protocol needs --mu");
    if (tf) throw ConfigError("constmu protocol takes its duration from --mu, not t_f");
    header["mu"] = *a.mu;
    // The closed form is sampled on the requested grid for output.
    proto = build_constant_mu_protocol(wi, wf, *a.mu).sampled(a.points);
    header["t_f"] = proto.duration();
  } else {
    throw ConfigError("unknown protocol kind '" + a.kind +
                      "' (expected sta, ste, ste-nonthermal or constmu)");
  }
  std::ostringstream os;
  write_protocol(os, proto, header);
  if (a.out.empty() || a.out == "-") {
    std::cout << os.str();
  } else {
    write_atomic(a.out, os.str());
  }
  return kExitOk;
}

int cmd_cycle(RunConfig& rc, const std::string& out) {
  const fs::path dir = output_dir(out.empty() ? rc.output : out, "cycle", rc.label);
  const CycleResult result = run_to_limit_cycle(rc.spec, rc.limit_cycle);
  const CycleLedger ledger = analyze_cycle(result, rc.spec);
  export_cycle_result(result, dir);
  json lj = ledger_json(ledger);
  lj["spec"] = cycle_spec_json(rc.spec);
  write_atomic(dir / "ledger.json", lj.dump(2) + "\n");
  write_manifest(dir, "cycle", rc.normalized, tolerances_json(rc));
  std::cout << rc.label << ": " << to_string(ledger.operational_mode)
            << ", W = " << ledger.total_work << ", P = " << ledger.power
            << ", eta = " << ledger.efficiency << ", " << result.iterations
            << " iterations -> " << dir.string() << "\n";
  return kExitOk;
}

std::vector<SweepRow> run_sweep(const RunConfig& rc, SweepAxis axis,
                                const std::vector<double>& values) {
  SweepOptions opt;
  opt.jobs = rc.jobs;
  opt.limit_cycle = rc.limit_cycle;
  // Every point is validated up front so a bad value is a config error.
  for (double v : values) apply_sweep_value(rc.spec, axis, v).validate(false);
  return sweep(rc.spec, axis, values, opt);
}

int report_failures(const std::vector<SweepRow>& rows, const std::string& label) {
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.ledger) {
      ++failed;
      std::cerr << "warning: " << label << " at " << r.value << ": " << r.error << "\n";
    }
  }
  return failed == rows.size() ? kExitCompute : kExitOk;
}

int cmd_sweep(RunConfig& rc, const std::string& out, const std::string& axis_flag,
              const std::string& values_flag) {
  if (!axis_flag.empty()) rc.axis = sweep_axis_from_string(axis_flag);
  if (!values_flag.empty()) rc.values = parse_value_list(values_flag);
  if (!rc.axis) throw ConfigError("sweep needs --axis or sweep.axis");
  if (rc.values.empty()) throw ConfigError("sweep needs --values or sweep.values");
  rc.normalized["sweep"] = {{"axis", std::string(to_string(*rc.axis))}, {"values", rc.values}};

  const fs::path dir = output_dir(out.empty() ? rc.output : out, "sweep", rc.label);
  const auto rows = run_sweep(rc, *rc.axis, rc.values);
  std::ostringstream csv;
  write_sweep_csv(csv, *rc.axis, rows);
  write_atomic(dir / "sweep.csv", csv.str());
  const json meta = {{"spec_template", cycle_spec_json(rc.spec)},
                     {"axis", std::string(to_string(*rc.axis))},
                     {"values", rc.values},
                     {"config_hash", git_blob_hash(rc.normalized.dump())}};
  write_atomic(dir / "sweep.json", meta.dump(2) + "\n");
  write_manifest(dir, "sweep", rc.normalized, tolerances_json(rc));
  std::cout << rows.size() << " points -> " << (dir / "sweep.csv").string() << "\n";
  return report_failures(rows, rc.label);
}

int cmd_compare(std::vector<RunConfig>& runs, const std::string& out,
                const std::string& values_flag) {
  if (runs.size() < 2) throw ConfigError("compare needs at least two presets or configs");
  const std::vector<double> values =
      values_flag.empty() ? std::vector<double>{} : parse_value_list(values_flag);
  std::string label;
  for (const auto& r : runs) label += (label.empty() ? "" : "+") + r.label;
  const fs::path dir = output_dir(out, "compare", label);

  std::ostringstream table;
  json inputs = json::array();
  int code = kExitOk;
  bool header_done = false;
  for (auto& rc : runs) {
    // Without --values each run is compared at its own cycle time.
    const std::vector<double> taus =
        values.empty() ? std::vector<double>{to_reporting_time(rc.spec.cycle_time())} : values;
    const auto rows = run_sweep(rc, SweepAxis::CycleTime, taus);
    if (report_failures(rows, rc.label) != kExitOk) code = kExitCompute;
    std::ostringstream csv;
    write_sweep_csv(csv, SweepAxis::CycleTime, rows);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    if (!header_done) {
      table << "label,kind," << line << "\n";
      header_done = true;
    }
    while (std::getline(lines, line)) {
      table << rc.label << ',' << to_string(rc.spec.kind) << ',' << line << "\n";
    }
    json in = rc.normalized;
    in["label"] = rc.label;
    inputs.push_back(in);
  }
  write_atomic(dir / "compare.csv", table.str());
  write_manifest(dir, "compare", inputs, tolerances_json(runs.front()));
  std::cout << table.str();
  return code;
}

json spec_diff(const CycleSpec& a, const CycleSpec& b) {
  const json ja = cycle_spec_json(a), jb = cycle_spec_json(b);
  json diff = json::object();
  for (const auto& [key, value] : ja.items()) {
    if (value != jb.at(key)) diff[key] = {{"config", value}, {"preset", jb.at(key)}};
  }
  return diff;
}

// Geometry report. Hard violations are config errors; a broken Carnot corner
// condition on a non-strict spec is a warning.
int cmd_validate(RunConfig& rc, const std::string& out) {
  json report = {{"label", rc.label}, {"spec", cycle_spec_json(rc.spec)}};
  json checks = json::array();
  std::vector<std::string> warnings;

  rc.spec.validate(false);
  checks.push_back({{"check", "ordering, positivity and compression-ratio bound"}, {"ok", true}});
  report["compression_ratio"] = rc.spec.omega1 / rc.spec.omega3;

  if (rc.spec.kind != CycleKind::EndoGlobal) {
    bool corner_ok = true;
    std::string message;
    try {
      rc.spec.validate(true);
    } catch (const ConfigError& e) {
      corner_ok = false;
      message = e.what();
    }
    json c = {{"check", "Carnot corner condition omega3/omega2 = omega4/omega1 = T_c/T_h"},
              {"ok", corner_ok}};
    if (!corner_ok) {
      c["message"] = message;
      warnings.push_back(message);
    }
    checks.push_back(c);
  }

  if (rc.spec.kind == CycleKind::CarnotShortcut || rc.spec.kind == CycleKind::EndoShortcut) {
    const double tc = rc.spec.kind == CycleKind::CarnotShortcut ? rc.spec.t_cold_bath
                                                                : rc.spec.t_cold_internal;
    const double th = rc.spec.kind == CycleKind::CarnotShortcut ? rc.spec.t_hot_bath
                                                                : rc.spec.t_hot_internal;
    std::string w;
    report["ideal_carnot_work"] = ideal_carnot_work(geometry_of(rc.spec), tc, th, &w);
    if (!w.empty()) warnings.push_back(w);
  }

  // Stroke assembly exercises every protocol builder without propagating.
  int code = kExitOk;
  try {
    const auto strokes = assemble_cycle(rc.spec);
    json s = json::array();
    for (const auto& st : strokes) {
      s.push_back({{"name", st.name},
                   {"kind", std::string(to_string(st.kind))},
                   {"duration", st.duration()}});
    }
    checks.push_back({{"check", "stroke assembly"}, {"ok", true}, {"strokes", s}});
  } catch (const Error& e) {
    checks.push_back({{"check", "stroke assembly"},
                      {"ok", false},
                      {"message", std::string(e.name()) + ": " + e.what()}});
    std::cerr << e.name() << ": " << e.what() << "\n";
    code = kExitCompute;
  }
  report["checks"] = checks;

  json diffs = json::object();
  for (const auto& name : preset_names()) {
    const CycleSpec p = preset(name);
    if (p.kind == rc.spec.kind) diffs[name] = spec_diff(rc.spec, p);
  }
  report["preset_diffs"] = diffs;
  report["warnings"] = warnings;

  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  if (!out.empty()) {
    write_atomic(fs::path(out) / "validate.json", text);
    write_manifest(out, "validate", rc.normalized, tolerances_json(rc));
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-time quantum Carnot engines on a harmonic oscillator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string preset_flag, config_flag, out_flag, axis_flag, values_flag;
  std::optional<double> tol_flag;
  std::optional<std::size_t> jobs_flag;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--preset", preset_flag, "Named preset")
        ->check(CLI::IsMember(preset_names()));
    sub->add_option("--config", config_flag, "YAML or JSON run configuration")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_flag,
                    std::string("Output directory (default $") + kOutputRootEnv +
                        "/<command>-<name>)");
    sub->add_option("--tol", tol_flag, "Limit-cycle convergence tolerance");
    sub->add_option("--jobs", jobs_flag, "Parallel sweep points");
  };

  ProtocolArgs pa;
  auto* protocol = app.add_subcommand("protocol", "Build one frequency protocol and print it as CSV");
  protocol->add_option("kind", pa.kind, "sta, ste, ste-nonthermal or constmu")->required();
  protocol->add_option("numbers", pa.numbers, "omega_initial omega_final [t_f]")->required();
  protocol->add_option("--mu", pa.mu, "Adiabatic parameter (constmu)");
  protocol->add_option("--bath", pa.bath, "Bath temperature (ste, ste-nonthermal)");
  protocol->add_option("--coupling", pa.coupling, "Bath coupling")->capture_default_str();
  protocol->add_option("--internal", pa.internal, "Working-medium temperature (ste-nonthermal)");
  protocol->add_option("--points", pa.points, "Grid points")->capture_default_str();
  protocol->add_option("--out", pa.out, "Output file (default standard output)");

  auto* cycle = app.add_subcommand("cycle", "Run one cycle to its limit cycle and export it");
  add_run_flags(cycle);
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter and write a ledger table");
  add_run_flags(sweep_cmd);
  sweep_cmd->add_option("--axis", axis_flag, "cycle_time, dephasing or compression_ratio");
  sweep_cmd->add_option("--values", values_flag, "Comma-separated sweep values");

  std::vector<std::string> compare_presets, compare_configs;
  auto* compare = app.add_subcommand("compare", "Joined ledger table for several cycles");
  compare->add_option("--preset", compare_presets, "Presets to compare (repeatable)")
      ->check(CLI::IsMember(preset_names()));
  compare->add_option("--config", compare_configs, "Configs to compare (repeatable)")
      ->check(CLI::ExistingFile);
  compare->add_option("--out", out_flag, "Output directory");
  compare->add_option("--tol", tol_flag, "Limit-cycle convergence tolerance");
  compare->add_option("--jobs", jobs_flag, "Parallel points per cycle");
  compare->add_option("--values", values_flag, "Cycle times to compare at");

  auto* validate = app.add_subcommand("validate", "Check a configuration without running it");
  add_run_flags(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (protocol->parsed()) return cmd_protocol(pa);
    if (compare->parsed()) {
      std::vector<RunConfig> runs;
      for (const auto& p : compare_presets) runs.push_back(load_config(p, ""));
      for (const auto& c : compare_configs) runs.push_back(load_config("", c));
      for (auto& rc : runs) finalize(rc, tol_flag, jobs_flag);
      return cmd_compare(runs, out_flag, values_flag);
    }
    RunConfig rc = load_config(preset_flag, config_flag);
    if (validate->parsed()) {
      finalize(rc, tol_flag, jobs_flag, false);  // geometry is reported, not enforced
      return cmd_validate(rc, out_flag);
    }
    finalize(rc, tol_flag, jobs_flag);
    if (cycle->parsed()) return cmd_cycle(rc, out_flag);
    if (sweep_cmd->parsed()) return cmd_sweep(rc, out_flag, axis_flag, values_flag);
  } catch (const ConfigError& e) {
    std::cerr << e.name() << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << e.name() << ": " << e.what() << "\n";
    return kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "Error: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitOk;
}
