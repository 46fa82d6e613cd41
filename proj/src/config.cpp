#include "orlat/config.hpp"

#include <fstream>
#include <algorithm>
#include <cmath>
#include <sstream>

#define TOML_HEADER_ONLY 1
#include <toml.hpp>

#include "orlat/error.hpp"

namespace orlat {

std::string_view to_string(Process p) noexcept {
  switch (p) {
    case Process::Theta: return "theta";
    case Process::Fgrid: return "fgrid";
    case Process::Branching: return "branching";
    case Process::Sir: return "sir";
    case Process::Contact: return "contact";
    case Process::Couple: return "couple";
    case Process::Gap: return "gap";
    case Process::RwalkCollide: return "rwalk-collide";
    case Process::RwalkBound: return "rwalk-bound";
  }
  return "unknown";
}

std::optional<Process> parse_process(std::string_view name) noexcept {
  for (const Process p : {Process::Theta, Process::Fgrid, Process::Branching, Process::Sir, Process::Contact,
                          Process::Couple, Process::Gap, Process::RwalkCollide, Process::RwalkBound}) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

void reject_unknown(const toml::table& table, std::string_view where, std::initializer_list<std::string_view> known) {
  for (const auto& [key, node] : table) {
    bool ok = false;
    for (const auto k : known) ok = ok || key.str() == k;
    if (!ok) invalid("unknown key '" + std::string(key.str()) + "' in " + std::string(where));
  }
}

double real(const toml::node& node, std::string_view key) {
  if (const auto v = node.value<double>(); v && (node.is_floating_point() || node.is_integer())) return *v;
  invalid(std::string(key) + " must be a number");
}

std::int64_t integer(const toml::node& node, std::string_view key) {
  if (node.is_integer()) return *node.value<std::int64_t>();
  invalid(std::string(key) + " must be an integer");
}

std::uint64_t positive_integer(const toml::node& node, std::string_view key) {
  const auto v = integer(node, key);
  if (v < 1) invalid(std::string(key) + " must be >= 1");
  return static_cast<std::uint64_t>(v);
}

std::uint64_t seed(const toml::node& node, std::string_view key) {
  const auto v = integer(node, key);
  if (v < 0) invalid(std::string(key) + " must be >= 0");
  return static_cast<std::uint64_t>(v);
}

const toml::array& array(const toml::node& node, std::string_view key) {
  if (const auto* a = node.as_array()) return *a;
  invalid(std::string(key) + " must be an array");
}

std::vector<double> real_list(const toml::node& node, std::string_view key) {
  if (!node.is_array()) return {real(node, key)};
  std::vector<double> out;
  for (const auto& item : array(node, key)) out.push_back(real(item, key));
  if (out.empty()) invalid(std::string(key) + " must not be empty");
  return out;
}

std::vector<std::uint32_t> dim_list(const toml::node& node, std::string_view key) {
  std::vector<std::uint32_t> out;
  const auto push = [&](const toml::node& item) {
    const auto v = positive_integer(item, key);
    if (v > 0xFFFFFFFFULL) invalid(std::string(key) + " too large");
    out.push_back(static_cast<std::uint32_t>(v));
  };
  if (node.is_array()) {
    for (const auto& item : array(node, key)) push(item);
  } else {
    push(node);
  }
  if (out.empty()) invalid(std::string(key) + " must not be empty");
  return out;
}

/// A vertex written as its list of unit steps, e.g. [0, 0, 2] = 2e_1 + e_3.
Vertex vertex(const toml::node& node, std::string_view key) {
  std::vector<std::uint32_t> axes;
  for (const auto& item : array(node, key)) {
    const auto a = integer(item, key);
    if (a < 0 || a > 0xFFFFFFFFLL) invalid(std::string(key) + " axes must be non-negative 32-bit integers");
    axes.push_back(static_cast<std::uint32_t>(a));
  }
  return Vertex::from_steps(axes);
}

std::vector<Vertex> vertex_list(const toml::node& node, std::string_view key) {
  std::vector<Vertex> out;
  for (const auto& item : array(node, key)) out.push_back(vertex(item, key));
  return out;
}

RawLaw weight_law(const toml::node& node) {
  const auto* table = node.as_table();
  if (table == nullptr) invalid("weights must be a table {atoms = [[v,p],...], segments = [[lo,hi,p],...]}");
  reject_unknown(*table, "weights", {"atoms", "segments"});
  RawLaw raw;
  if (const auto* atoms = table->get("atoms")) {
    for (const auto& item : array(*atoms, "weights.atoms")) {
      const auto& pair = array(item, "weights.atoms");
      if (pair.size() != 2) invalid("each atom is [value, probability]");
      raw.atoms.push_back({real(*pair.get(0), "atom value"), real(*pair.get(1), "atom probability")});
    }
  }
  if (const auto* segments = table->get("segments")) {
    for (const auto& item : array(*segments, "weights.segments")) {
      const auto& triple = array(item, "weights.segments");
      if (triple.size() != 3) invalid("each segment is [lo, hi, probability]");
      raw.segments.push_back({real(*triple.get(0), "segment lo"), real(*triple.get(1), "segment hi"),
                              real(*triple.get(2), "segment probability")});
    }
  }
  return raw;
}

std::uint32_t check_dims(const ExperimentConfig& c) {
  std::uint32_t max_axis = 0;
  for (const auto& v : c.initial) max_axis = std::max<std::uint32_t>(max_axis, static_cast<std::uint32_t>(v.max_axis() + 1));
  return max_axis;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, Process process) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax error at line " << e.source().begin.line << ": " << e.description();
    invalid(msg.str());
  }
  reject_unknown(root, "config",
                 {"process", "master_seed", "n_runs", "confidence", "lambda", "d", "horizon", "t_max", "pop_cap",
                  "weights", "initial", "root_weight", "out", "quenched_seed", "fgrid", "coupling", "rwalk"});

  ExperimentConfig c;
  c.process = process;
  if (const auto* p = root.get("process")) {
    const auto name = p->value<std::string>();
    if (!name) invalid("process must be a string");
    const bool walk = process == Process::RwalkCollide || process == Process::RwalkBound;
    if (*name != to_string(process) && !(walk && *name == "rwalk")) {
      invalid("config declares process '" + *name + "' but the subcommand is '" + std::string(to_string(process)) + "'");
    }
  }
  // Walk collisions do not involve the weights; every other process needs a law.
  if (const auto* w = root.get("weights")) {
    c.weights_raw = weight_law(*w);
    c.weights = validate(c.weights_raw);
  } else if (process == Process::RwalkCollide) {
    c.weights_raw.atoms = {{1.0, 1.0}};
  } else {
    invalid("missing required key 'weights'");
  }

  if (const auto* n = root.get("master_seed")) c.master_seed = seed(*n, "master_seed");
  if (const auto* n = root.get("n_runs")) c.n_runs = positive_integer(*n, "n_runs");
  if (const auto* n = root.get("confidence")) {
    c.confidence = real(*n, "confidence");
    if (!(c.confidence > 0.0 && c.confidence < 1.0)) invalid("confidence must lie in (0, 1)");
  }
  if (const auto* n = root.get("lambda")) c.lambdas = real_list(*n, "lambda");
  for (const double l : c.lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) invalid("lambda values must be finite and >= 0");
  }
  if (const auto* n = root.get("d")) c.dims = dim_list(*n, "d");

  switch (process) {
    case Process::Branching: c.horizon = 200; c.pop_cap = 100'000; break;
    case Process::Sir: case Process::Contact: c.horizon = 150; c.pop_cap = 50'000; break;
    case Process::RwalkCollide: case Process::RwalkBound: c.horizon = 1000; break;
    default: c.horizon = 150; c.pop_cap = 50'000; break;
  }
  if (const auto* n = root.get("horizon")) c.horizon = positive_integer(*n, "horizon");
  if (const auto* n = root.get("pop_cap")) c.pop_cap = positive_integer(*n, "pop_cap");
  if (const auto* n = root.get("t_max")) {
    c.t_max = real(*n, "t_max");
    if (!(c.t_max > 0.0) || !std::isfinite(c.t_max)) invalid("t_max must be finite and > 0");
  }
  if (const auto* n = root.get("initial")) c.initial = vertex_list(*n, "initial");
  if (const auto* n = root.get("root_weight")) {
    c.root_weight = real(*n, "root_weight");
    if (*c.root_weight < 0.0 || *c.root_weight > c.weights.bound()) invalid("root_weight must lie in [0, M]");
  }
  if (const auto* n = root.get("out")) {
    const auto s = n->value<std::string>();
    if (!s || s->empty()) invalid("out must be a non-empty string");
    c.out_dir = *s;
  }
  if (const auto* n = root.get("quenched_seed")) c.quenched_seed = seed(*n, "quenched_seed");

  if (const auto* n = root.get("fgrid")) {
    const auto* t = n->as_table();
    if (t == nullptr) invalid("[fgrid] must be a table");
    reject_unknown(*t, "[fgrid]", {"grid_points", "tol", "oracle"});
    if (const auto* g = t->get("grid_points")) c.grid_points = static_cast<int>(positive_integer(*g, "grid_points"));
    if (const auto* g = t->get("tol")) c.tol = real(*g, "tol");
    if (const auto* g = t->get("oracle")) {
      if (!g->is_boolean()) invalid("fgrid.oracle must be a boolean");
      c.fgrid_oracle = *g->value<bool>();
    }
  }
  if (const auto* n = root.get("coupling")) {
    const auto* t = n->as_table();
    if (t == nullptr) invalid("[coupling] must be a table");
    reject_unknown(*t, "[coupling]", {"sigma"});
    if (const auto* g = t->get("sigma")) {
      c.sigma = real(*g, "coupling.sigma");
      if (!(*c.sigma > 0.0)) invalid("coupling.sigma must be > 0");
    }
  }
  if (const auto* n = root.get("rwalk")) {
    const auto* t = n->as_table();
    if (t == nullptr) invalid("[rwalk] must be a table");
    reject_unknown(*t, "[rwalk]", {"x", "y", "set"});
    if (const auto* g = t->get("x")) c.walk_x = vertex(*g, "rwalk.x");
    if (const auto* g = t->get("y")) c.walk_y = vertex(*g, "rwalk.y");
    if (const auto* g = t->get("set")) c.bound_set = vertex_list(*g, "rwalk.set");
    if (c.bound_set.empty()) invalid("rwalk.set must not be empty");
  }

  const std::uint32_t needed = check_dims(c);
  for (const auto d : c.dims) {
    if (d < needed) invalid("initial vertices need d >= " + std::to_string(needed));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, Process process) {
  std::ifstream in(path);
  if (!in) invalid("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), process);
}

nlohmann::json weights_echo(const WeightSpec& spec) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : spec.atoms()) atoms.push_back({a.value, a.probability});
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& s : spec.segments()) segments.push_back({s.lo, s.hi, s.probability});
  return {{"atoms", atoms},
          {"segments", segments},
          {"M", spec.bound()},
          {"mean", spec.mean()},
          {"second_moment", spec.second_moment()},
          {"epsilon_gap", spec.has_gap()},
          {"gap", spec.gap()}};
}

nlohmann::json config_echo(const ExperimentConfig& c) {
  const auto vertices = [](const std::vector<Vertex>& vs) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : vs) out.push_back(v.to_string());
    return out;
  };
  nlohmann::json j = {{"process", to_string(c.process)},
                      {"weights", weights_echo(c.weights)},
                      {"lambda", c.lambdas},
                      {"d", c.dims},
                      {"n_runs", c.n_runs},
                      {"confidence", c.confidence},
                      {"master_seed", c.master_seed},
                      {"horizon", c.horizon},
                      {"t_max", c.t_max},
                      {"pop_cap", c.pop_cap},
                      {"initial", vertices(c.initial)},
                      {"grid_points", c.grid_points},
                      {"tol", c.tol},
                      {"rwalk_x", c.walk_x.to_string()},
                      {"rwalk_y", c.walk_y.to_string()},
                      {"rwalk_set", vertices(c.bound_set)}
                      };
  j["root_weight"] = c.root_weight ? nlohmann::json(*c.root_weight) : nlohmann::json(nullptr);
  j["sigma"] = c.sigma ? nlohmann::json(*c.sigma) : nlohmann::json(nullptr);
  j["quenched_seed"] = c.quenched_seed ? nlohmann::json(*c.quenched_seed) : nlohmann::json(nullptr);
  return j;
}

}  // namespace orlat
