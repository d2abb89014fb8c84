#pragma once

// Text configuration: `key = value` lines grouped in [geometry], [initial],
// [params] and [run] sections; `#` starts a comment. An optional top-level
// `scenario = <builtin>` selects a base scenario whose fields the remaining
// keys override; without it the geometry and initial crowd must be given.
//
//   [geometry]
//   width = 10
//   height = 6
//   exits = right:3:1                 # side:center:width, comma separated
//   obstacles = circle:8.5:3:0.3, rect:7.5:2.3:9:2.5
//   [initial]
//   region = 1, 1, 5, 5               # x0, y0, x1, y1
//   rho0 = 1

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "crowdflow/errors.hpp"
#include "crowdflow/scenario.hpp"
#include "crowdflow/text.hpp"

namespace crowdflow {

namespace detail {

struct ConfigEntry {
  std::string value;
  std::size_t line = 0;
};

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"", {"scenario", "name"}},
      {"geometry",
       {"origin", "width", "height", "exits", "obstacles", "exterior_depth", "target_h", "refine_factor",
        "refine_margin"}},
      {"initial", {"profile", "region", "rho0", "v0"}},
      {"params",
       {"model", "cost", "hughes_outflow", "v_max", "tau", "rho_max", "p0", "gamma", "alpha", "cfl"}},
      {"run", {"t_max", "mass_fraction", "recompute_every", "snapshot_times", "series_every"}},
  };
  return schema;
}

inline std::string side_name(Side s) {
  switch (s) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "right";
}

class ConfigReader {
 public:
  explicit ConfigReader(std::map<std::string, ConfigEntry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::size_t line(const std::string& key) const { return entries_.at(key).line; }

  std::string_view raw(const std::string& key) const { return entries_.at(key).value; }

  double number(const std::string& key) const {
    auto v = text::parse_double(raw(key));
    if (!v) fail(key, "expected a number");
    return *v;
  }

  long long integer(const std::string& key) const {
    auto v = text::parse_int(raw(key));
    if (!v) fail(key, "expected an integer");
    return *v;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    const auto r = text::trim(raw(key));
    if (r.empty() || r == "none") return out;
    for (auto tok : text::split(r, ',')) {
      auto v = text::parse_double(text::trim(tok));
      if (!v) fail(key, "expected a comma-separated list of numbers");
      out.push_back(*v);
    }
    return out;
  }

  std::vector<std::vector<std::string>> records(const std::string& key) const {
    std::vector<std::vector<std::string>> out;
    const auto r = text::trim(raw(key));
    if (r.empty() || r == "none") return out;
    for (auto tok : text::split(r, ',')) {
      std::vector<std::string> fields;
      for (auto f : text::split(text::trim(tok), ':')) fields.emplace_back(text::trim(f));
      out.push_back(std::move(fields));
    }
    return out;
  }

  double field(const std::string& key, const std::string& f) const {
    auto v = text::parse_double(f);
    if (!v) fail(key, "bad number '" + f + "'");
    return *v;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ParseError(key + ": " + why, line(key));
  }

 private:
  std::map<std::string, ConfigEntry> entries_;
};

}  // namespace detail

/// Parses the configuration text; the resulting scenario is validated.
inline Scenario parse_config(std::string_view src) {
  using detail::ConfigEntry;
  const auto& schema = detail::config_schema();
  std::map<std::string, ConfigEntry> entries;
  std::string section;
  std::size_t lineno = 0;
  std::istringstream in{std::string(src)};
  std::string raw_line;
  while (std::getline(in, raw_line)) {
    ++lineno;
    const auto line = text::trim(text::strip_comment(raw_line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", lineno);
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      if (section.empty() || !schema.count(section)) throw ParseError("unknown section [" + section + "]", lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", lineno);
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    if (!schema.at(section).count(key)) {
      throw ParseError("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"), lineno);
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (entries.count(full)) throw ParseError("duplicate key '" + full + "'", lineno);
    entries[full] = {value, lineno};
  }
  const detail::ConfigReader cfg(std::move(entries));

  Scenario s;
  if (cfg.has("scenario")) {
    try {
      s = builtin_scenario(text::trim(cfg.raw("scenario")));
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), cfg.line("scenario"));
    }
  } else {
    std::vector<std::string> missing;
    for (const char* k : {"geometry.width", "geometry.height", "geometry.exits"}) {
      if (!cfg.has(k)) missing.emplace_back(k);
    }
    const bool strip = cfg.has("initial.profile") && text::trim(cfg.raw("initial.profile")) == "strip";
    if (!strip) {
      for (const char* k : {"initial.region", "initial.rho0"}) {
        if (!cfg.has(k)) missing.emplace_back(k);
      }
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw ParseError("missing required keys: " + list);
    }
    s.name = "custom";
  }
  if (cfg.has("name")) s.name = std::string(cfg.raw("name"));

  auto set = [&](const char* key, double& target) {
    if (cfg.has(key)) target = cfg.number(key);
  };
  auto pair = [&](const char* key, Vec2& target) {
    if (!cfg.has(key)) return;
    const auto v = cfg.numbers(key);
    if (v.size() != 2) cfg.fail(key, "expected two numbers");
    target = {v[0], v[1]};
  };
  auto choice = [&](const char* key, std::initializer_list<std::string_view> options) -> int {
    const auto v = text::trim(cfg.raw(key));
    int k = 0;
    for (auto o : options) {
      if (v == o) return k;
      ++k;
    }
    std::string list;
    for (auto o : options) list += (list.empty() ? "" : ", ") + std::string(o);
    cfg.fail(key, "expected one of " + list);
  };

  auto& g = s.geometry;
  pair("geometry.origin", g.origin);
  set("geometry.width", g.width);
  set("geometry.height", g.height);
  set("geometry.exterior_depth", g.exterior_depth);
  set("geometry.target_h", s.mesh.target_h);
  set("geometry.refine_factor", s.mesh.refine_factor);
  set("geometry.refine_margin", s.mesh.refine_margin);
  if (cfg.has("geometry.exits")) {
    g.exits.clear();
    for (const auto& r : cfg.records("geometry.exits")) {
      if (r.size() != 3) cfg.fail("geometry.exits", "expected side:center:width");
      ExitSegment e;
      if (r[0] == "left") e.side = Side::Left;
      else if (r[0] == "right") e.side = Side::Right;
      else if (r[0] == "bottom") e.side = Side::Bottom;
      else if (r[0] == "top") e.side = Side::Top;
      else cfg.fail("geometry.exits", "unknown side '" + r[0] + "'");
      e.center = cfg.field("geometry.exits", r[1]);
      e.width = cfg.field("geometry.exits", r[2]);
      g.exits.push_back(e);
    }
  }
  if (cfg.has("geometry.obstacles")) {
    g.obstacles.clear();
    for (const auto& r : cfg.records("geometry.obstacles")) {
      const std::string key = "geometry.obstacles";
      if (!r.empty() && r[0] == "circle" && r.size() == 4) {
        g.obstacles.push_back(Circle{{cfg.field(key, r[1]), cfg.field(key, r[2])}, cfg.field(key, r[3])});
      } else if (!r.empty() && r[0] == "rect" && r.size() == 5) {
        g.obstacles.push_back(
            Rect{{cfg.field(key, r[1]), cfg.field(key, r[2])}, {cfg.field(key, r[3]), cfg.field(key, r[4])}});
      } else {
        cfg.fail(key, "expected circle:x:y:r or rect:x0:y0:x1:y1");
      }
    }
  }

  auto& ic = s.initial;
  if (cfg.has("initial.profile")) {
    ic.profile = choice("initial.profile", {"uniform", "strip"}) == 0 ? InitialProfile::Uniform : InitialProfile::Strip;
  }
  if (cfg.has("initial.region")) {
    const auto v = cfg.numbers("initial.region");
    if (v.size() != 4) cfg.fail("initial.region", "expected x0, y0, x1, y1");
    ic.region = {{v[0], v[1]}, {v[2], v[3]}};
  }
  set("initial.rho0", ic.rho0);
  pair("initial.v0", ic.v0);

  auto& p = s.params;
  if (cfg.has("params.model")) {
    p.model = choice("params.model", {"second_order", "hughes"}) == 0 ? ModelKind::SecondOrder : ModelKind::Hughes;
  }
  if (cfg.has("params.cost")) {
    p.cost = choice("params.cost", {"density", "simple"}) == 0 ? CostKind::DensityDriven : CostKind::Simple;
  }
  if (cfg.has("params.hughes_outflow")) {
    p.hughes_outflow =
        choice("params.hughes_outflow", {"paper", "free"}) == 0 ? HughesOutflow::Paper : HughesOutflow::Free;
  }
  set("params.v_max", p.v_max);
  set("params.tau", p.tau);
  set("params.rho_max", p.rho_max);
  set("params.p0", p.p0);
  set("params.gamma", p.gamma);
  set("params.alpha", p.alpha);
  set("params.cfl", p.cfl);

  set("run.t_max", s.stop.t_max);
  set("run.mass_fraction", s.stop.mass_fraction);
  if (cfg.has("run.recompute_every")) s.recompute_every = static_cast<int>(cfg.integer("run.recompute_every"));
  if (cfg.has("run.snapshot_times")) s.output.snapshot_times = cfg.numbers("run.snapshot_times");
  if (cfg.has("run.series_every")) {
    const auto n = cfg.integer("run.series_every");
    if (n < 1) cfg.fail("run.series_every", "must be >= 1");
    s.output.series_every = static_cast<std::size_t>(n);
  }

  try {
    validate(s);
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("invalid geometry: ") + e.what());
  }
  return s;
}

/// Complete, self-contained text form: parse_config(serialize(s)) == s.
inline std::string serialize(const Scenario& s) {
  using text::format_double;
  std::ostringstream os;
  auto list = [](const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : ", ") + format_double(x);
    return out.empty() ? std::string("none") : out;
  };
  os << "name = " << s.name << "\n\n[geometry]\n";
  const auto& g = s.geometry;
  os << "origin = " << format_double(g.origin.x) << ", " << format_double(g.origin.y) << '\n';
  os << "width = " << format_double(g.width) << '\n';
  os << "height = " << format_double(g.height) << '\n';
  os << "exits = ";
  for (std::size_t k = 0; k < g.exits.size(); ++k) {
    const auto& e = g.exits[k];
    os << (k ? ", " : "") << detail::side_name(e.side) << ':' << format_double(e.center) << ':'
       << format_double(e.width);
  }
  os << "\nobstacles = ";
  if (g.obstacles.empty()) os << "none";
  for (std::size_t k = 0; k < g.obstacles.size(); ++k) {
    os << (k ? ", " : "");
    if (const auto* c = std::get_if<Circle>(&g.obstacles[k])) {
      os << "circle:" << format_double(c->center.x) << ':' << format_double(c->center.y) << ':'
         << format_double(c->radius);
    } else {
      const auto& r = std::get<Rect>(g.obstacles[k]);
      os << "rect:" << format_double(r.lo.x) << ':' << format_double(r.lo.y) << ':' << format_double(r.hi.x) << ':'
         << format_double(r.hi.y);
    }
  }
  os << "\nexterior_depth = " << format_double(g.exterior_depth) << '\n';
  os << "target_h = " << format_double(s.mesh.target_h) << '\n';
  os << "refine_factor = " << format_double(s.mesh.refine_factor) << '\n';
  os << "refine_margin = " << format_double(s.mesh.refine_margin) << '\n';

  const auto& ic = s.initial;
  os << "\n[initial]\nprofile = " << (ic.profile == InitialProfile::Uniform ? "uniform" : "strip") << '\n';
  os << "region = " << list({ic.region.lo.x, ic.region.lo.y, ic.region.hi.x, ic.region.hi.y}) << '\n';
  os << "rho0 = " << format_double(ic.rho0) << '\n';
  os << "v0 = " << format_double(ic.v0.x) << ", " << format_double(ic.v0.y) << '\n';

  const auto& p = s.params;
  os << "\n[params]\nmodel = " << (p.model == ModelKind::SecondOrder ? "second_order" : "hughes") << '\n';
  os << "cost = " << (p.cost == CostKind::DensityDriven ? "density" : "simple") << '\n';
  os << "hughes_outflow = " << (p.hughes_outflow == HughesOutflow::Paper ? "paper" : "free") << '\n';
  os << "v_max = " << format_double(p.v_max) << '\n';
  os << "tau = " << format_double(p.tau) << '\n';
  os << "rho_max = " << format_double(p.rho_max) << '\n';
  os << "p0 = " << format_double(p.p0) << '\n';
  os << "gamma = " << format_double(p.gamma) << '\n';
  os << "alpha = " << format_double(p.alpha) << '\n';
  os << "cfl = " << format_double(p.cfl) << '\n';

  os << "\n[run]\nt_max = " << format_double(s.stop.t_max) << '\n';
  os << "mass_fraction = " << format_double(s.stop.mass_fraction) << '\n';
  os << "recompute_every = " << s.recompute_every << '\n';
  os << "snapshot_times = " << list(s.output.snapshot_times) << '\n';
  os << "series_every = " << s.output.series_every << '\n';
  return os.str();
}

}  // namespace crowdflow
