#include "kflow/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "kflow/error.hpp"

namespace kflow {

using nlohmann::json;

const char* to_string(ForcingMode mode) {
  switch (mode) {
    case ForcingMode::none: return "none";
    case ForcingMode::decay: return "decay";
    case ForcingMode::potential: return "potential";
    case ForcingMode::manufactured: return "manufactured";
  }
  return "?";
}

double evaluate(const PotentialRecipe& recipe, const double* x, int axes) {
  double out = 0.0;
  for (const TrigTerm& term : recipe) {
    double phase = 0.0;
    for (int a = 0; a < axes && a < static_cast<int>(term.wave.size()); ++a)
      phase += term.wave[static_cast<std::size_t>(a)] * x[a];
    out += term.amplitude * (term.sine ? std::sin(phase) : std::cos(phase));
  }
  return out;
}

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("unknown key '" + item.key() + "'" +
                        (where.empty() ? std::string() : " in " + where));
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

std::string read_string(const json& j, const char* key, const std::string& fallback,
                        const std::string& where) {
  std::string s = fallback;
  read(j, key, s, where);
  return s;
}

PotentialRecipe read_recipe(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of terms");
  PotentialRecipe out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    const json& t = j[i];
    require_object(t, at);
    check_keys(t, at, {"amplitude", "wave", "sine"});
    TrigTerm term;
    read(t, "amplitude", term.amplitude, at);
    read(t, "wave", term.wave, at);
    read(t, "sine", term.sine, at);
    if (!std::isfinite(term.amplitude)) throw ConfigError(at + ".amplitude: must be finite");
    out.push_back(std::move(term));
  }
  return out;
}

json write_recipe(const PotentialRecipe& recipe) {
  json out = json::array();
  for (const TrigTerm& t : recipe)
    out.push_back({{"amplitude", t.amplitude}, {"wave", t.wave}, {"sine", t.sine}});
  return out;
}

template <class F>
auto translate(const std::string& field, F&& fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

}  // namespace

void validate(const RunConfig& c) {
  const ModelConfig& m = c.model;
  if (m.resolution < 8) throw ConfigError("model.resolution: must be >= 8");
  if (m.kind == ModelKind::periodic_torus) {
    if (m.n != 1 && m.n != 2) throw ConfigError("model.n: torus supports n = 1 or 2");
    for (const TrigTerm& t : m.psi)
      if (static_cast<int>(t.wave.size()) > 2 * m.n)
        throw ConfigError("model.psi: wave vector longer than the number of real axes");
  } else {
    if (m.n < 2) throw ConfigError("model.n: radial model needs n >= 2");
    if (!(m.s_min < m.s_max) || !std::isfinite(m.s_min) || !std::isfinite(m.s_max))
      throw ConfigError("model.s_min: must be finite and below s_max");
    if (!m.psi.empty()) throw ConfigError("model.psi: only the torus takes a psi recipe");
    if (m.profile != "flat" && m.profile != "log_bump" && m.profile != "fubini_study")
      throw ConfigError("model.profile: expected flat, log_bump or fubini_study");
    if (!(m.profile_param >= 0.0)) throw ConfigError("model.profile_param: must be >= 0");
    if (m.profile_order < 1) throw ConfigError("model.profile_order: must be >= 1");
  }
  if (!(c.schedule.horizon > 0.0) || !std::isfinite(c.schedule.horizon))
    throw ConfigError("schedule.horizon: must be finite and > 0");
  if (c.schedule.kind != ScheduleKind::interpolation && !c.schedule.end_potential.empty())
    throw ConfigError("schedule.end_potential: only the interpolation schedule takes one");
  if (c.schedule.kind == ScheduleKind::interpolation && m.kind != ModelKind::periodic_torus)
    throw ConfigError("schedule.kind: interpolation is configured through torus recipes only");
  const ForcingConfig& f = c.forcing;
  if (f.mode == ForcingMode::decay) {
    if (!(f.c1 >= 0.0)) throw ConfigError("forcing.c1: must be >= 0");
    if (!(f.eps > 0.0)) throw ConfigError("forcing.eps: must be > 0");
  }
  if ((f.mode == ForcingMode::potential || f.mode == ForcingMode::manufactured) &&
      m.kind != ModelKind::periodic_torus)
    throw ConfigError("forcing.mode: recipe forcing needs the torus model");
  if (c.omega.source != "forcing") throw ConfigError("omega.source: only 'forcing' is supported");
  if (!(c.t_max >= 0.0) || !std::isfinite(c.t_max)) throw ConfigError("run.t_max: must be >= 0");
  if (!(c.dt_safety > 0.0 && c.dt_safety <= 0.5))
    throw ConfigError("run.dt_safety: must lie in (0, 0.5]");
  if (!(c.tol_w > 0.0)) throw ConfigError("run.tol_w: must be > 0");
  if (!(c.record_interval > 0.0)) throw ConfigError("run.record_interval: must be > 0");
  if (!(c.snapshot_interval > 0.0)) throw ConfigError("run.snapshot_interval: must be > 0");
  if (c.k < 1 || c.p != 2 * c.k + 2) throw ConfigError("run.p: must equal 2k + 2 with k >= 1");
  if (c.output_dir.empty()) throw ConfigError("output.directory: must not be empty");
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  require_object(doc, "config");
  check_keys(doc, "", {"model", "schedule", "forcing", "omega", "run", "output"});
  if (!doc.contains("model")) throw ConfigError("missing model block");

  RunConfig c;
  const json& m = doc["model"];
  require_object(m, "model");
  check_keys(m, "model", {"kind", "n", "resolution", "s_min", "s_max", "profile", "profile_param",
                          "profile_center", "profile_order", "psi"});
  if (!m.contains("kind")) throw ConfigError("model.kind: required");
  const std::string kind = read_string(m, "kind", "", "model");
  if (kind == "periodic_torus") c.model.kind = ModelKind::periodic_torus;
  else if (kind == "radial_plane") c.model.kind = ModelKind::radial_plane;
  else throw ConfigError("model.kind: expected periodic_torus or radial_plane");
  read(m, "n", c.model.n, "model");
  read(m, "resolution", c.model.resolution, "model");
  read(m, "s_min", c.model.s_min, "model");
  read(m, "s_max", c.model.s_max, "model");
  read(m, "profile", c.model.profile, "model");
  read(m, "profile_param", c.model.profile_param, "model");
  read(m, "profile_center", c.model.profile_center, "model");
  read(m, "profile_order", c.model.profile_order, "model");
  if (m.contains("psi")) c.model.psi = read_recipe(m["psi"], "model.psi");

  if (doc.contains("schedule")) {
    const json& s = doc["schedule"];
    require_object(s, "schedule");
    check_keys(s, "schedule", {"kind", "horizon", "end_potential"});
    if (s.contains("kind"))
      c.schedule.kind = translate("schedule.kind", [&] {
        return schedule_kind_from_string(read_string(s, "kind", "", "schedule"));
      });
    read(s, "horizon", c.schedule.horizon, "schedule");
    if (s.contains("end_potential"))
      c.schedule.end_potential = read_recipe(s["end_potential"], "schedule.end_potential");
  }

  if (doc.contains("forcing")) {
    const json& f = doc["forcing"];
    require_object(f, "forcing");
    check_keys(f, "forcing", {"mode", "c1", "eps", "recipe"});
    const std::string mode = read_string(f, "mode", "none", "forcing");
    if (mode == "none") c.forcing.mode = ForcingMode::none;
    else if (mode == "decay") c.forcing.mode = ForcingMode::decay;
    else if (mode == "potential") c.forcing.mode = ForcingMode::potential;
    else if (mode == "manufactured") c.forcing.mode = ForcingMode::manufactured;
    else throw ConfigError("forcing.mode: expected none, decay, potential or manufactured");
    read(f, "c1", c.forcing.c1, "forcing");
    read(f, "eps", c.forcing.eps, "forcing");
    if (f.contains("recipe")) c.forcing.recipe = read_recipe(f["recipe"], "forcing.recipe");
  }

  if (doc.contains("omega")) {
    const json& o = doc["omega"];
    require_object(o, "omega");
    check_keys(o, "omega", {"source"});
    read(o, "source", c.omega.source, "omega");
  }

  if (doc.contains("run")) {
    const json& r = doc["run"];
    require_object(r, "run");
    check_keys(r, "run", {"t_max", "dt_safety", "tol_w", "record_interval", "snapshot_interval",
                          "p", "k", "stepper"});
    read(r, "t_max", c.t_max, "run");
    read(r, "dt_safety", c.dt_safety, "run");
    read(r, "tol_w", c.tol_w, "run");
    read(r, "record_interval", c.record_interval, "run");
    read(r, "snapshot_interval", c.snapshot_interval, "run");
    read(r, "p", c.p, "run");
    read(r, "k", c.k, "run");
    if (r.contains("stepper"))
      c.stepper = translate("run.stepper",
                            [&] { return stepper_from_string(read_string(r, "stepper", "", "run")); });
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    require_object(o, "output");
    check_keys(o, "output", {"directory"});
    read(o, "directory", c.output_dir, "output");
  }

  validate(c);
  return c;
}

std::string config_to_json(const RunConfig& c) {
  json doc;
  doc["model"] = {{"kind", to_string(c.model.kind)},
                  {"n", c.model.n},
                  {"resolution", c.model.resolution},
                  {"s_min", c.model.s_min},
                  {"s_max", c.model.s_max},
                  {"profile", c.model.profile},
                  {"profile_param", c.model.profile_param},
                  {"profile_center", c.model.profile_center},
                  {"profile_order", c.model.profile_order},
                  {"psi", write_recipe(c.model.psi)}};
  doc["schedule"] = {{"kind", to_string(c.schedule.kind)},
                     {"horizon", c.schedule.horizon},
                     {"end_potential", write_recipe(c.schedule.end_potential)}};
  doc["forcing"] = {{"mode", to_string(c.forcing.mode)},
                    {"c1", c.forcing.c1},
                    {"eps", c.forcing.eps},
                    {"recipe", write_recipe(c.forcing.recipe)}};
  doc["omega"] = {{"source", c.omega.source}};
  doc["run"] = {{"t_max", c.t_max},
                {"dt_safety", c.dt_safety},
                {"tol_w", c.tol_w},
                {"record_interval", c.record_interval},
                {"snapshot_interval", c.snapshot_interval},
                {"p", c.p},
                {"k", c.k},
                {"stepper", to_string(c.stepper)}};
  doc["output"] = {{"directory", c.output_dir}};
  return doc.dump(2);
}

BuiltProblem build_problem(const RunConfig& c) {
  validate(c);
  BuiltProblem out;
  const ModelConfig& mc = c.model;
  if (mc.kind == ModelKind::periodic_torus) {
    CoordFn psi;
    const int axes = 2 * mc.n;
    if (!mc.psi.empty()) {
      PotentialRecipe r = mc.psi;
      psi = [r, axes](const double* x) { return evaluate(r, x, axes); };
    }
    out.model = std::make_shared<const ModelGeometry>(ModelGeometry::torus(mc.n, mc.resolution, psi));
  } else {
    out.model = std::make_shared<const ModelGeometry>(ModelGeometry::radial(
        mc.n, mc.resolution, mc.s_min, mc.s_max,
        RadialProfile::named(mc.profile, mc.profile_param, mc.profile_center, mc.profile_order)));
  }
  const ModelGeometry& m = *out.model;
  const int axes = m.grid()->axes();
  auto sample = [&](const PotentialRecipe& r) {
    return m.sample([&r, axes](const double* x) { return evaluate(r, x, axes); });
  };

  ScheduleParams sp;
  sp.horizon = c.schedule.horizon;
  if (c.schedule.kind == ScheduleKind::interpolation)
    sp.sigma_end = m.g0() + complex_hessian(sample(c.schedule.end_potential), m);
  BackgroundPath path = make_schedule(c.schedule.kind, m, sp);

  Forcing forcing = Forcing::zero(m);
  switch (c.forcing.mode) {
    case ForcingMode::none: break;
    case ForcingMode::decay: forcing = forcing_profile(c.forcing.c1, c.forcing.eps, m); break;
    case ForcingMode::potential: forcing = Forcing::fixed(sample(c.forcing.recipe)); break;
    case ForcingMode::manufactured: {
      const HermitianField g1 = m.g0() + complex_hessian(sample(c.forcing.recipe), m);
      GridField f0 = log_det(g1);
      f0 -= m.log_det_g0();
      forcing = Forcing::fixed(std::move(f0));
      break;
    }
  }
  out.problem = make_problem(out.model, std::move(path), std::move(forcing));
  return out;
}

RunOptions run_options(const RunConfig& c) {
  RunOptions o;
  o.t_max = c.t_max;
  o.dt_safety = c.dt_safety;
  o.tol_w = c.tol_w;
  o.record_interval = c.record_interval;
  o.snapshot_interval = c.snapshot_interval;
  o.p = c.p;
  o.k = c.k;
  o.stepper = c.stepper;
  return o;
}

}  // namespace kflow
