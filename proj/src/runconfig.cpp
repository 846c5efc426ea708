#include "quadpid/runconfig.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace quadpid {

namespace {

using nlohmann::json;

[[noreturn]] void bad_value(const std::string& what) {
  throw std::invalid_argument("config: " + what);
}

// Rejects misspelled keys instead of silently ignoring them.
void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) bad_value(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      bad_value("unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

}  // namespace

std::string to_string(PlantCase c) {
  return c == PlantCase::VELOCITY ? "velocity" : "position";
}

std::string to_string(TuneMethod m) {
  return m == TuneMethod::H2 ? "h2" : "lqr";
}

std::string to_string(WuMode m) {
  return m == WuMode::WEIGHTED_CHANNEL ? "weighted" : "scaled";
}

PlantCase plant_case_from_string(const std::string& s) {
  if (s == "velocity") return PlantCase::VELOCITY;
  if (s == "position") return PlantCase::POSITION;
  bad_value("case must be \"velocity\" or \"position\", got \"" + s + "\"");
}

TuneMethod tune_method_from_string(const std::string& s) {
  if (s == "h2") return TuneMethod::H2;
  if (s == "lqr") return TuneMethod::LQR;
  bad_value("method must be \"h2\" or \"lqr\", got \"" + s + "\"");
}

WuMode wu_mode_from_string(const std::string& s) {
  if (s == "weighted") return WuMode::WEIGHTED_CHANNEL;
  if (s == "scaled") return WuMode::SCALED_DU;
  bad_value("wu_mode must be \"weighted\" or \"scaled\", got \"" + s + "\"");
}

StateSpaceModel base_plant(PlantCase c) {
  return c == PlantCase::VELOCITY ? build_velocity_plant()
                                  : build_position_plant();
}

RunConfig default_run_config(PlantCase c, TuneMethod m) {
  RunConfig cfg;
  cfg.plant_case = c;
  cfg.method = m;
  if (c == PlantCase::VELOCITY) {
    cfg.perf_state_row = {0.0, 0.0, 100.0};
    cfg.input_weight = 0.01;
    cfg.lqr_q_diag = {0.0, 10000.0, 10000.0};
  } else {
    cfg.perf_state_row = {0.0, 0.0, 100.0, 1000.0};
    cfg.input_weight = 0.1;
    cfg.lqr_q_diag = {0.0, 0.0, 1000.0, 10000.0};
  }
  cfg.lqr_r = 1.0;
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad_value(std::string("not valid JSON: ") + e.what());
  }
  check_keys(doc, "config",
             {"case", "method", "perf", "wu_mode", "lqr_q_diag", "lqr_r",
              "dryden", "sim", "loop", "output_dir"});

  const PlantCase c = plant_case_from_string(
      doc.value("case", std::string("velocity")));
  const TuneMethod m =
      tune_method_from_string(doc.value("method", std::string("h2")));
  RunConfig cfg = default_run_config(c, m);

  if (doc.contains("perf")) {
    const json& perf = doc["perf"];
    check_keys(perf, "perf", {"state_row", "input_weight"});
    if (perf.contains("state_row")) {
      cfg.perf_state_row = perf["state_row"].get<std::vector<double>>();
    }
    if (perf.contains("input_weight")) {
      cfg.input_weight = perf["input_weight"].get<double>();
    }
  }
  if (doc.contains("wu_mode")) {
    cfg.wu_mode = wu_mode_from_string(doc["wu_mode"].get<std::string>());
  }
  if (doc.contains("lqr_q_diag")) {
    cfg.lqr_q_diag = doc["lqr_q_diag"].get<std::vector<double>>();
  }
  if (doc.contains("lqr_r")) cfg.lqr_r = doc["lqr_r"].get<double>();

  if (doc.contains("dryden")) {
    const json& d = doc["dryden"];
    check_keys(d, "dryden",
               {"mean_wind_w20", "airspeed_v", "altitude_h", "dt", "seed"});
    if (d.contains("mean_wind_w20")) {
      cfg.dryden.mean_wind_w20 = d["mean_wind_w20"].get<double>();
    }
    if (d.contains("airspeed_v")) {
      cfg.dryden.airspeed_v = d["airspeed_v"].get<double>();
    }
    if (d.contains("altitude_h")) {
      cfg.dryden.altitude_h = d["altitude_h"].get<double>();
    }
    if (d.contains("dt")) cfg.dryden.dt = d["dt"].get<double>();
    if (d.contains("seed")) cfg.dryden.seed = d["seed"].get<std::uint64_t>();
  }
  if (doc.contains("sim")) {
    const json& s = doc["sim"];
    check_keys(s, "sim", {"dt", "t_final", "r_step"});
    if (s.contains("dt")) cfg.sim.dt = s["dt"].get<double>();
    if (s.contains("t_final")) cfg.sim.t_final = s["t_final"].get<double>();
    if (s.contains("r_step")) cfg.sim.r_step = s["r_step"].get<double>();
  }
  if (doc.contains("loop")) {
    const json& l = doc["loop"];
    check_keys(l, "loop",
               {"feed_forward_wind", "error_side_p", "integrator_row_scale",
                "input_trim_ppm"});
    if (l.contains("feed_forward_wind")) {
      cfg.feed_forward_wind = l["feed_forward_wind"].get<bool>();
    }
    if (l.contains("error_side_p")) {
      cfg.error_side_p = l["error_side_p"].get<bool>();
    }
    if (l.contains("integrator_row_scale")) {
      cfg.integrator_row_scale = l["integrator_row_scale"].get<double>();
    }
    if (l.contains("input_trim_ppm")) {
      cfg.input_trim_ppm = l["input_trim_ppm"].get<double>();
    }
  }
  if (doc.contains("output_dir")) {
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }

  // Cross-field checks the commands rely on.
  const std::size_t aug_n = base_plant(cfg.plant_case).a.rows() + 1;
  if (cfg.perf_state_row.size() != aug_n) {
    std::ostringstream os;
    os << "perf.state_row needs " << aug_n << " entries for the "
       << to_string(cfg.plant_case) << " case, got "
       << cfg.perf_state_row.size();
    bad_value(os.str());
  }
  if (cfg.lqr_q_diag.size() != aug_n) {
    std::ostringstream os;
    os << "lqr_q_diag needs " << aug_n << " entries for the "
       << to_string(cfg.plant_case) << " case, got " << cfg.lqr_q_diag.size();
    bad_value(os.str());
  }
  if (!(cfg.input_weight > 0.0)) bad_value("perf.input_weight must be > 0");
  if (!(cfg.lqr_r > 0.0)) bad_value("lqr_r must be > 0");
  for (double qi : cfg.lqr_q_diag) {
    if (qi < 0.0) bad_value("lqr_q_diag entries must be >= 0");
  }
  if (!(cfg.sim.dt > 0.0) || !(cfg.sim.t_final > 0.0)) {
    bad_value("sim.dt and sim.t_final must be > 0");
  }
  if (cfg.integrator_row_scale == 0.0) {
    bad_value("loop.integrator_row_scale must be nonzero");
  }
  return cfg;
}

std::string serialize_run_config(const RunConfig& cfg) {
  json doc;
  doc["case"] = to_string(cfg.plant_case);
  doc["method"] = to_string(cfg.method);
  doc["perf"] = {{"state_row", cfg.perf_state_row},
                 {"input_weight", cfg.input_weight}};
  doc["wu_mode"] = to_string(cfg.wu_mode);
  doc["lqr_q_diag"] = cfg.lqr_q_diag;
  doc["lqr_r"] = cfg.lqr_r;
  doc["dryden"] = {{"mean_wind_w20", cfg.dryden.mean_wind_w20},
                   {"airspeed_v", cfg.dryden.airspeed_v},
                   {"altitude_h", cfg.dryden.altitude_h},
                   {"dt", cfg.dryden.dt},
                   {"seed", cfg.dryden.seed}};
  doc["sim"] = {{"dt", cfg.sim.dt},
                {"t_final", cfg.sim.t_final},
                {"r_step", cfg.sim.r_step}};
  doc["loop"] = {{"feed_forward_wind", cfg.feed_forward_wind},
                 {"error_side_p", cfg.error_side_p},
                 {"integrator_row_scale", cfg.integrator_row_scale},
                 {"input_trim_ppm", cfg.input_trim_ppm}};
  doc["output_dir"] = cfg.output_dir;
  return doc.dump(2) + "\n";
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.plant_case == b.plant_case && a.method == b.method &&
         a.perf_state_row == b.perf_state_row &&
         a.input_weight == b.input_weight && a.wu_mode == b.wu_mode &&
         a.lqr_q_diag == b.lqr_q_diag && a.lqr_r == b.lqr_r &&
         a.dryden.mean_wind_w20 == b.dryden.mean_wind_w20 &&
         a.dryden.airspeed_v == b.dryden.airspeed_v &&
         a.dryden.altitude_h == b.dryden.altitude_h &&
         a.dryden.dt == b.dryden.dt && a.dryden.seed == b.dryden.seed &&
         a.sim.dt == b.sim.dt && a.sim.t_final == b.sim.t_final &&
         a.sim.r_step == b.sim.r_step &&
         a.feed_forward_wind == b.feed_forward_wind &&
         a.error_side_p == b.error_side_p &&
         a.integrator_row_scale == b.integrator_row_scale &&
         a.input_trim_ppm == b.input_trim_ppm &&
         a.output_dir == b.output_dir;
}

}  // namespace quadpid
