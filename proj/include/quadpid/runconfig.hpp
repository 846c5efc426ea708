#pragma once

#include <string>
#include <vector>

#include "quadpid/models.hpp"
#include "quadpid/simkit.hpp"
#include "quadpid/synthesis.hpp"

namespace quadpid {

// Which benchmark loop is being tuned.
enum class PlantCase { VELOCITY, POSITION };
enum class TuneMethod { H2, LQR };

std::string to_string(PlantCase c);
std::string to_string(TuneMethod m);
std::string to_string(WuMode m);
PlantCase plant_case_from_string(const std::string& s);
TuneMethod tune_method_from_string(const std::string& s);
WuMode wu_mode_from_string(const std::string& s);

struct SimWindow {
  double dt = 0.001;     // s
  double t_final = 20.0; // s
  double r_step = 1.0;   // reference step height
};

// One reproducible run: everything a command needs, with defaults embedded
// so the benchmark cases run with no config file at all.
struct RunConfig {
  PlantCase plant_case = PlantCase::VELOCITY;
  TuneMethod method = TuneMethod::H2;

  // Performance output stacked from this row on the augmented state and the
  // scalar input weight, per wu_mode.
  std::vector<double> perf_state_row;
  double input_weight = 0.01;
  WuMode wu_mode = WuMode::WEIGHTED_CHANNEL;

  // Quadratic weights for the LQR method.
  std::vector<double> lqr_q_diag;
  double lqr_r = 1.0;

  DrydenConfig dryden;
  SimWindow sim;

  // Loop wiring and reporting.
  bool feed_forward_wind = false;
  bool error_side_p = false;
  double integrator_row_scale = 1.0;
  // Hover operating-point offset added to reported inputs (PPM), so input
  // statistics are comparable with absolute motor-command levels.
  double input_trim_ppm = kHoverTrimPpm;

  std::string output_dir = ".";
};

// Benchmark defaults for a case/method pair (performance row, input weight,
// LQR weights; everything else at struct defaults).
RunConfig default_run_config(PlantCase c, TuneMethod m);

// JSON round trip. Parsing starts from the defaults of the case/method named
// in the document (so omitted fields keep their benchmark values) and
// rejects unknown keys; serialize always writes every field, so
// parse(serialize(cfg)) == cfg.
RunConfig parse_run_config(const std::string& json_text);
std::string serialize_run_config(const RunConfig& cfg);

bool operator==(const RunConfig& a, const RunConfig& b);

// The unaugmented benchmark plant for a case.
StateSpaceModel base_plant(PlantCase c);

}  // namespace quadpid
