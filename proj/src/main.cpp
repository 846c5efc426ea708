#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "quadpid/commands.hpp"
#include "quadpid/simkit.hpp"

namespace {

using namespace quadpid;

// Flags shared by every subcommand; values only apply when the user set them.
struct CommonFlags {
  CLI::Option* config = nullptr;
  CLI::Option* plant_case = nullptr;
  CLI::Option* method = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* out_dir = nullptr;
  CLI::Option* wu_mode = nullptr;
  std::string config_path;
  std::string case_name = "velocity";
  std::string method_name = "h2";
  std::uint64_t seed_value = 42;
  std::string out_dir_value = ".";
  std::string wu_mode_name = "weighted";
};

CommonFlags add_common_flags(CLI::App* sub) {
  CommonFlags f;
  f.config = sub->add_option("--config", f.config_path,
                             "JSON run configuration (flags override it)")
                 ->check(CLI::ExistingFile);
  f.plant_case =
      sub->add_option("--case", f.case_name, "Benchmark case")
          ->check(CLI::IsMember({"velocity", "position"}));
  f.method = sub->add_option("--method", f.method_name, "Tuning method")
                 ->check(CLI::IsMember({"h2", "lqr"}));
  f.seed = sub->add_option("--seed", f.seed_value, "Turbulence seed");
  f.out_dir = sub->add_option("--out", f.out_dir_value, "Output directory");
  f.wu_mode = sub->add_option("--wu-mode", f.wu_mode_name,
                              "How the input weight enters the performance "
                              "output")
                  ->check(CLI::IsMember({"weighted", "scaled"}));
  return f;
}

RunConfig build_config(const CommonFlags& f) {
  RunConfig cfg;
  if (f.config->count() > 0) {
    std::ifstream file(f.config_path);
    std::ostringstream text;
    text << file.rdbuf();
    cfg = parse_run_config(text.str());
    // Changing the case swaps in that case's weight defaults: the arrays in
    // the file are sized for the case it names.
    if (f.plant_case->count() > 0) {
      const PlantCase c = plant_case_from_string(f.case_name);
      if (c != cfg.plant_case) {
        const RunConfig d = default_run_config(c, cfg.method);
        cfg.plant_case = c;
        cfg.perf_state_row = d.perf_state_row;
        cfg.input_weight = d.input_weight;
        cfg.lqr_q_diag = d.lqr_q_diag;
      }
    }
    if (f.method->count() > 0) {
      cfg.method = tune_method_from_string(f.method_name);
    }
  } else {
    cfg = default_run_config(plant_case_from_string(f.case_name),
                             tune_method_from_string(f.method_name));
  }
  if (f.seed->count() > 0) cfg.dryden.seed = f.seed_value;
  if (f.out_dir->count() > 0) cfg.output_dir = f.out_dir_value;
  if (f.wu_mode->count() > 0) {
    cfg.wu_mode = wu_mode_from_string(f.wu_mode_name);
  }
  return cfg;
}

// --kp/--ki/--kd come as a triple or not at all.
struct GainFlags {
  CLI::Option* kp = nullptr;
  CLI::Option* ki = nullptr;
  CLI::Option* kd = nullptr;
  PidGains values;
};

GainFlags add_gain_flags(CLI::App* sub) {
  GainFlags f;
  f.kp = sub->add_option("--kp", f.values.k_p, "Proportional gain");
  f.ki = sub->add_option("--ki", f.values.k_i, "Integral gain");
  f.kd = sub->add_option("--kd", f.values.k_d, "Derivative gain");
  return f;
}

std::optional<PidGains> gains_from_flags(const GainFlags& f) {
  const int given = (f.kp->count() > 0) + (f.ki->count() > 0) +
                    (f.kd->count() > 0);
  if (given == 0) return std::nullopt;
  if (given != 3) {
    throw std::invalid_argument(
        "--kp, --ki, --kd must be given together (or not at all)");
  }
  return f.values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "PID tuning for the quadcopter vertical channel: state-space "
      "synthesis, feasibility certificates, and wind-disturbance "
      "simulation"};
  app.require_subcommand(1);

  CLI::App* tune = app.add_subcommand("tune", "Synthesize PID gains");
  CommonFlags tune_flags = add_common_flags(tune);

  CLI::App* certify =
      app.add_subcommand("certify", "Check a feasibility certificate");
  CommonFlags certify_flags = add_common_flags(certify);
  GainFlags certify_gains = add_gain_flags(certify);
  double gamma_factor = 1.001;
  double gamma_value = 0.0;
  CLI::Option* gamma_opt = certify->add_option(
      "--gamma", gamma_value, "Norm bound to certify (default: derived)");
  certify->add_option("--gamma-factor", gamma_factor,
                      "Bound as a multiple of the computed norm");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Run a wind-disturbance step response");
  CommonFlags simulate_flags = add_common_flags(simulate);
  GainFlags simulate_gains = add_gain_flags(simulate);

  CLI::App* report =
      app.add_subcommand("report", "Tabulate input statistics per method");
  CommonFlags report_flags = add_common_flags(report);
  bool run_inline = false;
  report->add_flag("--run", run_inline,
                   "Run missing simulations instead of failing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (tune->parsed()) {
      return cmd_tune(build_config(tune_flags), std::cout);
    }
    if (certify->parsed()) {
      std::optional<double> gamma;
      if (gamma_opt->count() > 0) gamma = gamma_value;
      return cmd_certify(build_config(certify_flags),
                         gains_from_flags(certify_gains), gamma, gamma_factor,
                         std::cout);
    }
    if (simulate->parsed()) {
      return cmd_simulate(build_config(simulate_flags),
                          gains_from_flags(simulate_gains), std::cout);
    }
    return cmd_report(build_config(report_flags), run_inline, std::cout);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
