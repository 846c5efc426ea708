#pragma once

#include <iosfwd>
#include <optional>

#include "quadpid/pidtune.hpp"
#include "quadpid/runconfig.hpp"

namespace quadpid {

// Exit-code contract shared by every command.
inline constexpr int kExitOk = 0;          // success / feasible
inline constexpr int kExitUsage = 1;       // bad arguments or missing files
inline constexpr int kExitNumerical = 2;   // solver failure
inline constexpr int kExitInfeasible = 3;  // infeasible certificate / unstable

// Reference gain sets the benchmark cases are compared against, and the
// relative deviation of a tuned set from them.
struct BenchmarkComparison {
  PidGains target;
  double dev_kp_pct = 0.0;
  double dev_ki_pct = 0.0;
  double dev_kd_pct = 0.0;
  bool within_5pct = false;
};

BenchmarkComparison compare_with_benchmark(const PidGains& g, PlantCase c,
                                           TuneMethod m);

// Synthesis plus PID extraction for one config.
struct TuneResult {
  PidGains gains;
  FeedbackGain k_aug;          // optimal augmented-state feedback
  double extraction_residual;  // relative least-squares residual
  double closed_loop_norm;     // w->z norm of the PID loop under cfg's perf;
                               // +infinity when that loop is not Hurwitz
};

// Runs the synthesis chain for cfg. Throws on solver failure.
TuneResult tune_controller(const RunConfig& cfg);

// Commands print their primary JSON/table to `out` and write the same
// content under cfg.output_dir; each returns an exit code from the contract
// above instead of throwing for the infeasible/unstable outcomes it owns.
int cmd_tune(const RunConfig& cfg, std::ostream& out);
int cmd_certify(const RunConfig& cfg, const std::optional<PidGains>& gains,
                std::optional<double> gamma, double gamma_factor,
                std::ostream& out);
int cmd_simulate(const RunConfig& cfg, const std::optional<PidGains>& gains,
                 std::ostream& out);
int cmd_report(const RunConfig& cfg, bool run_inline, std::ostream& out);

}  // namespace quadpid
