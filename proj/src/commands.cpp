#include "quadpid/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "quadpid/simkit.hpp"

namespace quadpid {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CaseSetup {
  StateSpaceModel base;
  StateSpaceModel aug;
  PerformanceSpec perf;
  Matrix q_lqr;
  Matrix r_lqr;
};

CaseSetup make_setup(const RunConfig& cfg) {
  CaseSetup s;
  s.base = base_plant(cfg.plant_case);
  s.aug = augment_with_integrator(s.base, cfg.integrator_row_scale).aug;
  Matrix row(1, static_cast<Eigen::Index>(cfg.perf_state_row.size()));
  for (std::size_t i = 0; i < cfg.perf_state_row.size(); ++i) {
    row(0, static_cast<Eigen::Index>(i)) = cfg.perf_state_row[i];
  }
  s.perf = PerformanceSpec::make(row, cfg.input_weight, cfg.wu_mode);
  const Eigen::Index n = s.aug.n();
  s.q_lqr = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.q_lqr(i, i) = cfg.lqr_q_diag[static_cast<std::size_t>(i)];
  }
  s.r_lqr = Matrix::Constant(1, 1, cfg.lqr_r);
  return s;
}

// Augmented-state row [M L] realizing the PID gains on the base plant.
Matrix ml_row(const PidGains& g, const StateSpaceModel& base) {
  const MnlMatrices mnl = extract_mnl(g, base);
  Matrix k(1, base.n() + 1);
  k.leftCols(base.n()) = mnl.m;
  k.rightCols(1) = mnl.l;
  return k;
}

PidGains benchmark_target(PlantCase c, TuneMethod m) {
  if (c == PlantCase::VELOCITY) {
    return m == TuneMethod::H2 ? PidGains{-1170.8, -1.0, -115.1}
                               : PidGains{-354.1, -1.0, -25.6};
  }
  return m == TuneMethod::H2 ? PidGains{-1370.0, -1.0, -881.7}
                             : PidGains{-192.6, -1.0, -128.7};
}

double deviation_pct(double got, double want) {
  return 100.0 * std::abs(got - want) / std::abs(want);
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::invalid_argument("cannot open " + path.string() +
                                " for writing");
  }
  f << content;
  if (!f) throw std::runtime_error("short write to " + path.string());
}

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json time_or_unbounded(double t) {
  if (std::isfinite(t)) return t;
  return "unbounded";
}

json gains_json(const PidGains& g) {
  return {{"kp", g.k_p}, {"ki", g.k_i}, {"kd", g.k_d}};
}

json benchmark_json(const BenchmarkComparison& cmp) {
  return {{"kp", cmp.target.k_p},
          {"ki", cmp.target.k_i},
          {"kd", cmp.target.k_d},
          {"deviation_pct",
           {{"kp", cmp.dev_kp_pct},
            {"ki", cmp.dev_ki_pct},
            {"kd", cmp.dev_kd_pct}}},
          {"within_5pct", cmp.within_5pct}};
}

json certificate_json(const LmiCertificate& cert) {
  json blocks = json::array();
  for (const auto& [name, value] : cert.residual_blocks) {
    blocks.push_back({{"block", name}, {"max_eigenvalue", value}});
  }
  json doc = {{"kind", cert.which == CertificateKind::QUADRATIC_COST
                           ? "quadratic_cost"
                           : "norm_bound"},
              {"feasible", cert.feasible},
              {"residual_blocks", blocks}};
  if (cert.which == CertificateKind::NORM_BOUND) doc["gamma"] = cert.gamma;
  if (!cert.diagnostic.empty()) doc["diagnostic"] = cert.diagnostic;
  return doc;
}

std::string stats_path(const RunConfig& cfg) {
  std::ostringstream os;
  os << "stats_" << to_string(cfg.plant_case) << "_" << to_string(cfg.method)
     << "_seed" << cfg.dryden.seed << ".json";
  return (fs::path(cfg.output_dir) / os.str()).string();
}

std::string csv_path(const RunConfig& cfg) {
  std::ostringstream os;
  os << "sim_" << to_string(cfg.plant_case) << "_" << to_string(cfg.method)
     << "_seed" << cfg.dryden.seed << ".csv";
  return (fs::path(cfg.output_dir) / os.str()).string();
}

}  // namespace

BenchmarkComparison compare_with_benchmark(const PidGains& g, PlantCase c,
                                           TuneMethod m) {
  BenchmarkComparison cmp;
  cmp.target = benchmark_target(c, m);
  cmp.dev_kp_pct = deviation_pct(g.k_p, cmp.target.k_p);
  cmp.dev_ki_pct = deviation_pct(g.k_i, cmp.target.k_i);
  cmp.dev_kd_pct = deviation_pct(g.k_d, cmp.target.k_d);
  cmp.within_5pct = cmp.dev_kp_pct <= 5.0 && cmp.dev_ki_pct <= 5.0 &&
                    cmp.dev_kd_pct <= 5.0;
  return cmp;
}

TuneResult tune_controller(const RunConfig& cfg) {
  const CaseSetup s = make_setup(cfg);
  TuneResult result;
  if (cfg.method == TuneMethod::H2) {
    result.k_aug = h2_gain(s.aug, s.perf);
  } else {
    result.k_aug = lqr_gain(s.aug, s.q_lqr, s.r_lqr);
  }
  const PidExtraction ex = pid_from_state_gain(result.k_aug, s.base);
  result.gains = ex.gains;
  result.extraction_residual = ex.ls_residual;
  try {
    result.closed_loop_norm = h2_norm(
        close_loop(s.aug, s.perf, FeedbackGain{ml_row(ex.gains, s.base)}));
  } catch (const std::invalid_argument&) {
    // The least-squares reconstruction can destabilize when the projection
    // is lossy; the gains are still reported, with an unbounded norm.
    result.closed_loop_norm = std::numeric_limits<double>::infinity();
  }
  return result;
}

int cmd_tune(const RunConfig& cfg, std::ostream& out) {
  json doc = {{"case", to_string(cfg.plant_case)},
              {"method", to_string(cfg.method)}};

  bool zero_weight = cfg.method == TuneMethod::LQR;
  for (double qi : cfg.lqr_q_diag) zero_weight = zero_weight && qi == 0.0;
  if (zero_weight) {
    doc["kp"] = 0.0;
    doc["ki"] = 0.0;
    doc["kd"] = 0.0;
    doc["residual"] = 0.0;
    doc["h2_norm_closed_loop"] = nullptr;
    doc["diagnostic"] =
        "zero state weight yields zero gains; the loop keeps the open "
        "integrator and is not asymptotically stable";
    const std::string text = doc.dump(2) + "\n";
    out << text;
    std::ostringstream name;
    name << "tune_" << to_string(cfg.plant_case) << "_"
         << to_string(cfg.method) << ".json";
    write_text(fs::path(cfg.output_dir) / name.str(), text);
    return kExitInfeasible;
  }

  const TuneResult r = tune_controller(cfg);
  doc["wu_mode"] = to_string(cfg.wu_mode);
  doc["kp"] = r.gains.k_p;
  doc["ki"] = r.gains.k_i;
  doc["kd"] = r.gains.k_d;
  doc["residual"] = r.extraction_residual;
  if (std::isfinite(r.closed_loop_norm)) {
    doc["h2_norm_closed_loop"] = r.closed_loop_norm;
  } else {
    doc["h2_norm_closed_loop"] = nullptr;
    doc["diagnostic"] =
        "the PID loop rebuilt from the extracted gains is not asymptotically "
        "stable, so its norm is unbounded";
  }
  doc["benchmark"] = benchmark_json(
      compare_with_benchmark(r.gains, cfg.plant_case, cfg.method));

  // The input weight can enter the performance output two ways; when the
  // primary mode misses the benchmark the other mode is reported alongside
  // so the comparison is documented either way.
  if (cfg.method == TuneMethod::H2) {
    RunConfig other = cfg;
    other.wu_mode = cfg.wu_mode == WuMode::WEIGHTED_CHANNEL
                        ? WuMode::SCALED_DU
                        : WuMode::WEIGHTED_CHANNEL;
    const TuneResult r2 = tune_controller(other);
    json alt = {{"wu_mode", to_string(other.wu_mode)},
                {"kp", r2.gains.k_p},
                {"ki", r2.gains.k_i},
                {"kd", r2.gains.k_d},
                {"residual", r2.extraction_residual}};
    if (std::isfinite(r2.closed_loop_norm)) {
      alt["h2_norm_closed_loop"] = r2.closed_loop_norm;
    } else {
      alt["h2_norm_closed_loop"] = nullptr;
      alt["diagnostic"] =
          "the PID loop rebuilt from the extracted gains is not "
          "asymptotically stable, so its norm is unbounded";
    }
    alt["benchmark"] = benchmark_json(
        compare_with_benchmark(r2.gains, cfg.plant_case, cfg.method));
    doc["alternate_mode"] = alt;
  }

  const std::string text = doc.dump(2) + "\n";
  out << text;
  std::ostringstream name;
  name << "tune_" << to_string(cfg.plant_case) << "_" << to_string(cfg.method)
       << ".json";
  write_text(fs::path(cfg.output_dir) / name.str(), text);
  return kExitOk;
}

int cmd_certify(const RunConfig& cfg, const std::optional<PidGains>& gains,
                std::optional<double> gamma, double gamma_factor,
                std::ostream& out) {
  const CaseSetup s = make_setup(cfg);

  PidGains g;
  FeedbackGain certified;
  std::string gain_source;
  if (gains) {
    g = *gains;
    certified.k = ml_row(g, s.base);
    gain_source = "pid_reconstruction";
  } else {
    const TuneResult r = tune_controller(cfg);
    g = r.gains;
    if (cfg.method == TuneMethod::LQR) {
      // The boundary certificate speaks about the synthesis output itself.
      certified = r.k_aug;
      gain_source = "state_feedback";
    } else {
      certified.k = ml_row(g, s.base);
      gain_source = "pid_reconstruction";
    }
  }

  LmiCertificate cert;
  json doc = {{"case", to_string(cfg.plant_case)},
              {"method", to_string(cfg.method)},
              {"gains", gains_json(g)},
              {"certified_gain", gain_source}};
  if (cfg.method == TuneMethod::LQR) {
    cert = certify_lqr_lmi(s.aug, s.q_lqr, s.r_lqr, certified);
  } else {
    double norm = std::numeric_limits<double>::infinity();
    try {
      norm = h2_norm(close_loop(s.aug, s.perf, certified));
      doc["norm"] = norm;
    } catch (const std::invalid_argument&) {
      doc["norm"] = nullptr;  // unstable loop: no finite norm
    }
    const double bound =
        gamma ? *gamma : (std::isfinite(norm) ? gamma_factor * norm : 0.0);
    cert = certify_h2_lmi(s.aug, s.perf, certified, bound);
  }
  doc["certificate"] = certificate_json(cert);

  const std::string text = doc.dump(2) + "\n";
  out << text;
  std::ostringstream name;
  name << "certificate_" << to_string(cfg.plant_case) << "_"
       << to_string(cfg.method) << ".json";
  write_text(fs::path(cfg.output_dir) / name.str(), text);
  return cert.feasible ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const RunConfig& cfg, const std::optional<PidGains>& gains,
                 std::ostream& out) {
  if (cfg.dryden.dt != cfg.sim.dt) {
    throw std::invalid_argument(
        "dryden.dt must equal sim.dt so the wind series is aligned with the "
        "integration grid");
  }
  const PidGains g = gains ? *gains : tune_controller(cfg).gains;

  const auto n_steps =
      static_cast<std::size_t>(std::llround(cfg.sim.t_final / cfg.sim.dt));
  const StateSpaceModel filter = dryden_vertical_filter(cfg.dryden);
  const std::vector<double> wind =
      generate_wind(filter, cfg.dryden.seed, n_steps + 1, cfg.sim.dt);

  SimOptions opt;
  opt.loop.feed_forward_wind = cfg.feed_forward_wind;
  opt.loop.error_side_p = cfg.error_side_p;
  opt.input_trim_ppm = cfg.input_trim_ppm;

  SimTrajectory traj;
  try {
    traj = simulate_step(base_plant(cfg.plant_case), g, wind, cfg.sim.r_step,
                         cfg.sim.dt, cfg.sim.t_final, opt);
  } catch (const DivergenceError& e) {
    json doc = {{"case", to_string(cfg.plant_case)},
                {"method", to_string(cfg.method)},
                {"error", e.what()},
                {"diverged_at_s", e.t_first()}};
    out << doc.dump(2) << "\n";
    return kExitInfeasible;
  }

  std::string csv = "t,r,y,u,w\n";
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    csv += g9(traj.t[k]);
    csv += ',';
    csv += g9(traj.r[k]);
    csv += ',';
    csv += g9(traj.y[k]);
    csv += ',';
    csv += g9(traj.u[k]);
    csv += ',';
    csv += g9(traj.w[k]);
    csv += '\n';
  }
  write_text(csv_path(cfg), csv);

  const InputStats stats = input_stats(traj);
  const StepMetrics metrics = step_metrics(traj);
  json doc = {{"case", to_string(cfg.plant_case)},
              {"method", to_string(cfg.method)},
              {"seed", cfg.dryden.seed},
              {"gains", gains_json(g)},
              {"mean_ppm", stats.mean},
              {"variance_ppm2", stats.variance},
              {"metrics",
               {{"rise_time_s", time_or_unbounded(metrics.rise_time_s)},
                {"overshoot_pct", metrics.overshoot_pct},
                {"settling_time_s",
                 time_or_unbounded(metrics.settling_time_s)}}},
              {"csv", csv_path(cfg)}};
  const std::string text = doc.dump(2) + "\n";
  out << text;
  write_text(stats_path(cfg), text);
  return kExitOk;
}

int cmd_report(const RunConfig& cfg, bool run_inline, std::ostream& out) {
  json rows[2];
  const TuneMethod methods[2] = {TuneMethod::H2, TuneMethod::LQR};
  for (int i = 0; i < 2; ++i) {
    RunConfig mc = cfg;
    mc.method = methods[i];
    const std::string path = stats_path(mc);
    if (!fs::exists(path)) {
      if (!run_inline) {
        out << "missing simulation stats: " << path
            << " (run `simulate` first, or pass --run)\n";
        return kExitUsage;
      }
      std::ostringstream sink;
      const int rc = cmd_simulate(mc, std::nullopt, sink);
      if (rc != kExitOk) return rc;
    }
    std::ifstream f(path);
    if (!f) {
      out << "cannot read " << path << "\n";
      return kExitUsage;
    }
    rows[i] = json::parse(f);
  }

  std::ostringstream table;
  table << "Input comparison -- " << to_string(cfg.plant_case)
        << " case, seed " << cfg.dryden.seed << "\n";
  table << std::left << std::setw(10) << "method" << std::setw(15)
        << "mean (PPM)" << "variance (PPM^2)\n";
  const char* labels[2] = {"H2-PID", "LQR-PID"};
  for (int i = 0; i < 2; ++i) {
    table << std::left << std::setw(10) << labels[i] << std::setw(15)
          << rows[i]["mean_ppm"].get<double>()
          << rows[i]["variance_ppm2"].get<double>() << "\n";
  }
  out << table.str();
  std::ostringstream name;
  name << "report_" << to_string(cfg.plant_case) << "_seed"
       << cfg.dryden.seed << ".txt";
  write_text(fs::path(cfg.output_dir) / name.str(), table.str());
  return kExitOk;
}

}  // namespace quadpid
