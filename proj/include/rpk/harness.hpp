// Experiment drivers: wave-packet vs full-equation comparison runs,
// epsilon-convergence sweeps with rate and envelope fits, matrix-invariant
// audits, and the CSV/manifest emission behind the CLI subcommands.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rpk/classical.hpp"
#include "rpk/config.hpp"
#include "rpk/fit.hpp"
#include "rpk/hagedorn.hpp"
#include "rpk/io.hpp"
#include "rpk/packets.hpp"
#include "rpk/spectral.hpp"
#include "rpk/version.hpp"

namespace rpk {

struct CompareOutcome {
  double eps = 0.0;
  std::vector<double> times;
  std::vector<double> errors;     // || psi - phi ||_L2 at snapshot times
  std::vector<double> mass_full;  // discrete mass of psi at snapshot times
  std::vector<double> mass_amp;   // discrete mass of phi at snapshot times
  double full_mass_drift = 0.0;
  double amp_mass_drift = 0.0;
  bool spectral_amplitude = false;
  std::string failure;  // non-empty if the run aborted
  std::vector<ComplexField> psi_fields, phi_fields;  // kept only when requested

  double final_error() const { return errors.empty() ? 0.0 : errors.back(); }
};

namespace detail {

inline std::size_t snap_to_path_index(double t, double dt) {
  return static_cast<std::size_t>(std::llround(t / dt));
}

}  // namespace detail

/// One wave-packet comparison at a fixed eps: build the classical trajectory,
/// propagate the amplitude (closed-form Gaussian in the linear case, spectral
/// otherwise), assemble the packet, solve the full scaled equation, and
/// record L2 errors at the snapshot times.
inline CompareOutcome run_compare(const ExperimentConfig& cfg, double eps,
                                  bool keep_fields = false) {
  CompareOutcome out;
  out.eps = eps;

  const auto v = cfg.potential.build<2>();
  const RotationAxis omega = cfg.rotation();
  const Grid xgrid(cfg.grid_n, cfg.grid_l);
  const Grid ygrid(cfg.amp_grid_n, cfg.amp_grid_l);
  const RVec<2> q0 = cfg.q0_vec<2>(), p0 = cfg.p0_vec<2>();

  if (xgrid.spacing() > std::sqrt(eps) / 4.0)
    throw std::invalid_argument("compare: grid too coarse, need h <= sqrt(eps)/4 (raise N)");

  const double dt_ode = cfg.trajectory_dt();
  auto traj = std::make_shared<Trajectory<2>>(
      integrate_trajectory<2>(q0, p0, v, omega, cfg.T, dt_ode, cfg.overflow_guard));

  const PacketMatrices<2> m0 = cfg.matrices.build<2>();
  PropagationOptions popts{cfg.invariant_warn, cfg.invariant_abort};
  const PacketPath<2> path = propagate_matrices(m0, *traj, popts);

  // Box-size sanity: the packet (width ~ sqrt(eps) * sigma_max(A)) must stay
  // well inside the box along the whole trajectory.
  double width_factor = 1.0;
  for (const auto& m : path.matrices) {
    Eigen::JacobiSVD<CMat<2>> svd(m.A);
    width_factor = std::max(width_factor, svd.singularValues().maxCoeff());
  }
  if (xgrid.half_width < traj->max_position_norm() + 6.0 * std::sqrt(eps) * width_factor)
    throw std::invalid_argument("compare: box too small for the trajectory (raise L)");

  const std::vector<double> snaps = cfg.snapshot_times();

  // Full-equation side.
  SolverSpec full_spec;
  full_spec.mode = cfg.cubic ? SolverMode::full_cubic : SolverMode::full_linear;
  full_spec.eps = eps;
  full_spec.lambda = cfg.lambda;
  full_spec.omega = omega.is_zero() ? 0.0 : omega.planar_rate();
  full_spec.dt = cfg.dt;
  full_spec.T = cfg.T;
  full_spec.potential = v;
  const ComplexField psi0 = initial_data(m0, q0, p0, eps, xgrid);
  SplitStepSolver full_solver(xgrid, full_spec);
  SolveResult full;
  try {
    full = full_solver.solve(psi0, snaps);
  } catch (const SolverAbort& e) {
    throw std::runtime_error("compare (eps = " + fmt_double(eps) + "): " + e.what());
  }
  out.full_mass_drift = full.mass_drift_rel;

  // Amplitude side.
  out.spectral_amplitude = cfg.cubic || cfg.force_spectral;
  std::vector<ComplexField> phi(snaps.size());
  if (!out.spectral_amplitude) {
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      const auto idx = detail::snap_to_path_index(snaps[i], dt_ode);
      const auto& node = traj->states.at(idx);
      phi[i] = gaussian_packet_field(path.matrices.at(idx), frame_from_state(node, eps), xgrid);
    }
  } else {
    SolverSpec amp_spec;
    amp_spec.mode = cfg.cubic ? SolverMode::amplitude_cubic : SolverMode::amplitude_linear;
    amp_spec.lambda = cfg.lambda;
    amp_spec.omega = full_spec.omega;
    amp_spec.dt = cfg.dt;
    amp_spec.T = cfg.T;
    amp_spec.trajectory = traj;
    const ComplexField v0 = gaussian_amplitude_field(m0, ygrid);
    SplitStepSolver amp_solver(ygrid, amp_spec);
    SolveResult amp;
    try {
      amp = amp_solver.solve(v0, snaps);
    } catch (const SolverAbort& e) {
      throw std::runtime_error("compare amplitude (eps = " + fmt_double(eps) + "): " + e.what());
    }
    out.amp_mass_drift = amp.mass_drift_rel;
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      const auto idx = detail::snap_to_path_index(snaps[i], dt_ode);
      phi[i] = assemble(amp.snapshots.at(i), frame_from_state(traj->states.at(idx), eps), xgrid);
    }
  }

  for (std::size_t i = 0; i < snaps.size(); ++i) {
    out.times.push_back(full.times.at(i));
    out.errors.push_back(l2_distance(full.snapshots.at(i), phi[i]));
    out.mass_full.push_back(full.snapshots.at(i).l2_norm());
    out.mass_amp.push_back(phi[i].l2_norm());
  }
  if (keep_fields) {
    out.psi_fields = std::move(full.snapshots);
    out.phi_fields = std::move(phi);
  }
  return out;
}

struct ConvergenceReport {
  std::vector<CompareOutcome> runs;
  std::optional<LineFit> rate;  // on (log eps, log final error)
  std::vector<std::optional<EnvelopeFit>> envelopes;
  std::vector<double> ehrenfest_times;  // largest snapshot time with error below threshold
};

/// Compare across the epsilon list (members run as independent parallel
/// jobs), then fit the log-log rate at final time and per-run exponential
/// envelopes. Failures are recorded per epsilon instead of aborting the sweep.
inline ConvergenceReport run_converge(const ExperimentConfig& cfg, bool keep_fields = false) {
  ConvergenceReport report;
  report.runs.resize(cfg.epsilons.size());

  const unsigned workers =
      std::max(1u, std::min({unsigned(cfg.epsilons.size()), std::thread::hardware_concurrency(),
                             4u}));
  std::vector<std::thread> pool;
  std::mutex next_mutex;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t job;
      {
        std::lock_guard lock(next_mutex);
        if (next >= cfg.epsilons.size()) return;
        job = next++;
      }
      try {
        report.runs[job] = run_compare(cfg, cfg.epsilons[job], keep_fields);
      } catch (const std::exception& e) {
        report.runs[job].eps = cfg.epsilons[job];
        report.runs[job].failure = e.what();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<double> eps_ok, err_ok;
  for (const auto& run : report.runs) {
    if (run.failure.empty() && run.final_error() > 0.0) {
      eps_ok.push_back(run.eps);
      err_ok.push_back(run.final_error());
    }
    report.envelopes.push_back(run.failure.empty() ? fit_envelope(run.times, run.errors)
                                                   : std::nullopt);
    double t_ok = 0.0;
    for (std::size_t i = 0; i < run.times.size(); ++i)
      if (run.errors[i] < cfg.ehrenfest_threshold) t_ok = std::max(t_ok, run.times[i]);
    report.ehrenfest_times.push_back(t_ok);
  }
  if (eps_ok.size() >= 3) report.rate = fit_rate(eps_ok, err_ok);
  return report;
}

// --- invariant audit --------------------------------------------------------

struct AuditRow {
  std::string case_name;
  int matrix_index = -1;  // -1: deterministic case (identity / rejection probe)
  MatrixResiduals max_res;
  bool pass = false;
  std::string note;
};

struct AuditReport {
  std::vector<AuditRow> rows;
  int n_pass = 0;
  int n_fail = 0;
};

namespace detail {

template <int D>
RMat<D> random_symmetric(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RMat<D> m;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) m(i, j) = u(rng);
  return 0.5 * (m + m.transpose());
}

template <int D>
AuditReport audit_invariants_d(const ExperimentConfig& cfg) {
  AuditReport report;
  const auto v = cfg.potential.build<D>();
  const RVec<D> q0 = cfg.q0_vec<D>(), p0 = cfg.p0_vec<D>();
  PropagationOptions popts{cfg.invariant_warn, cfg.invariant_abort};

  std::vector<std::pair<std::string, RotationAxis>> cases;
  cases.emplace_back("no_rotation", RotationAxis());
  if (!cfg.rotation().is_zero()) cases.emplace_back("rotation", cfg.rotation());

  for (const auto& [name, omega] : cases) {
    const auto traj = integrate_trajectory<D>(q0, p0, v, omega, cfg.T, cfg.dt, cfg.overflow_guard);

    auto run_one = [&](const PacketMatrices<D>& m0, int index, const std::string& label) {
      AuditRow row;
      row.case_name = label;
      row.matrix_index = index;
      try {
        const auto path = propagate_matrices(m0, traj, popts);
        row.max_res = path.max_residuals();
        row.pass = row.max_res.max_residual() <= cfg.invariant_warn;
        if (!row.pass) row.note = "residual above tolerance";
      } catch (const std::exception& e) {
        row.pass = false;
        row.note = e.what();
      }
      report.rows.push_back(row);
    };

    run_one(identity_matrices<D>(), -1, name + "/identity");

    std::mt19937_64 rng(cfg.seed);  // same seeded family across cases
    for (int i = 0; i < cfg.audit_matrices; ++i) {
      const RMat<D> c = random_symmetric<D>(rng);
      run_one(perturbed_matrices<D>(c), i, name + "/perturbed");
    }
  }

  // Validation probe: a deliberately corrupted B0 (non-symmetric B A^-1) must
  // be rejected by the constructor; the rejection itself is the pass.
  {
    AuditRow row;
    row.case_name = "constructor_rejection";
    CMat<D> b = CMat<D>::Identity();
    b(0, 1) += cplx(0.0, 0.7);  // asymmetric perturbation
    try {
      (void)make_packet_matrices<D>(CMat<D>::Identity(), b);
      row.pass = false;
      row.note = "corrupted matrices were not rejected";
    } catch (const std::invalid_argument& e) {
      row.pass = true;
      row.note = std::string("rejected: ") + e.what();
    }
    report.rows.push_back(row);
  }

  for (const auto& row : report.rows) (row.pass ? report.n_pass : report.n_fail)++;
  return report;
}

}  // namespace detail

inline AuditReport audit_invariants(const ExperimentConfig& cfg) {
  return cfg.dimension == 3 ? detail::audit_invariants_d<3>(cfg)
                            : detail::audit_invariants_d<2>(cfg);
}

// --- CLI command drivers ----------------------------------------------------

namespace detail {

inline std::vector<std::pair<std::string, std::string>> manifest_head(
    const ExperimentConfig& cfg, const std::string& experiment, const std::string& config_json) {
  return {{"tool", std::string("rpk ") + version},
          {"experiment", experiment},
          {"seed", std::to_string(cfg.seed)},
          {"config", config_json}};
}

template <int D>
void trajectory_cmd_d(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                      const std::string& config_json) {
  const auto v = cfg.potential.build<D>();
  const auto traj = integrate_trajectory<D>(cfg.q0_vec<D>(), cfg.p0_vec<D>(), v, cfg.rotation(),
                                            cfg.T, cfg.dt, cfg.overflow_guard);
  write_trajectory_csv(traj, dir / "trajectory.csv");

  const double e0 = energy(traj.states.front(), v, cfg.rotation());
  double drift = 0.0;
  for (const auto& s : traj.states)
    drift = std::max(drift, std::abs(energy(s, v, cfg.rotation()) - e0));
  auto manifest = manifest_head(cfg, "trajectory", config_json);
  manifest.emplace_back("energy_drift", fmt_double(drift));
  manifest.emplace_back("max_position_norm", fmt_double(traj.max_position_norm()));
  write_manifest(dir, manifest);
}

template <int D>
void gaussian_cmd_d(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                    const std::string& config_json) {
  const auto v = cfg.potential.build<D>();
  const auto traj = integrate_trajectory<D>(cfg.q0_vec<D>(), cfg.p0_vec<D>(), v, cfg.rotation(),
                                            cfg.T, cfg.dt, cfg.overflow_guard);
  PropagationOptions popts{cfg.invariant_warn, cfg.invariant_abort};
  const auto path = propagate_matrices(cfg.matrices.build<D>(), traj, popts);
  write_matrices_csv(path, dir / "matrices.csv");

  const auto mr = path.max_residuals();
  auto manifest = manifest_head(cfg, "gaussian", config_json);
  manifest.emplace_back("max_residual", fmt_double(mr.max_residual()));
  manifest.emplace_back("min_singular", fmt_double(mr.min_singular));
  manifest.emplace_back("min_real_eig", fmt_double(mr.min_real_eig));
  write_manifest(dir, manifest);
}

}  // namespace detail

inline void run_trajectory_cmd(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                               const std::string& config_json) {
  ensure_dir(dir);
  cfg.dimension == 3 ? detail::trajectory_cmd_d<3>(cfg, dir, config_json)
                     : detail::trajectory_cmd_d<2>(cfg, dir, config_json);
}

inline void run_gaussian_cmd(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                             const std::string& config_json) {
  ensure_dir(dir);
  cfg.dimension == 3 ? detail::gaussian_cmd_d<3>(cfg, dir, config_json)
                     : detail::gaussian_cmd_d<2>(cfg, dir, config_json);
}

/// Amplitude-equation run: spectral solve of the effective equation, Sigma^k
/// norm time series, and fitted exponential growth rates (reported, not
/// asserted — no target values exist for the growth constants).
inline void run_amplitude_cmd(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                              const std::string& config_json) {
  ensure_dir(dir);
  const auto v = cfg.potential.build<2>();
  const RotationAxis omega = cfg.rotation();
  const Grid ygrid(cfg.amp_grid_n, cfg.amp_grid_l);

  const double dt_ode = cfg.trajectory_dt();
  auto traj = std::make_shared<Trajectory<2>>(integrate_trajectory<2>(
      cfg.q0_vec<2>(), cfg.p0_vec<2>(), v, omega, cfg.T, dt_ode, cfg.overflow_guard));

  SolverSpec spec;
  spec.mode = cfg.cubic ? SolverMode::amplitude_cubic : SolverMode::amplitude_linear;
  spec.lambda = cfg.lambda;
  spec.omega = omega.is_zero() ? 0.0 : omega.planar_rate();
  spec.dt = cfg.dt;
  spec.T = cfg.T;
  spec.trajectory = traj;

  const ComplexField v0 = gaussian_amplitude_field(cfg.matrices.build<2>(), ygrid);
  SplitStepSolver solver(ygrid, spec);
  const SolveResult res = solver.solve(v0, cfg.snapshot_times());

  CsvWriter csv(dir / "norms.csv", {"t", "mass", "sigma1", "sigma2", "sigma3"});
  std::vector<std::vector<double>> sigma(4);
  for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
    std::vector<double> row{res.times[i], res.snapshots[i].l2_norm()};
    for (int k = 1; k <= 3; ++k) {
      const double s = sigma_norm(res.snapshots[i], k);
      sigma[k].push_back(s);
      row.push_back(s);
    }
    csv.row(row);
  }
  if (cfg.save_fields) {
    ensure_dir(dir / "fields");
    for (std::size_t i = 0; i < res.snapshots.size(); ++i)
      write_snapshot(res.snapshots[i], res.times[i],
                     dir / "fields" / ("v_" + std::to_string(i) + ".rpk"));
  }

  auto manifest = detail::manifest_head(cfg, "amplitude", config_json);
  manifest.emplace_back("mass_drift", fmt_double(res.mass_drift_rel));
  for (int k = 1; k <= 3; ++k) {
    const auto env = fit_envelope(res.times, sigma[k]);
    manifest.emplace_back("sigma" + std::to_string(k) + "_growth_rate",
                          env ? fmt_double(env->rate) : "n/a");
  }
  write_manifest(dir, manifest);
}

namespace detail {

inline void write_compare_outputs(const ExperimentConfig& cfg, const ConvergenceReport& report,
                                  const std::filesystem::path& dir) {
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& run = report.runs[i];
    CsvWriter csv(dir / ("errors_eps" + std::to_string(i) + ".csv"),
                  {"t", "error", "mass_full", "mass_amp"});
    for (std::size_t n = 0; n < run.times.size(); ++n)
      csv.row({run.times[n], run.errors[n], run.mass_full[n], run.mass_amp[n]});
    if (cfg.save_fields && run.failure.empty()) {
      const auto fdir = dir / "fields" / ("eps" + std::to_string(i));
      ensure_dir(fdir);
      for (std::size_t n = 0; n < run.psi_fields.size(); ++n) {
        write_snapshot(run.psi_fields[n], run.times[n],
                       fdir / ("psi_" + std::to_string(n) + ".rpk"));
        write_snapshot(run.phi_fields[n], run.times[n],
                       fdir / ("phi_" + std::to_string(n) + ".rpk"));
      }
    }
  }
}

}  // namespace detail

inline void run_compare_cmd(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                            const std::string& config_json) {
  ensure_dir(dir);
  const ConvergenceReport report = run_converge(cfg, cfg.save_fields);
  detail::write_compare_outputs(cfg, report, dir);
  auto manifest = detail::manifest_head(cfg, "compare", config_json);
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& run = report.runs[i];
    manifest.emplace_back(
        "eps" + std::to_string(i),
        run.failure.empty() ? fmt_double(run.eps) + " final_error " + fmt_double(run.final_error())
                            : fmt_double(run.eps) + " FAILED " + run.failure);
  }
  write_manifest(dir, manifest);
}

inline void run_converge_cmd(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                             const std::string& config_json) {
  ensure_dir(dir);
  const ConvergenceReport report = run_converge(cfg, cfg.save_fields);
  detail::write_compare_outputs(cfg, report, dir);

  {
    CsvWriter csv(dir / "report.csv",
                  {"eps", "final_error", "envelope_C", "envelope_r2", "envelope_n", "ehrenfest_t",
                   "mass_drift_full", "mass_drift_amp"});
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
      const auto& run = report.runs[i];
      const auto& env = report.envelopes[i];
      csv.row({run.eps, run.final_error(), env ? env->rate : 0.0, env ? env->r2 : 0.0,
               env ? double(env->n_used) : 0.0, report.ehrenfest_times[i], run.full_mass_drift,
               run.amp_mass_drift});
    }
  }
  {
    CsvWriter csv(dir / "fit.csv", {"slope", "intercept", "ci95_halfwidth", "r2", "n"});
    if (report.rate)
      csv.row({report.rate->slope, report.rate->intercept, report.rate->ci95_halfwidth(),
               report.rate->r2, double(report.rate->n)});
  }

  auto manifest = detail::manifest_head(cfg, "converge", config_json);
  if (report.rate) {
    manifest.emplace_back("rate_slope", fmt_double(report.rate->slope));
    manifest.emplace_back("rate_ci95", fmt_double(report.rate->ci95_halfwidth()));
  } else {
    manifest.emplace_back("rate_slope", "n/a (needs >= 3 successful runs)");
  }
  for (std::size_t i = 0; i < report.runs.size(); ++i)
    if (!report.runs[i].failure.empty())
      manifest.emplace_back("eps" + std::to_string(i) + "_failure", report.runs[i].failure);
  write_manifest(dir, manifest);
}

inline void run_audit_cmd(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                          const std::string& config_json) {
  ensure_dir(dir);
  const AuditReport report = audit_invariants(cfg);
  CsvWriter csv(dir / "audit.csv",
                {"case", "matrix_index", "res_symmetry", "res_F", "res_G", "res_Re",
                 "res_sqrt_det", "min_singular", "min_real_eig", "pass", "note"});
  for (const auto& row : report.rows)
    csv.raw_row({row.case_name, std::to_string(row.matrix_index), fmt_double(row.max_res.symmetry),
                 fmt_double(row.max_res.f_invariant), fmt_double(row.max_res.g_invariant),
                 fmt_double(row.max_res.re_identity), fmt_double(row.max_res.sqrt_det),
                 fmt_double(row.max_res.min_singular), fmt_double(row.max_res.min_real_eig),
                 row.pass ? "1" : "0", row.note.empty() ? "ok" : row.note});

  auto manifest = detail::manifest_head(cfg, "audit", config_json);
  manifest.emplace_back("pass", std::to_string(report.n_pass));
  manifest.emplace_back("fail", std::to_string(report.n_fail));
  write_manifest(dir, manifest);
}

}  // namespace rpk
