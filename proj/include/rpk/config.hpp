// Experiment configuration: a strict JSON schema (unknown keys are errors, so
// typos in sweep lists cannot pass silently) plus builders that turn the
// parsed description into potentials, rotation axes, and initial matrices.
#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpk/hagedorn.hpp"
#include "rpk/linalg.hpp"
#include "rpk/potential.hpp"
#include "rpk/rotation.hpp"

namespace rpk {

enum class ExperimentKind { trajectory, gaussian, amplitude, compare, converge, audit };

inline ExperimentKind parse_experiment(const std::string& s) {
  if (s == "trajectory") return ExperimentKind::trajectory;
  if (s == "gaussian") return ExperimentKind::gaussian;
  if (s == "amplitude") return ExperimentKind::amplitude;
  if (s == "compare") return ExperimentKind::compare;
  if (s == "converge") return ExperimentKind::converge;
  if (s == "audit") return ExperimentKind::audit;
  throw std::invalid_argument("config: unknown experiment '" + s + "'");
}

struct PotentialSpec {
  std::string kind = "zero";  // zero | harmonic_isotropic | harmonic_anisotropic | harmonic_plus_cosine
  std::vector<double> gammas;
  double a = 0.0;
  std::vector<double> k;

  template <int D>
  PotentialModel<D> build() const {
    if (kind == "zero") return zero_potential<D>();
    if (kind == "harmonic_isotropic") return harmonic_isotropic<D>();
    if (kind == "harmonic_anisotropic") {
      if (int(gammas.size()) != D)
        throw std::invalid_argument("config: harmonic_anisotropic needs " + std::to_string(D) +
                                    " gammas");
      RVec<D> g;
      for (int i = 0; i < D; ++i) g[i] = gammas[i];
      return harmonic_anisotropic<D>(g);
    }
    if (kind == "harmonic_plus_cosine") {
      if (int(k.size()) != D)
        throw std::invalid_argument("config: harmonic_plus_cosine needs a " + std::to_string(D) +
                                    "-vector k");
      RVec<D> kv;
      for (int i = 0; i < D; ++i) kv[i] = k[i];
      return harmonic_plus_cosine<D>(a, kv);
    }
    throw std::invalid_argument("config: unknown potential kind '" + kind + "'");
  }
};

struct MatrixSpec {
  std::string kind = "identity";  // identity | diag_width | perturbed
  std::vector<double> diag;
  std::vector<std::vector<double>> c;

  template <int D>
  PacketMatrices<D> build() const {
    if (kind == "identity") return identity_matrices<D>();
    if (kind == "diag_width") {
      if (int(diag.size()) != D) throw std::invalid_argument("config: diag_width needs d entries");
      RVec<D> d;
      for (int i = 0; i < D; ++i) d[i] = diag[i];
      return diag_width_matrices<D>(d);
    }
    if (kind == "perturbed") {
      if (int(c.size()) != D) throw std::invalid_argument("config: perturbed needs a d x d matrix");
      RMat<D> m;
      for (int i = 0; i < D; ++i) {
        if (int(c[i].size()) != D)
          throw std::invalid_argument("config: perturbed needs a d x d matrix");
        for (int j = 0; j < D; ++j) m(i, j) = c[i][j];
      }
      return perturbed_matrices<D>(m);
    }
    throw std::invalid_argument("config: unknown matrices kind '" + kind + "'");
  }
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::trajectory;
  int dimension = 2;
  PotentialSpec potential;
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  double lambda = 0.0;
  bool cubic = false;
  std::vector<double> epsilons;
  double T = 1.0;
  double dt = 1e-3;
  double ode_dt = 0.0;  // 0: derived as dt/2 where a PDE is involved, else dt
  int grid_n = 512;
  double grid_l = 8.0;
  int amp_grid_n = 64;
  double amp_grid_l = 10.0;
  std::vector<double> q0, p0;
  MatrixSpec matrices;
  std::vector<double> snapshots;  // empty: 11 evenly spaced times incl. 0 and T
  std::string output = "out";
  std::uint64_t seed = 0;
  bool force_spectral = false;
  bool save_fields = false;
  double ehrenfest_threshold = 0.1;
  double overflow_guard = 1e6;
  int audit_matrices = 20;
  double invariant_warn = 1e-8;
  double invariant_abort = 1e-6;

  RotationAxis rotation() const { return RotationAxis(omega); }

  double trajectory_dt() const {
    if (ode_dt > 0.0) return ode_dt;
    const bool pde = experiment == ExperimentKind::amplitude ||
                     experiment == ExperimentKind::compare ||
                     experiment == ExperimentKind::converge;
    return pde ? 0.5 * dt : dt;  // PDE runs sample Q_V at Strang midpoints
  }

  template <int D>
  RVec<D> q0_vec() const {
    RVec<D> v = RVec<D>::Zero();
    for (int i = 0; i < std::min<int>(D, int(q0.size())); ++i) v[i] = q0[i];
    return v;
  }
  template <int D>
  RVec<D> p0_vec() const {
    RVec<D> v = RVec<D>::Zero();
    for (int i = 0; i < std::min<int>(D, int(p0.size())); ++i) v[i] = p0[i];
    return v;
  }

  std::vector<double> snapshot_times() const {
    if (!snapshots.empty()) return snapshots;
    std::vector<double> t;
    for (int i = 0; i <= 10; ++i) t.push_back(T * i / 10.0);
    return t;
  }

  void validate() const {
    if (dimension != 2 && dimension != 3)
      throw std::invalid_argument("config: dimension must be 2 or 3");
    for (double e : epsilons)
      if (!(e > 0.0)) throw std::invalid_argument("config: epsilons must be strictly positive");
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("config: T and dt must be positive");
    const bool pde = experiment == ExperimentKind::amplitude ||
                     experiment == ExperimentKind::compare ||
                     experiment == ExperimentKind::converge;
    if (pde && dimension != 2)
      throw std::invalid_argument("config: PDE experiments support dimension 2 only");
    if (pde && (omega[0] != 0.0 || omega[1] != 0.0))
      throw std::invalid_argument("config: PDE experiments need a planar rotation axis (0,0,w)");
    if ((experiment == ExperimentKind::compare || experiment == ExperimentKind::converge) &&
        epsilons.empty())
      throw std::invalid_argument("config: compare/converge need a non-empty epsilon list");
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& context,
                       const std::set<std::string>& allowed) {
  if (!j.is_object()) throw std::invalid_argument("config: " + context + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "' in " + context);
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using nlohmann::json;
  detail::check_keys(
      j, "root",
      {"experiment", "dimension", "potential", "omega", "lambda", "mode", "epsilons", "time",
       "grid", "amplitude_grid", "initial", "snapshots", "output", "seed", "force_spectral",
       "save_fields", "ehrenfest_threshold", "overflow_guard", "audit_matrices", "tolerances"});

  ExperimentConfig c;
  if (!j.contains("experiment")) throw std::invalid_argument("config: 'experiment' is required");
  c.experiment = parse_experiment(j.at("experiment").get<std::string>());
  c.dimension = j.value("dimension", 2);

  if (!j.contains("potential")) throw std::invalid_argument("config: 'potential' is required");
  {
    const json& p = j.at("potential");
    detail::check_keys(p, "potential", {"kind", "gammas", "a", "k"});
    c.potential.kind = p.value("kind", std::string("zero"));
    if (p.contains("gammas")) c.potential.gammas = p.at("gammas").get<std::vector<double>>();
    c.potential.a = p.value("a", 0.0);
    if (p.contains("k")) c.potential.k = p.at("k").get<std::vector<double>>();
  }

  if (j.contains("omega")) {
    const json& w = j.at("omega");
    if (w.is_number()) {
      c.omega = Eigen::Vector3d(0.0, 0.0, w.get<double>());
    } else {
      const auto v = w.get<std::vector<double>>();
      if (v.size() != 3) throw std::invalid_argument("config: omega must be a number or 3-vector");
      c.omega = Eigen::Vector3d(v[0], v[1], v[2]);
    }
  }

  c.lambda = j.value("lambda", 0.0);
  if (j.contains("mode")) {
    const auto m = j.at("mode").get<std::string>();
    if (m == "cubic")
      c.cubic = true;
    else if (m != "linear")
      throw std::invalid_argument("config: mode must be 'linear' or 'cubic'");
  }
  if (j.contains("epsilons")) c.epsilons = j.at("epsilons").get<std::vector<double>>();

  if (!j.contains("time")) throw std::invalid_argument("config: 'time' is required");
  {
    const json& t = j.at("time");
    detail::check_keys(t, "time", {"T", "dt", "ode_dt"});
    if (!t.contains("T")) throw std::invalid_argument("config: time.T is required");
    c.T = t.at("T").get<double>();
    c.dt = t.value("dt", 1e-3);
    c.ode_dt = t.value("ode_dt", 0.0);
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::check_keys(g, "grid", {"N", "L"});
    c.grid_n = g.value("N", 512);
    c.grid_l = g.value("L", 8.0);
  }
  if (j.contains("amplitude_grid")) {
    const json& g = j.at("amplitude_grid");
    detail::check_keys(g, "amplitude_grid", {"N", "L"});
    c.amp_grid_n = g.value("N", 64);
    c.amp_grid_l = g.value("L", 10.0);
  }

  if (j.contains("initial")) {
    const json& ini = j.at("initial");
    detail::check_keys(ini, "initial", {"q0", "p0", "matrices"});
    if (ini.contains("q0")) c.q0 = ini.at("q0").get<std::vector<double>>();
    if (ini.contains("p0")) c.p0 = ini.at("p0").get<std::vector<double>>();
    if (ini.contains("matrices")) {
      const json& m = ini.at("matrices");
      detail::check_keys(m, "initial.matrices", {"kind", "diag", "c"});
      c.matrices.kind = m.value("kind", std::string("identity"));
      if (m.contains("diag")) c.matrices.diag = m.at("diag").get<std::vector<double>>();
      if (m.contains("c")) c.matrices.c = m.at("c").get<std::vector<std::vector<double>>>();
    }
  }

  if (j.contains("snapshots")) c.snapshots = j.at("snapshots").get<std::vector<double>>();
  c.output = j.value("output", std::string("out"));
  c.seed = j.value("seed", std::uint64_t(0));
  c.force_spectral = j.value("force_spectral", false);
  c.save_fields = j.value("save_fields", false);
  c.ehrenfest_threshold = j.value("ehrenfest_threshold", 0.1);
  c.overflow_guard = j.value("overflow_guard", 1e6);
  c.audit_matrices = j.value("audit_matrices", 20);
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    detail::check_keys(t, "tolerances", {"invariant_warn", "invariant_abort"});
    c.invariant_warn = t.value("invariant_warn", 1e-8);
    c.invariant_abort = t.value("invariant_abort", 1e-6);
  }

  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  return parse_config(j);
}

/// Deterministic re-serialization for the manifest (alphabetical keys).
inline std::string config_echo(const std::filesystem::path& path) {
  std::ifstream in(path);
  nlohmann::json j;
  in >> j;
  return j.dump(2);
}

}  // namespace rpk
