#include "spinbus/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "spinbus/circuit_map.hpp"
#include "spinbus/eigensolver.hpp"
#include "spinbus/error.hpp"
#include "spinbus/experiments.hpp"
#include "spinbus/hierarchy.hpp"
#include "spinbus/noise_mc.hpp"
#include "spinbus/perturbation.hpp"
#include "spinbus/spin_model.hpp"

namespace spinbus::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string config_hash(const json& config) {
  const std::string canonical = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!obj.is_object()) throw_config(context + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw_config(context + ": unknown key '" + key + "'");
}

double get_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw_config("'" + key + "' must be a number");
  return obj[key].get<double>();
}

double require_number(const json& obj, const std::string& key,
                      const std::string& context) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw_config(context + ": missing numeric '" + key + "'");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw_config("'" + key + "' must be an integer");
  return obj[key].get<int>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw_config("'" + key + "' must be a boolean");
  return obj[key].get<bool>();
}

std::vector<double> require_number_list(const json& obj, const std::string& key,
                                        const std::string& context) {
  if (!obj.contains(key) || !obj[key].is_array() || obj[key].empty())
    throw_config(context + ": missing non-empty array '" + key + "'");
  std::vector<double> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number()) throw_config(context + ": '" + key + "' holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

// ---------------------------------------------------------------------
// chain / circuit resolution

ChainSpec chain_from_config(const json& chain) {
  check_keys(chain,
             {"fixture", "sites", "edges", "n_couplers", "delta_q1_ghz",
              "delta_q2_ghz", "delta_c_ghz", "j_cc_ghz", "ratio", "j_qc_ghz",
              "eps_c_ghz"},
             "chain");

  if (chain.contains("sites")) {
    ChainSpec spec;
    for (const auto& s : chain["sites"]) {
      check_keys(s, {"epsilon_ghz", "delta_ghz", "role"}, "chain.sites[]");
      SpinSite site;
      site.epsilon = get_number(s, "epsilon_ghz", 0.0);
      site.delta = get_number(s, "delta_ghz", 0.0);
      const std::string role =
          s.contains("role") ? s["role"].get<std::string>() : "coupler";
      if (role != "qubit" && role != "coupler")
        throw_config("chain.sites[].role must be 'qubit' or 'coupler'");
      site.role = role == "qubit" ? SiteRole::qubit : SiteRole::coupler;
      site.index = static_cast<int>(spec.sites.size());
      spec.sites.push_back(site);
    }
    if (chain.contains("edges")) {
      for (const auto& e : chain["edges"]) {
        if (!e.is_array() || e.size() != 3)
          throw_config("chain.edges[] must be [a, b, j_ghz] triples");
        spec.couplings.edges.push_back(
            {e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
      }
    }
    spec.validate();
    return spec;
  }

  const std::string fixture =
      chain.contains("fixture") ? chain["fixture"].get<std::string>()
                                : "paper-chain-homogeneous";
  if (fixture == "two-site-ising") {
    ChainSpec spec;
    spec.sites.push_back({0.0, 0.0, SiteRole::coupler, 1});
    spec.sites.push_back({0.0, 0.0, SiteRole::coupler, 2});
    spec.couplings.edges.push_back({0, 1, 1.0});
    return spec;
  }
  if (fixture != "paper-chain-homogeneous")
    throw_config("unknown chain fixture '" + fixture + "'");

  const double delta_c = get_number(chain, "delta_c_ghz", 5.0);
  double j_cc = get_number(chain, "j_cc_ghz", 0.25);
  if (chain.contains("ratio")) j_cc = chain["ratio"].get<double>() * 0.5 * delta_c;
  ChainSpec spec = ChainSpec::device_chain(
      get_number(chain, "delta_q1_ghz", 2.0),
      get_number(chain, "delta_q2_ghz", 2.0), delta_c, j_cc,
      get_number(chain, "j_qc_ghz", 0.25), get_number(chain, "j_qc_ghz", 0.25),
      get_int(chain, "n_couplers", 7));
  if (chain.contains("eps_c_ghz")) {
    for (auto& s : spec.sites)
      if (s.role == SiteRole::coupler) s.epsilon = chain["eps_c_ghz"].get<double>();
  }
  return spec;
}

CircuitUnitParams circuit_from_config(const json& circuit) {
  check_keys(circuit,
             {"fixture", "l_z_ph", "c_eff_ff", "i_c_na", "d", "n_junctions_x"},
             "circuit");
  CircuitUnitParams p;
  if (circuit.contains("fixture")) {
    const std::string fixture = circuit["fixture"].get<std::string>();
    if (fixture == "sm-table-1-coupler")
      p = sm_coupler_params(get_number(circuit, "d", 0.0));
    else if (fixture == "sm-table-1-qubit")
      p = sm_qubit_params(get_number(circuit, "d", 0.0));
    else
      throw_config("unknown circuit fixture '" + fixture + "'");
    if (circuit.contains("l_z_ph")) p.l_z_ph = circuit["l_z_ph"].get<double>();
    if (circuit.contains("c_eff_ff")) p.c_eff_ff = circuit["c_eff_ff"].get<double>();
    if (circuit.contains("i_c_na")) p.i_c_na = circuit["i_c_na"].get<double>();
  } else {
    p.l_z_ph = require_number(circuit, "l_z_ph", "circuit");
    p.c_eff_ff = require_number(circuit, "c_eff_ff", "circuit");
    p.i_c_na = require_number(circuit, "i_c_na", "circuit");
    p.d = get_number(circuit, "d", 0.0);
    p.n_junctions_x = get_int(circuit, "n_junctions_x", 2);
  }
  p.validate();
  return p;
}

// One sweep setting resolved into a runnable chain: the spin model, the
// per-site currents for flux conversion, and (circuit mode) the single
// unit characters the coupling pipeline needs.
struct ChainSetting {
  double setting = 0.0;  // ratio or coupler f_x
  ChainSpec spec;
  SiteCurrents ip_na;
  std::vector<UnitNoiseSensitivity> sensitivity;
  int source_site = 0;
  // circuit-mode extras
  double d_iz_dfz_c = 0.0;
  double ip_q1_na = 0.0, ip_q2_na = 0.0;
  double j_q1c1 = 0.0, j_q2c7 = 0.0;
};

enum class QubitMode { none, operating, splitting };

struct SweepRequest {
  std::vector<double> values;
  bool circuit_mode = false;
  QubitMode qubit_mode = QubitMode::none;
};

SweepRequest parse_sweep(const json& config) {
  if (!config.contains("sweep")) throw_config("missing 'sweep' section");
  const json& sweep = config["sweep"];
  check_keys(sweep, {"type", "values"}, "sweep");
  if (!sweep.contains("type")) throw_config("sweep: missing 'type'");
  const std::string type = sweep["type"].get<std::string>();
  SweepRequest req;
  req.values = require_number_list(sweep, "values", "sweep");
  if (type == "ratio")
    req.circuit_mode = false;
  else if (type == "coupler-fx")
    req.circuit_mode = true;
  else
    throw_config("sweep.type must be 'ratio' or 'coupler-fx'");
  return req;
}

struct QubitOperating {
  double fx = 0.0;
  double delta_ghz = 0.0;
  double ip_na = 0.0;
  double ddelta_dfx = 0.0;
};

QubitOperating qubit_operating_point(const CircuitUnitParams& qubit,
                                     double target_delta, int basis_size) {
  QubitOperating op;
  op.fx = fx_for_target_delta(qubit, target_delta, 0.02, 0.45, basis_size);
  const UnitCharacter character =
      extract_character(qubit, op.fx, default_fz_grid(), basis_size);
  op.delta_ghz = character.delta_ghz;
  op.ip_na = character.persistent_current_na;
  op.ddelta_dfx = delta_fx_sensitivity(qubit, op.fx, 1e-4, basis_size);
  return op;
}

std::vector<ChainSetting> resolve_settings(const json& config,
                                           const SweepRequest& req,
                                           QubitMode qubit_mode) {
  std::vector<ChainSetting> settings;

  if (!req.circuit_mode) {
    const json chain = config.value("chain", json::object());
    check_keys(chain,
               {"n_couplers", "delta_c_ghz", "ip_na", "include_qubits",
                "delta_q1_ghz", "delta_q2_ghz", "j_qc_ghz"},
               "chain");
    const int n_couplers = get_int(chain, "n_couplers", 7);
    const double delta_c = get_number(chain, "delta_c_ghz", 5.0);
    const double ip = get_number(chain, "ip_na", 100.0);
    const bool include_qubits =
        get_bool(chain, "include_qubits", qubit_mode != QubitMode::none);

    for (double ratio : req.values) {
      ChainSetting s;
      s.setting = ratio;
      const double j_cc = ratio * 0.5 * delta_c;
      if (include_qubits) {
        double dq1 = get_number(chain, "delta_q1_ghz", 2.0);
        double dq2 = get_number(chain, "delta_q2_ghz", 2.0);
        const double j_qc = get_number(chain, "j_qc_ghz", 0.25);
        s.spec = ChainSpec::device_chain(dq1, dq2, delta_c, j_cc, j_qc, j_qc,
                                         n_couplers);
        s.j_q1c1 = s.j_q2c7 = j_qc;
        s.source_site = s.spec.n_sites() - 1;
      } else {
        s.spec = ChainSpec::homogeneous_chain(n_couplers, 0.0, delta_c, j_cc);
        s.source_site = n_couplers - 1;
      }
      s.ip_na.assign(s.spec.n_sites(), ip);
      s.ip_q1_na = s.ip_q2_na = ip;
      for (int i = 0; i < s.spec.n_sites(); ++i)
        s.sensitivity.push_back({ip, 0.0});
      settings.push_back(std::move(s));
    }
    return settings;
  }

  // circuit mode: the coupler character fixes (delta_c, J_cc, I_p) per f_x.
  const CircuitUnitParams coupler =
      circuit_from_config(config.value("circuit", json{{"fixture",
                                                        "sm-table-1-coupler"}}));
  const json chain = config.value("chain", json::object());
  check_keys(chain,
             {"include_qubits", "delta_q1_target_ghz", "delta_q2_target_ghz",
              "qubit_delta_ghz", "n_couplers"},
             "chain");
  const int n_couplers = get_int(chain, "n_couplers", 7);
  const int basis_size = get_int(config, "basis_size", 60);
  const double m_cc = get_number(config, "mutual_cc_ph", sm_mutual_cc_ph);
  const double m_qc = get_number(config, "mutual_qc_ph", sm_mutual_qc_ph);
  const bool include_qubits =
      get_bool(chain, "include_qubits", qubit_mode != QubitMode::none);

  QubitOperating q1, q2;
  if (include_qubits) {
    const CircuitUnitParams qubit = sm_qubit_params();
    if (qubit_mode == QubitMode::operating) {
      q1 = qubit_operating_point(
          qubit, get_number(chain, "delta_q1_target_ghz", 2.3), basis_size);
      q2 = qubit_operating_point(
          qubit, get_number(chain, "delta_q2_target_ghz", 0.01), basis_size);
    } else {
      // Splitting protocol: both qubits at the same transverse field,
      // with persistent currents taken at that shared operating point.
      q1 = qubit_operating_point(
          qubit, get_number(chain, "qubit_delta_ghz", 2.0), basis_size);
      q2 = q1;
    }
  }

  for (double fx : req.values) {
    const UnitCharacter character =
        extract_character(coupler, fx, default_fz_grid(), basis_size);
    const double j_cc = spin_coupling_from_circuit(character, character, m_cc);
    const double ddelta = delta_fx_sensitivity(coupler, fx, 1e-4, basis_size);

    ChainSetting s;
    s.setting = fx;
    s.d_iz_dfz_c = character.d_iz_d_fz;
    if (include_qubits) {
      s.ip_q1_na = q1.ip_na;
      s.ip_q2_na = q2.ip_na;
      s.j_q1c1 = spin_coupling_from_currents(q1.ip_na,
                                             character.persistent_current_na,
                                             m_qc);
      s.j_q2c7 = spin_coupling_from_currents(q2.ip_na,
                                             character.persistent_current_na,
                                             m_qc);
      s.spec = ChainSpec::device_chain(q1.delta_ghz, q2.delta_ghz,
                                       character.delta_ghz, j_cc, s.j_q1c1,
                                       s.j_q2c7, n_couplers);
      s.source_site = s.spec.n_sites() - 1;
      s.ip_na.assign(s.spec.n_sites(), character.persistent_current_na);
      s.ip_na.front() = q1.ip_na;
      s.ip_na.back() = q2.ip_na;
      s.sensitivity.assign(s.spec.n_sites(),
                           {character.persistent_current_na, ddelta});
      s.sensitivity.front() = {q1.ip_na, q1.ddelta_dfx};
      s.sensitivity.back() = {q2.ip_na, q2.ddelta_dfx};
    } else {
      s.spec = ChainSpec::homogeneous_chain(n_couplers, 0.0,
                                            character.delta_ghz, j_cc);
      s.source_site = n_couplers - 1;
      s.ip_na.assign(n_couplers, character.persistent_current_na);
      s.ip_q1_na = s.ip_q2_na = character.persistent_current_na;
      s.sensitivity.assign(n_couplers,
                           {character.persistent_current_na, ddelta});
    }
    settings.push_back(std::move(s));
  }
  return settings;
}

// ---------------------------------------------------------------------
// experiment runners

ResultBundle run_spectrum(const json& config, std::uint64_t seed) {
  check_keys(config, {"experiment", "seed", "chain", "levels"}, "config");
  const ChainSpec spec = chain_from_config(config.value("chain", json::object()));
  const int levels = get_int(config, "levels", 0);
  const SpectrumResult s = diagonalize_chain(spec, levels);

  ResultBundle bundle;
  bundle.seed = seed;
  Table t;
  t.name = "spectrum";
  t.columns = {"level[1]", "energy[GHz]", "residual[GHz]"};
  for (int k = 0; k < s.n_levels(); ++k)
    t.rows.push_back({double(k), s.energies[k], s.residual_norms[k]});
  bundle.tables.push_back(std::move(t));
  bundle.provenance["spectrum"] =
      "energy: diagonalize(build_hamiltonian(chain)); residual: |H v - E v|";
  return bundle;
}

ResultBundle run_coupler_character(const json& config, std::uint64_t seed) {
  check_keys(config,
             {"experiment", "seed", "circuit", "fx_values",
              "fz_half_width_mphi0", "fz_points", "basis_size",
              "mutual_cc_ph"},
             "config");
  const CircuitUnitParams params =
      circuit_from_config(config.value("circuit", json{{"fixture",
                                                        "sm-table-1-coupler"}}));
  const std::vector<double> fx_values =
      require_number_list(config, "fx_values", "coupler-character");
  const double half_width =
      get_number(config, "fz_half_width_mphi0", 20.0) * 1e-3;
  const int n_fz = get_int(config, "fz_points", 41);
  const int basis = get_int(config, "basis_size", 60);
  const double m_cc = get_number(config, "mutual_cc_ph", sm_mutual_cc_ph);

  ResultBundle bundle;
  bundle.seed = seed;
  Table t;
  t.name = "coupler_character";
  t.columns = {"f_x[Phi0]",          "delta[GHz]",
               "half_delta[GHz]",    "ip[nA]",
               "j_cc[GHz]",          "beta_c[1]",
               "d_iz_dfz[nA/Phi0]",  "fz_symmetry[Phi0]",
               "gap[GHz]",           "sigmoid_slope[1]"};
  for (double fx : fx_values) {
    const UnitCharacter c = extract_character(
        params, fx, default_fz_grid(0.5, half_width, n_fz), basis);
    const double j_cc = spin_coupling_from_circuit(c, c, m_cc);
    t.rows.push_back({fx, c.delta_ghz, 0.5 * c.delta_ghz,
                      c.persistent_current_na, j_cc, c.beta_c, c.d_iz_d_fz,
                      c.f_z_symmetry, c.delta_ghz,
                      c.slope_from_sigmoid ? 1.0 : 0.0});
  }
  bundle.tables.push_back(std::move(t));
  bundle.provenance["coupler_character"] =
      "delta: gap of quantize_unit at the symmetry point; ip: |<0|I_z|1>|; "
      "j_cc: M_cc ip^2 / h; d_iz_dfz: sigmoid midpoint slope of <0|I_z|0>";
  return bundle;
}

ResultBundle run_flux_propagation(const json& config, std::uint64_t seed) {
  check_keys(config,
             {"experiment", "seed", "sweep", "chain", "circuit",
              "offset_mphi0", "basis_size", "mutual_cc_ph", "mutual_qc_ph"},
             "config");
  const SweepRequest req = parse_sweep(config);
  const auto settings = resolve_settings(config, req, QubitMode::operating);
  const double offset = get_number(config, "offset_mphi0", 20.0);

  ResultBundle bundle;
  bundle.seed = seed;
  Table t;
  t.name = "flux_signal";
  t.columns = {req.circuit_mode ? "f_x[Phi0]" : "ratio[1]", "target_site[1]",
               "signal[mPhi0]"};
  for (const auto& s : settings) {
    const FluxSignal signal =
        flux_propagation(s.spec, s.source_site, s.ip_na, offset);
    for (std::size_t i = 0; i < signal.target_sites.size(); ++i)
      t.rows.push_back({s.setting, double(signal.target_sites[i]),
                        signal.magnitude_mphi0[i]});
  }
  bundle.tables.push_back(std::move(t));
  bundle.provenance["flux_signal"] =
      "signal: |shift of the target's effective symmetry point| between "
      "source offsets +-offset_mphi0 (tune_symmetry_points + "
      "effective_symmetry_point)";
  return bundle;
}

ResultBundle run_susceptibility(const json& config, std::uint64_t seed) {
  check_keys(config,
             {"experiment", "seed", "sweep", "chain", "circuit", "grid_points",
              "half_width_mphi0", "jitter_mphi0", "n_resamples", "basis_size",
              "mutual_cc_ph", "mutual_qc_ph"},
             "config");
  const SweepRequest req = parse_sweep(config);
  const auto settings = resolve_settings(config, req, QubitMode::none);
  const int grid_n = get_int(config, "grid_points", 41);
  const double half_width = get_number(config, "half_width_mphi0", 20.0) * 1e-3;
  const double jitter = get_number(config, "jitter_mphi0", 1.2) * 1e-3;
  const int n_resamples = get_int(config, "n_resamples", 200);
  const std::vector<double> grid = default_source_grid(half_width, grid_n);
  const std::string label = req.circuit_mode ? "f_x[Phi0]" : "ratio[1]";

  ResultBundle bundle;
  bundle.seed = seed;
  Table curves;
  curves.name = "response_curves";
  curves.columns = {label, "source_offset[mPhi0]", "target_offset[mPhi0]"};
  Table slopes;
  slopes.name = "midpoint_slopes";
  slopes.columns = {label,          "target_site[1]", "slope[1]",
                    "slope_std[1]", "fit_ok[1]",      "rms_residual[mPhi0]"};

  for (const auto& s : settings) {
    for (int target = 0; target < s.spec.n_sites(); ++target) {
      if (target == s.source_site) continue;
      const ResponseCurve curve = susceptibility_curve(
          s.spec, s.source_site, target, s.ip_na, grid);
      const SlopeUncertainty unc = slope_uncertainty(
          curve.source_bias, curve.target_symmetry_point, jitter, n_resamples,
          seed);
      slopes.rows.push_back({s.setting, double(target), curve.midpoint_slope,
                             unc.slope_std,
                             curve.fit.trustworthy() ? 1.0 : 0.0,
                             curve.fit_residual * 1e3});
      if (target == 0) {
        for (std::size_t i = 0; i < curve.source_bias.size(); ++i)
          curves.rows.push_back({s.setting, curve.source_bias[i] * 1e3,
                                 curve.target_symmetry_point[i] * 1e3});
      }
    }
  }
  bundle.tables.push_back(std::move(curves));
  bundle.tables.push_back(std::move(slopes));
  bundle.provenance["response_curves"] =
      "target_offset: effective symmetry point of the end unit vs source "
      "z offset (susceptibility_curve)";
  bundle.provenance["midpoint_slopes"] =
      "slope: b/(4w) of the sigmoid fit; slope_std: resampled fits with "
      "Gaussian jitter (slope_uncertainty)";
  return bundle;
}

ResultBundle run_jeff_compare(const json& config, std::uint64_t seed) {
  check_keys(config,
             {"experiment", "seed", "sweep", "chain", "circuit", "grid_points",
              "half_width_mphi0", "basis_size", "mutual_cc_ph",
              "mutual_qc_ph"},
             "config");
  SweepRequest req = parse_sweep(config);
  if (!req.circuit_mode)
    throw_config("jeff-compare requires sweep.type = 'coupler-fx'");
  const auto settings = resolve_settings(config, req, QubitMode::splitting);
  const int grid_n = get_int(config, "grid_points", 41);
  const double half_width = get_number(config, "half_width_mphi0", 20.0) * 1e-3;
  const double m_qc = get_number(config, "mutual_qc_ph", sm_mutual_qc_ph);
  const std::vector<double> grid = default_source_grid(half_width, grid_n);

  ResultBundle bundle;
  bundle.seed = seed;
  Table t;
  t.name = "jeff_compare";
  t.columns = {"f_x[Phi0]",         "slope[1]",
               "j_susceptibility[GHz]", "half_splitting[GHz]",
               "j_pert_sum[GHz]",   "j_pert_gap[GHz]",
               "omega_c[GHz]",      "weak_window[1]"};

  for (const auto& s : settings) {
    // Coupler-only chain for the susceptibility and perturbative routes.
    ChainSpec couplers;
    couplers.sites.assign(s.spec.sites.begin() + 1, s.spec.sites.end() - 1);
    for (const auto& e : s.spec.couplings.edges) {
      if (e.a == 0 || e.b == 0 || e.a == s.spec.n_sites() - 1 ||
          e.b == s.spec.n_sites() - 1)
        continue;
      couplers.couplings.edges.push_back({e.a - 1, e.b - 1, e.j});
    }
    SiteCurrents coupler_ip(s.ip_na.begin() + 1, s.ip_na.end() - 1);

    const ResponseCurve curve = susceptibility_curve(
        couplers, couplers.n_sites() - 1, 0, coupler_ip, grid);
    const double j_susc = j_eff_from_susceptibility(
        curve.midpoint_slope, s.d_iz_dfz_c, s.ip_q1_na, s.ip_q2_na, m_qc, m_qc);

    const EffectiveCoupling pert =
        effective_coupling(couplers, s.j_q1c1, s.j_q2c7);

    double half_split = std::nan("");
    try {
      half_split = 0.5 * spectral_splitting(s.spec).splitting_ghz;
    } catch (const Error&) {
      // dressed regime: leave NaN in the table
    }

    const bool weak = std::abs(curve.midpoint_slope) < 0.5 &&
                      std::max(s.j_q1c1, s.j_q2c7) <= 0.1 * pert.omega_c;
    t.rows.push_back({s.setting, curve.midpoint_slope, j_susc, half_split,
                      pert.j_eff_exact_sum, pert.j_eff_gap_approx,
                      pert.omega_c, weak ? 1.0 : 0.0});
  }
  bundle.tables.push_back(std::move(t));
  bundle.provenance["jeff_compare"] =
      "j_susceptibility: j_eff_from_susceptibility(slope, d_iz_dfz, ...); "
      "half_splitting: spectral_splitting/2 on the device chain; "
      "j_pert_*: effective_coupling on the coupler-only chain";
  return bundle;
}

ResultBundle run_noise(const json& config, std::uint64_t seed) {
  check_keys(config,
             {"experiment", "seed", "sweep", "chain", "circuit", "noise",
              "n_runs", "tracked_levels", "basis_size", "mutual_cc_ph",
              "mutual_qc_ph"},
             "config");
  const SweepRequest req = parse_sweep(config);
  const auto settings = resolve_settings(config, req, QubitMode::splitting);

  const json noise_cfg = config.value("noise", json::object());
  check_keys(noise_cfg,
             {"amplitude_uphi0", "alpha", "f_low_hz", "f_high_hz",
              "geometry_factors"},
             "noise");
  NoiseSpec noise;
  noise.amplitude = get_number(noise_cfg, "amplitude_uphi0", 3.0);
  noise.alpha = get_number(noise_cfg, "alpha", 0.9);
  noise.f_low = get_number(noise_cfg, "f_low_hz", 1e-3);
  noise.f_high = get_number(noise_cfg, "f_high_hz", 1e6);
  if (noise_cfg.contains("geometry_factors"))
    noise.geometry_factors =
        require_number_list(noise_cfg, "geometry_factors", "noise");

  const int n_runs = get_int(config, "n_runs", 10);
  const int tracked = get_int(config, "tracked_levels", 8);
  const std::string label = req.circuit_mode ? "f_x[Phi0]" : "ratio[1]";

  ResultBundle bundle;
  bundle.seed = seed;
  Table stats;
  stats.name = "level_stats";
  stats.columns = {label,
                   "level[1]",
                   "noiseless[GHz]",
                   "mean_energy[GHz]",
                   "std_energy[GHz]",
                   "mean_transition[GHz]",
                   "std_transition[GHz]",
                   "ambiguous_runs[1]"};
  Table widths;
  widths.name = "qubit_linewidth";
  widths.columns = {label, "lower_level[1]", "doublet_overlap[1]",
                    "linewidth[GHz]"};

  for (const auto& s : settings) {
    const NoiseEnsembleStats ens = noisy_spectrum_ensemble(
        s.spec, s.sensitivity, noise, n_runs, seed, tracked);
    int total_ambiguous = 0;
    for (int a : ens.ambiguous_per_run) total_ambiguous += a;
    for (int k = 0; k < ens.levels; ++k)
      stats.rows.push_back({s.setting, double(k), ens.noiseless_energies[k],
                            ens.mean_energy[k], ens.std_energy[k],
                            ens.mean_transition[k], ens.std_transition[k],
                            double(total_ambiguous)});

    const QubitDoublet doublet = spectral_splitting(s.spec, 0.0);
    const int lower = doublet.lower_level;
    const double width =
        lower < ens.levels ? ens.std_transition[lower] : std::nan("");
    widths.rows.push_back(
        {s.setting, double(lower), doublet.lower_overlap, width});
  }
  bundle.tables.push_back(std::move(stats));
  bundle.tables.push_back(std::move(widths));
  bundle.provenance["level_stats"] =
      "mean/std over noisy_spectrum_ensemble runs; levels tracked by "
      "overlap with the noiseless eigenbasis";
  bundle.provenance["qubit_linewidth"] =
      "linewidth: std_transition of the lower level identified by overlap "
      "with the decoupled qubit doublet (spectral_splitting)";
  return bundle;
}

ResultBundle run_hierarchy_bench(const json& config, std::uint64_t seed) {
  check_keys(config,
             {"experiment", "seed", "chain", "k_ladder", "compare_levels",
              "tol_ghz"},
             "config");
  const ChainSpec spec = chain_from_config(config.value("chain", json::object()));
  std::vector<int> ladder;
  if (config.contains("k_ladder")) {
    for (const auto& v : config["k_ladder"]) ladder.push_back(v.get<int>());
  } else {
    ladder = {1, 2, 3, 4, 6, 8};
  }
  const int compare = get_int(config, "compare_levels", 4);
  const double tol = get_number(config, "tol_ghz", 1e-3);

  const ConvergenceTable table = convergence_sweep(spec, ladder, compare, tol);

  ResultBundle bundle;
  bundle.seed = seed;
  Table t;
  t.name = "hierarchy_convergence";
  t.columns = {"k[1]",          "composite_dim[1]", "max_error[GHz]",
               "ground_gap[GHz]", "variational_ok[1]", "meets_tol[1]"};
  for (const auto& row : table.rows)
    t.rows.push_back({double(row.k), double(row.composite_dim),
                      row.max_abs_error_ghz, row.ground_error_ghz,
                      row.variational_ok ? 1.0 : 0.0,
                      row.meets_tolerance ? 1.0 : 0.0});
  bundle.tables.push_back(std::move(t));
  bundle.provenance["hierarchy_convergence"] =
      "max_error: |hierarchical - exact| over the lowest levels "
      "(convergence_sweep); ground_gap: variational excess of the "
      "hierarchical ground energy";
  return bundle;
}

}  // namespace

json validate_config(json config, const std::string& experiment) {
  if (!config.is_object()) throw_config("config root must be an object");
  if (config.contains("experiment")) {
    const std::string declared = config["experiment"].get<std::string>();
    if (declared != experiment)
      throw_config("config experiment '" + declared +
                   "' does not match subcommand '" + experiment + "'");
  } else {
    config["experiment"] = experiment;
  }
  if (std::find(experiment_names.begin(), experiment_names.end(), experiment) ==
      experiment_names.end())
    throw_config("unknown experiment '" + experiment + "'");
  return config;
}

nlohmann::json load_config(const std::string& path,
                           const std::string& experiment) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open config file: " + path);
  json config;
  try {
    config = json::parse(in);
  } catch (const json::parse_error& e) {
    throw_config("config parse error in " + path + ": " + e.what());
  }
  return validate_config(std::move(config), experiment);
}

ResultBundle run_experiment(const std::string& experiment,
                            const nlohmann::json& raw_config,
                            long long seed_override) {
  json config = validate_config(raw_config, experiment);
  std::uint64_t seed = 0;
  if (config.contains("seed")) {
    if (!config["seed"].is_number_integer() ||
        (config["seed"].is_number_integer() &&
         !config["seed"].is_number_unsigned() &&
         config["seed"].get<long long>() < 0))
      throw_config("'seed' must be a non-negative integer");
    seed = config["seed"].get<std::uint64_t>();
  }
  if (seed_override >= 0) {
    seed = static_cast<std::uint64_t>(seed_override);
    config["seed"] = seed;
  }

  ResultBundle bundle;
  if (experiment == "spectrum")
    bundle = run_spectrum(config, seed);
  else if (experiment == "coupler-character")
    bundle = run_coupler_character(config, seed);
  else if (experiment == "flux-propagation")
    bundle = run_flux_propagation(config, seed);
  else if (experiment == "susceptibility")
    bundle = run_susceptibility(config, seed);
  else if (experiment == "jeff-compare")
    bundle = run_jeff_compare(config, seed);
  else if (experiment == "noise")
    bundle = run_noise(config, seed);
  else if (experiment == "hierarchy-bench")
    bundle = run_hierarchy_bench(config, seed);
  else
    throw_config("unknown experiment '" + experiment + "'");

  bundle.experiment = experiment;
  bundle.config = config;
  bundle.config_hash = config_hash(config);
  return bundle;
}

std::vector<std::string> serialize_bundle(const ResultBundle& bundle,
                                          const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw_io("cannot create output directory " + out_dir);

  std::vector<std::string> paths;
  json table_index = json::object();
  for (const Table& table : bundle.tables) {
    const std::string path = out_dir + "/" + table.name + ".tsv";
    std::ostringstream body;
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      body << (c ? "\t" : "") << table.columns[c];
    body << "\n";
    for (const auto& row : table.rows) {
      if (row.size() != table.columns.size())
        throw_io("table '" + table.name + "' has a ragged row");
      for (std::size_t c = 0; c < row.size(); ++c)
        body << (c ? "\t" : "") << format_number(row[c]);
      body << "\n";
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot write table file " + path);
    out << body.str();
    if (!out) throw_io("write failed for " + path);
    paths.push_back(path);
    table_index[table.name] = table.name + ".tsv";
  }

  json meta;
  meta["experiment"] = bundle.experiment;
  meta["config"] = bundle.config;
  meta["config_hash"] = bundle.config_hash;
  meta["seed"] = bundle.seed;
  meta["tool"] = "spinbus";
  meta["tables"] = table_index;
  meta["provenance"] = bundle.provenance;
  const std::string meta_path = out_dir + "/metadata.json";
  std::ofstream out(meta_path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot write " + meta_path);
  out << meta.dump(2) << "\n";
  if (!out) throw_io("write failed for " + meta_path);
  paths.push_back(meta_path);
  return paths;
}

Table parse_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open table file " + path);
  Table table;
  table.name = fs::path(path).stem().string();
  std::string line;
  if (!std::getline(in, line)) throw_io("empty table file " + path);
  std::istringstream header(line);
  std::string cell;
  while (std::getline(header, cell, '\t')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row_stream(line);
    std::vector<double> row;
    while (std::getline(row_stream, cell, '\t')) row.push_back(std::stod(cell));
    if (row.size() != table.columns.size())
      throw_io("ragged row in table file " + path);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_failure_marker(const std::string& out_dir,
                          const std::string& experiment,
                          const std::string& message, int exit_code) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  json report;
  report["experiment"] = experiment;
  report["error"] = message;
  report["exit_code"] = exit_code;
  std::ofstream out(out_dir + "/FAILED.json", std::ios::trunc);
  if (out) out << report.dump(2) << "\n";
}

}  // namespace spinbus::cli
