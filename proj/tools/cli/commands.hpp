// Copyright 2026 The qkdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The four subcommands. Each takes a resolved Config and returns the process
// exit status: 0 success, 1 verification failure, 2 configuration error.

#pragma once

#include "cli/config.hpp"
#include "qkdsim/qkdsim.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

namespace qkdsim::cli {

inline constexpr const char* kRatesColumns = "gamma,e_b,e_p,sift,secure_fraction,l_sec,provenance";
inline constexpr const char* kGridColumns = "gamma,p,e_b,e_p,sift,secure_fraction,l_sec,provenance";
inline constexpr const char* kSweepBetaColumns =
    "beta,site,joint_e_b,joint_e_p,table1_e_b,table1_e_p,e_b,e_p,sift,secure_fraction,"
    "secure_fraction_no_sift,table1_secure_fraction,provenance";
inline constexpr const char* kShotsColumns =
    "n_identity_gates,gamma,qber,phase_error,sifted_bits,l_sec,provenance";

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::vector<double> linspace(double start, double stop, std::uint64_t points) {
  std::vector<double> out;
  for (std::uint64_t i = 0; i < points; ++i) {
    out.push_back(points == 1 ? start
                              : start + (stop - start) * static_cast<double>(i) /
                                            static_cast<double>(points - 1));
  }
  return out;
}

/// Grid for the swept parameter, honouring sweep.* with command defaults.
inline std::vector<double> sweep_grid(const Config& cfg, const std::string& param, double start,
                                      double stop, std::uint64_t points) {
  if (cfg.has("sweep.param") && cfg.text("sweep.param") != param) {
    throw ConfigError("this command sweeps " + param + ", not " + cfg.text("sweep.param"));
  }
  const double lo = cfg.optional_real("sweep.start").value_or(start);
  const double hi = cfg.optional_real("sweep.stop").value_or(stop);
  const std::uint64_t n = cfg.has("sweep.points") ? cfg.count("sweep.points") : points;
  if (lo > hi) {
    throw ConfigError("invalid sweep bounds: start " + num(lo) + " > stop " + num(hi));
  }
  return linspace(lo, hi, n);
}

/// Runs fn(0..n-1) on up to `workers` threads; results keep index order.
template <typename Fn>
auto parallel_map(std::size_t n, std::size_t workers, Fn fn) {
  using T = decltype(fn(std::size_t{0}));
  std::vector<T> out(n);
  const std::size_t pool = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < pool; ++w) {
    jobs.push_back(std::async(pool == 1 ? std::launch::deferred : std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += pool) out[i] = fn(i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  return out;
}

inline std::filesystem::path output_path(const Config& cfg, const std::string& fallback) {
  return cfg.has("output.path") ? std::filesystem::path(cfg.text("output.path"))
                                : std::filesystem::path(fallback);
}

inline void write_sidecar(const Config& cfg, const std::filesystem::path& csv,
                          const std::string& command) {
  cfg.write_ini(std::filesystem::path(csv.string() + ".config.ini"), command);
}

inline std::string rates_row(double x, const KeyRateReport& r, const char* provenance) {
  return num(x) + "," + num(r.rates.e_b) + "," + num(r.rates.e_p) + "," + num(r.rates.sift) + "," +
         num(r.secure_fraction) + "," + std::to_string(r.l_sec) + "," + provenance;
}

inline EncodingScheme scheme_of(const Config& cfg) {
  return cfg.text("protocol.scheme") == "optimal" ? EncodingScheme::optimal
                                                  : EncodingScheme::ancilla;
}

inline FaultLocation fault_of(const std::string& name) {
  if (name == "encoder") return FaultLocation::encoder;
  if (name == "post-selection") return FaultLocation::post_selection;
  if (name == "decoder") return FaultLocation::decoder;
  return FaultLocation::none;
}

/// rates: one CSV per curve in rates.protocols, written into output.path (a directory).
inline int run_rates(const Config& cfg, std::ostream& log) {
  const std::filesystem::path dir = output_path(cfg, "rates");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
  }
  const std::vector<double> gammas = sweep_grid(cfg, "gamma", 0.0, 1.0, 101);
  const std::uint64_t l_sift = cfg.count("rates.l_sift");
  const double delta = cfg.real("protocol.delta");
  const std::size_t workers = cfg.count("run.workers");
  const std::uint64_t axis = cfg.count("sweep.grid_points");

  for (const std::string& curve : cfg.list("rates.protocols")) {
    std::vector<std::string> rows;
    const char* header = kRatesColumns;
    if (curve == "bb84-gad" || curve == "dual-rail-gad") {
      header = kGridColumns;
      const std::vector<double> gs = linspace(gammas.front(), gammas.back(), axis);
      const std::vector<double> ps = linspace(0.0, 1.0, axis);
      rows = parallel_map(gs.size() * ps.size(), workers, [&](std::size_t i) {
        const double g = gs[i / ps.size()];
        const double p = ps[i % ps.size()];
        const ErrorRates rates =
            curve == "bb84-gad" ? bb84_rates_gad(g, p, delta) : gad_encoded_rates({g, p});
        const KeyRateReport r = make_report(rates, l_sift);
        return num(g) + "," + rates_row(p, r, "analytic");
      });
    } else {
      rows = parallel_map(gammas.size(), workers, [&](std::size_t i) {
        const double g = gammas[i];
        if (curve == "dual-rail") {
          const FaultSite fault{fault_of(cfg.text("protocol.fault")), cfg.real("protocol.beta")};
          return rates_row(g, encoded_key_rate(scheme_of(cfg), AdParams{g}, fault, l_sift), "oracle");
        }
        ProtocolConfig pc;
        pc.noise.gamma = g;
        pc.readout_delta = delta;
        if (curve == "b92") {
          pc.protocol = Protocol::b92;
        } else if (curve.rfind("bbm92", 0) == 0) {
          pc.protocol = Protocol::bbm92;
          if (curve == "bbm92-anticorrelated") pc.pair = PairType::anti_correlated;
          if (curve == "bbm92-alice") pc.distribution = Distribution::alice_sends;
          if (curve == "bbm92-asymmetric") {
            const double gb = cfg.optional_real("protocol.gamma_b").value_or(cfg.real("protocol.gamma"));
            pc.asymmetric = AsymmetricDamping{g, gb};
          }
        }
        return rates_row(g, key_report(pc, l_sift), "analytic");
      });
    }
    const std::filesystem::path file = dir / (curve + ".csv");
    std::ofstream out = open_output(file);
    out << header << "\n";
    for (const auto& row : rows) out << row << "\n";
    log << "wrote " << file.string() << " (" << rows.size() << " rows)\n";
  }
  cfg.write_ini(dir / "config.ini", "rates");
  return 0;
}

/// verify: prints one line per operation plus any failing or informational checks.
inline int run_verify(const Config& /*cfg*/, std::ostream& out, const ClosedForms& forms = {}) {
  const VerificationReport report = run_verification(forms);
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_op;
  for (const auto& c : report.checks) {
    auto& [total, failed] = per_op[c.operation];
    ++total;
    if (!c.passed && !c.informational) ++failed;
  }
  for (const auto& op : closed_form_operations()) {
    const auto [total, failed] = per_op[op];
    out << (total > 0 && failed == 0 ? "PASS " : "FAIL ") << op << ": " << total << " checks, "
        << failed << " failed\n";
  }
  for (const auto& c : report.checks) {
    if (c.informational) {
      if (!c.passed) {
        out << "INFO " << c.operation << " " << c.case_label << ": simulated " << num(c.expected)
            << ", closed form " << num(c.actual) << "\n";
      }
    } else if (!c.passed) {
      out << "MISMATCH " << c.operation << " " << c.case_label << ": simulated " << num(c.expected)
          << ", closed form " << num(c.actual) << " (tol " << num(c.tolerance) << ")\n";
    }
  }
  const bool covered = report.operations_covered().size() == closed_form_operations().size();
  const bool ok = report.all_passed() && covered;
  out << (ok ? "verify: all " : "verify: FAILED, ") << report.checks.size() << " checks, "
      << report.failures() << " failures\n";
  return ok ? 0 : 1;
}

inline HardwareProfile resolve_profile(const Config& cfg) {
  HardwareProfile profile;
  if (cfg.has("profile.file")) {
    profile = load_profile_file(cfg.text("profile.file"));
  } else {
    profile = *profiles::by_name(cfg.text("profile.name"));
  }
  if (const auto beta = cfg.optional_real("profile.cnot_beta")) {
    profile.cnot_beta = *beta;
  }
  return profile;
}

inline ShotTarget shot_target(const Config& cfg) {
  const std::string kind = cfg.text("protocol.kind");
  if (kind == "dual-rail") {
    return EncodedTarget{scheme_of(cfg)};
  }
  ProtocolConfig pc;
  pc.protocol = kind == "b92" ? Protocol::b92 : kind == "bbm92" ? Protocol::bbm92 : Protocol::bb84;
  if (cfg.text("protocol.noise") == "gad") {
    pc.noise = {NoiseKind::gad, 0.0, cfg.real("protocol.p")};
  }
  pc.pair = cfg.text("protocol.pair") == "anti-correlated" ? PairType::anti_correlated
                                                             : PairType::correlated;
  pc.distribution = cfg.text("protocol.distribution") == "alice-sends" ? Distribution::alice_sends
                                                                         : Distribution::charlie_midpoint;
  return pc;
}

/// shots: one row per identity-gate delay in shots.gates.
inline int run_shots(const Config& cfg, std::ostream& log) {
  const HardwareProfile profile = resolve_profile(cfg);
  const ShotTarget target = shot_target(cfg);
  ShotPlan base;
  base.shots_per_block = cfg.count("shots.shots_per_block");
  base.states = cfg.has("shots.states") ? cfg.list("shots.states") : default_states(target);
  base.seed = cfg.count("run.seed");
  base.mode = cfg.text("shots.mode") == "random" ? ShotMode::random : ShotMode::block;
  for (std::uint64_t q : cfg.count_list("shots.qubits")) base.qubits.push_back(q);
  base.fixed_gamma = cfg.optional_real("shots.gamma_override");
  base.readout_override = cfg.optional_real("shots.delta_override");
  const std::vector<std::uint64_t> gates = cfg.count_list("shots.gates");
  if (gates.empty()) {
    throw ConfigError("shots.gates is empty");
  }

  const std::vector<std::string> rows =
      parallel_map(gates.size(), cfg.count("run.workers"), [&](std::size_t i) {
        ShotPlan plan = base;
        plan.n_identity_gates = gates[i];
        const QberEstimate est = run_blocks(target, plan, profile);
        const KeyRateReport key = finite_key(est);
        return std::to_string(gates[i]) + "," + num(plan_gamma(target, plan, profile)) + "," +
               num(est.qber) + "," + num(est.phase_error) + "," + std::to_string(est.sifted_bits) +
               "," + std::to_string(key.l_sec) + ",montecarlo";
      });

  const std::filesystem::path file = output_path(cfg, "shots.csv");
  std::ofstream out = open_output(file);
  out << "# seed=" << base.seed << " profile=" << profile.name << "\n" << kShotsColumns << "\n";
  for (const auto& row : rows) out << row << "\n";
  write_sidecar(cfg, file, "shots");
  log << "wrote " << file.string() << " (" << rows.size() << " rows)\n";
  return 0;
}

/// sweep-beta: β sweep at fixed γ, one row per (β, fault site).
inline int run_sweep_beta(const Config& cfg, std::ostream& log) {
  const double gamma = cfg.real("protocol.gamma");
  const EncodingScheme scheme = scheme_of(cfg);
  if (cfg.text("protocol.noise") != "ad") {
    throw UnsupportedConfiguration("CNOT faults are only analysed under AD noise");
  }
  const std::vector<double> betas = sweep_grid(cfg, "beta", 0.0, 0.2, 41);
  std::vector<FaultLocation> sites{FaultLocation::encoder, FaultLocation::post_selection};
  if (scheme == EncodingScheme::ancilla) sites.push_back(FaultLocation::decoder);

  const std::vector<std::string> rows =
      parallel_map(betas.size() * sites.size(), cfg.count("run.workers"), [&](std::size_t i) {
        const FaultSite fault{sites[i % sites.size()], betas[i / sites.size()]};
        const AdParams ad{gamma};
        const auto joint = [&](const PureState& a, const PureState& b, bool z) {
          const EncodedRunResult ra = run_encoded(a, scheme, ad, fault);
          const EncodedRunResult rb = run_encoded(b, scheme, ad, fault);
          return z ? 0.5 * (ra.joint_error_z + rb.joint_error_z)
                   : 0.5 * (ra.joint_error_x + rb.joint_error_x);
        };
        const Table1Entry table = table1_rates(fault, gamma);
        const KeyRateReport r = encoded_key_rate(scheme, ad, fault);
        const double no_sift = secure_fraction({r.rates.e_b, r.rates.e_p, 1.0});
        double table_fraction = 0.0;
        if (!r.degenerate) {
          table_fraction = secure_fraction({std::min(1.0, table.e_b / r.rates.sift),
                                            std::min(1.0, table.e_p / r.rates.sift), r.rates.sift});
        }
        return num(fault.beta) + "," + std::string(to_string(fault.site)) + "," +
               num(joint(states::zero(), states::one(), true)) + "," +
               num(joint(states::plus(), states::minus(), false)) + "," + num(table.e_b) + "," +
               num(table.e_p) + "," + num(r.rates.e_b) + "," + num(r.rates.e_p) + "," +
               num(r.rates.sift) + "," + num(r.secure_fraction) + "," + num(no_sift) + "," +
               num(table_fraction) + ",oracle";
      });

  const std::filesystem::path file = output_path(cfg, "sweep_beta.csv");
  std::ofstream out = open_output(file);
  out << kSweepBetaColumns << "\n";
  for (const auto& row : rows) out << row << "\n";
  write_sidecar(cfg, file, "sweep-beta");
  log << "wrote " << file.string() << " (" << rows.size() << " rows)\n";
  return 0;
}

/// Runs a command, mapping configuration and precondition errors to status 2.
inline int run_command(const std::string& command, const Config& cfg, std::ostream& out,
                       std::ostream& err) {
  try {
    if (command == "rates") return run_rates(cfg, out);
    if (command == "verify") return run_verify(cfg, out);
    if (command == "shots") return run_shots(cfg, out);
    if (command == "sweep-beta") return run_sweep_beta(cfg, out);
    err << "unknown command '" << command << "'\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::out_of_range& e) {
    err << "config error: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace qkdsim::cli
