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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include "cli/commands.hpp"
#include "qkdsim/qkdsim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace qkdsim;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

std::vector<double> gamma_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 100; ++i) g.push_back(i / 100.0);
  return g;
}

ProtocolConfig bbm92(PairType pair, Distribution dist, double gamma, double delta = 0.0) {
  ProtocolConfig c;
  c.protocol = Protocol::bbm92;
  c.pair = pair;
  c.distribution = dist;
  c.noise.gamma = gamma;
  c.readout_delta = delta;
  return c;
}

Outcome oracle_equivalence() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> half(0.0, 0.5);
  const std::vector<std::pair<std::string, std::function<ProtocolConfig()>>> families = {
      {"bb84-ad", [&] {
         ProtocolConfig c;
         c.noise.gamma = u(rng);
         c.readout_delta = half(rng);
         return c;
       }},
      {"bb84-gad", [&] {
         ProtocolConfig c;
         c.noise = {NoiseKind::gad, u(rng), u(rng)};
         c.readout_delta = half(rng);
         return c;
       }},
      {"b92", [&] {
         ProtocolConfig c;
         c.protocol = Protocol::b92;
         c.noise.gamma = u(rng);
         c.readout_delta = half(rng);
         return c;
       }},
      {"bbm92-correlated",
       [&] { return bbm92(PairType::correlated, Distribution::charlie_midpoint, u(rng), half(rng)); }},
      {"bbm92-anticorrelated",
       [&] { return bbm92(PairType::anti_correlated, Distribution::charlie_midpoint, u(rng), half(rng)); }},
      {"bbm92-alice",
       [&] { return bbm92(PairType::correlated, Distribution::alice_sends, u(rng), half(rng)); }},
      {"bbm92-asymmetric", [&] {
         ProtocolConfig c = bbm92(PairType::correlated, Distribution::charlie_midpoint, 0.0, half(rng));
         c.asymmetric = AsymmetricDamping{u(rng), u(rng)};
         return c;
       }},
  };
  double worst = 0.0;
  for (const auto& [name, draw] : families) {
    for (int i = 0; i < 100; ++i) {
      const ProtocolConfig cfg = draw();
      const ErrorRates sim = simulate_protocol(cfg);
      const ErrorRates cf = closed_form_rates(cfg);
      const double diff = std::max(std::abs(sim.e_b - cf.e_b), std::abs(sim.e_p - cf.e_p));
      worst = std::max(worst, diff);
      o.require(diff <= 1e-10, name + fmt(" draw %g differs by %.3g", i, diff));
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 5.0, fmt("took %.2f s", elapsed));
  if (o.ok) o.detail = fmt("7 families x 100 draws, max diff %.2g, %.2f s", worst, elapsed);
  return o;
}

Outcome phase_error_sign() {
  Outcome o;
  double last = -1.0;
  for (double g : gamma_grid()) {
    const double expected = 0.5 * (1.0 - std::sqrt(1.0 - g));
    ProtocolConfig bb84;
    bb84.noise.gamma = g;
    ProtocolConfig b92 = bb84;
    b92.protocol = Protocol::b92;
    const double e_bb84 = simulate_protocol(bb84).e_p;
    const double e_b92 = simulate_protocol(b92).e_p;
    o.require(std::abs(e_bb84 - expected) <= 1e-10, fmt("BB84 e_p at gamma %g: %.12g", g, e_bb84));
    o.require(std::abs(e_b92 - expected) <= 1e-10, fmt("B92 e_p at gamma %g: %.12g", g, e_b92));
    o.require(std::abs(bb84_rates_ad(g, 0.0).e_p - expected) <= 1e-10,
              fmt("closed-form e_p at gamma %g", g));
    o.require(e_bb84 > last, fmt("e_p not increasing at gamma %g", g));
    last = e_bb84;
  }
  ProtocolConfig at;
  at.noise.gamma = 0.36;
  const double e036 = simulate_protocol(at).e_p;
  o.require(std::abs(e036 - 0.1) <= 1e-10, fmt("e_p(0.36) = %.12g", e036));
  at.noise.gamma = 0.0;
  o.require(std::abs(simulate_protocol(at).e_p) <= 1e-12, "e_p(0) is not 0");
  if (o.ok) o.detail = fmt("e_p(0.36) = %.12g, e_p(0) = 0, increasing on 101 points", e036);
  return o;
}

Outcome bbm92_identities() {
  Outcome o;
  for (double g : gamma_grid()) {
    const struct {
      const char* name;
      ProtocolConfig cfg;
      double e_b;
    } cases[] = {
        {"correlated", bbm92(PairType::correlated, Distribution::charlie_midpoint, g), g * (1.0 - g)},
        {"anti-correlated", bbm92(PairType::anti_correlated, Distribution::charlie_midpoint, g), g},
        {"alice-sends", bbm92(PairType::correlated, Distribution::alice_sends, g), g - g * g / 2.0},
    };
    for (const auto& c : cases) {
      for (const ErrorRates& r : {simulate_protocol(c.cfg), bbm92_rates(c.cfg)}) {
        o.require(std::abs(r.e_b - c.e_b) <= 1e-10, std::string(c.name) + fmt(" e_b at gamma %g", g));
        o.require(std::abs(r.e_p - g / 2.0) <= 1e-10, std::string(c.name) + fmt(" e_p at gamma %g", g));
      }
    }
    ProtocolConfig asym = bbm92(PairType::correlated, Distribution::charlie_midpoint, g);
    const ErrorRates sym = bbm92_rates(asym);
    asym.asymmetric = AsymmetricDamping{g, g};
    const ErrorRates reduced = bbm92_rates(asym);
    o.require(std::abs(reduced.e_b - sym.e_b) <= 1e-12 && std::abs(reduced.e_p - sym.e_p) <= 1e-12,
              fmt("asymmetric does not reduce at gamma %g", g));
  }
  if (o.ok) o.detail = "3 configurations on 101 points, asymmetric reduction within 1e-12";
  return o;
}

Outcome ordering() {
  Outcome o;
  std::size_t violations = 0;
  for (double g : gamma_grid()) {
    ProtocolConfig bb84;
    bb84.noise.gamma = g;
    ProtocolConfig b92 = bb84;
    b92.protocol = Protocol::b92;
    const double f_bb84 = secure_fraction(closed_form_rates(bb84));
    const double f_b92 = secure_fraction(closed_form_rates(b92));
    const double f_corr =
        secure_fraction(bbm92_rates(bbm92(PairType::correlated, Distribution::charlie_midpoint, g)));
    const double f_anti =
        secure_fraction(bbm92_rates(bbm92(PairType::anti_correlated, Distribution::charlie_midpoint, g)));
    const double f_alice =
        secure_fraction(bbm92_rates(bbm92(PairType::correlated, Distribution::alice_sends, g)));
    const double f_dual = encoded_key_rate(EncodingScheme::ancilla, AdParams{g}, {}).secure_fraction;
    const bool row = f_b92 >= f_bb84 && f_corr >= f_anti && f_corr >= f_alice && 1.0 - g >= f_bb84 &&
                     std::abs(f_dual - (1.0 - g)) <= 1e-12;
    if (!row) ++violations;
    o.require(row, fmt("ordering violated at gamma %g", g));
  }
  if (o.ok) o.detail = "0 violations on 101 points";
  else o.detail += fmt(" (%g violations)", static_cast<double>(violations));
  return o;
}

Outcome dual_rail_identity() {
  Outcome o;
  std::mt19937_64 rng(2002);
  std::normal_distribution<double> normal;
  double worst_fid = 1.0;
  double worst_pass = 0.0;
  for (EncodingScheme scheme : {EncodingScheme::ancilla, EncodingScheme::optimal}) {
    for (double g : {0.1, 0.3, 0.5, 0.9}) {
      for (int i = 0; i < 100; ++i) {
        ComplexVector v(2);
        v << Complex(normal(rng), normal(rng)), Complex(normal(rng), normal(rng));
        const PureState psi(v / v.norm());
        const EncodedRunResult r = run_encoded(psi, scheme, AdParams{g}, {});
        if (!r.survived()) {
          o.require(false, fmt("no conditional state at gamma %g", g));
          continue;
        }
        const double f = fidelity(*r.conditional_state, psi);
        worst_fid = std::min(worst_fid, f);
        worst_pass = std::max(worst_pass, std::abs(r.pass_probability - (1.0 - g)));
        o.require(f >= 1.0 - 1e-10, std::string(to_string(scheme)) + fmt(" fidelity %.15g", f));
        o.require(std::abs(r.pass_probability - (1.0 - g)) <= 1e-12,
                  std::string(to_string(scheme)) + fmt(" pass %.15g at gamma %g", r.pass_probability, g));
      }
    }
  }
  if (o.ok) {
    o.detail = fmt("800 runs, min fidelity %.15g, max pass deviation %.2g", worst_fid, worst_pass);
  }
  return o;
}

Outcome table1() {
  Outcome o;
  const auto joint = [](FaultSite fault, double g, bool z) {
    const PureState a = z ? states::zero() : states::plus();
    const PureState b = z ? states::one() : states::minus();
    const EncodedRunResult ra = run_encoded(a, EncodingScheme::ancilla, AdParams{g}, fault);
    const EncodedRunResult rb = run_encoded(b, EncodingScheme::ancilla, AdParams{g}, fault);
    return z ? 0.5 * (ra.joint_error_z + rb.joint_error_z) : 0.5 * (ra.joint_error_x + rb.joint_error_x);
  };
  std::string decoder_log;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double beta = 0.05 * i;
      const double g = 0.25 * j;
      for (FaultLocation site :
           {FaultLocation::encoder, FaultLocation::post_selection, FaultLocation::decoder}) {
        const FaultSite fault{site, beta};
        const Table1Entry t = table1_rates(fault, g);
        const std::string where = std::string(to_string(site)) + fmt(" beta %g gamma %g", beta, g);
        o.require(std::abs(joint(fault, g, true) - t.e_b) <= 1e-10, where + " e_b");
        if (site != FaultLocation::decoder) {
          o.require(std::abs(joint(fault, g, false) - t.e_p) <= 1e-10, where + " e_p");
        } else if (i == 2 && j == 2) {
          decoder_log = fmt("decoder e_p at beta 0.1, gamma 0.5: simulated %.12g, tabulated %.12g",
                            joint(fault, g, false), t.e_p);
        }
      }
    }
  }
  if (o.ok) o.detail = "3 e_b and 2 e_p entries on 5x5 grid; " + decoder_log;
  return o;
}

Outcome gad_dual_rail() {
  Outcome o;
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double g = i / 20.0;
      const double p = j / 20.0;
      const double sift = 1.0 - g + 2.0 * p * g * g - 2.0 * p * p * g * g;
      for (EncodingScheme scheme : {EncodingScheme::ancilla, EncodingScheme::optimal}) {
        const KeyRateReport r = encoded_key_rate(scheme, GadParams{g, p}, {});
        worst = std::max(worst, std::abs(r.rates.sift - sift));
        o.require(std::abs(r.rates.sift - sift) <= 1e-10, fmt("sift at gamma %g p %g", g, p));
        if (sift < kZeroProbability) continue;
        const double e = p * g * g * (1.0 - p) / sift;
        worst = std::max({worst, std::abs(r.rates.e_b - e), std::abs(r.rates.e_p - e)});
        o.require(std::abs(r.rates.e_b - e) <= 1e-10 && std::abs(r.rates.e_p - e) <= 1e-10,
                  fmt("e at gamma %g p %g", g, p));
        if (j == 0 || j == 20) {
          o.require(r.rates.e_b == 0.0 && r.rates.e_p == 0.0, fmt("nonzero error at p %g", p));
        }
      }
    }
  }
  if (o.ok) o.detail = fmt("21x21 grid, both schemes, max diff %.2g", worst);
  return o;
}

Outcome key_length() {
  Outcome o;
  const std::uint64_t l11 = secure_length(32768, {0.11, 0.11, 1.0});
  const std::uint64_t l0 = secure_length(32768, {0.0, 0.0, 1.0});
  const std::uint64_t l2 = secure_length(32768, {0.2, 0.2, 1.0});
  o.require(l11 == 5, fmt("l_sec(0.11) = %g", static_cast<double>(l11)));
  o.require(l0 == 32768, fmt("l_sec(0) = %g", static_cast<double>(l0)));
  o.require(l2 == 0, fmt("l_sec(0.2) = %g", static_cast<double>(l2)));
  if (o.ok) o.detail = "l_sec = 5, 32768, 0";
  return o;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome monte_carlo() {
  Outcome o;
  const auto t0 = Clock::now();
  const HardwareProfile ideal = profiles::ideal();
  std::string summary;
  for (double g : {0.0, 0.1, 0.3}) {
    const double expected = bb84_rates_ad(g, 0.0).e_b;
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      ShotPlan plan;
      plan.shots_per_block = 8192;  // 4 blocks: 32768 shots per point
      plan.states = {"0", "1", "+", "-"};
      plan.seed = seed;
      plan.fixed_gamma = g;
      const QberEstimate est = run_blocks(ProtocolConfig{}, plan, ideal);
      const double sigma =
          std::sqrt(expected * (1.0 - expected) / static_cast<double>(est.sifted_z));
      if (est.shots == 32768 && std::abs(est.qber - expected) <= 3.0 * sigma) ++within;
    }
    o.require(within >= 19, fmt("gamma %g: %g/20 within 3 sigma", g, within));
    summary += fmt("gamma %g: %g/20; ", g, within);
  }

  const auto dir = std::filesystem::temp_directory_path() / "qkdsim_acceptance";
  std::filesystem::create_directories(dir);
  std::string csv[2];
  for (int k = 0; k < 2; ++k) {
    cli::Config cfg;
    cfg.set("shots.shots_per_block", "8192");
    cfg.set("run.seed", "12345");
    cfg.set("output.path", (dir / ("run" + std::to_string(k) + ".csv")).string());
    std::ostringstream log;
    std::ostringstream err;
    o.require(cli::run_command("shots", cfg, log, err) == 0, "shots command failed: " + err.str());
    csv[k] = read_file(dir / ("run" + std::to_string(k) + ".csv"));
  }
  std::filesystem::remove_all(dir);
  o.require(!csv[0].empty() && csv[0] == csv[1], "fixed-seed CSVs differ");

  const double elapsed = seconds_since(t0);
  o.require(elapsed < 60.0, fmt("campaign took %.2f s", elapsed));
  if (o.ok) o.detail = summary + fmt("identical CSVs, %.2f s", elapsed);
  return o;
}

Outcome delay_mapping() {
  Outcome o;
  const double g = gamma_from_delay({Microseconds(57.62), Nanoseconds(35.6), 1000});
  o.require(std::abs(g - 0.46087) <= 1e-4, fmt("gamma = %.12g", g));
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> t1(10.0, 300.0);
  std::uniform_real_distribution<double> gate(1.0, 100.0);
  std::uniform_int_distribution<std::size_t> n(0, 5000);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const DampingSchedule s{Microseconds(t1(rng)), Nanoseconds(gate(rng)), n(rng)};
    const DampingSchedule twice{s.t1, s.gate_time, 2 * s.n_gates};
    const double diff = std::abs(doubled_delay_gamma(gamma_from_delay(s)) - gamma_from_delay(twice));
    worst = std::max(worst, diff);
  }
  o.require(worst <= 1e-12, fmt("doubling differs by %.3g", worst));
  if (o.ok) o.detail = fmt("gamma = %.12g, doubling max diff %.2g", g, worst);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"phase error sign", phase_error_sign},
      {"BBM92 identities", bbm92_identities},
      {"ordering", ordering},
      {"dual-rail conditional identity", dual_rail_identity},
      {"faulty-CNOT table", table1},
      {"GAD dual-rail", gad_dual_rail},
      {"key length", key_length},
      {"Monte Carlo convergence", monte_carlo},
      {"delay mapping", delay_mapping},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome result;
    try {
      result = criteria[i].second();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    if (!result.ok) ++failed;
    std::printf("%s %zu %s: %s\n", result.ok ? "PASS" : "FAIL", i + 1, criteria[i].first,
                result.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
