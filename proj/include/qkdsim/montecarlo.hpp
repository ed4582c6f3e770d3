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

// Shot-level sampling of the QKD experiments on a modelled device.
//
// Each (prepared state, measurement basis) pair gets its exact outcome
// distribution from the density-matrix simulation once per run; shots then
// draw from it and apply an independent readout flip per measured qubit.
// Block b draws from its own generator seeded with splitmix64(seed ^ b), so
// results do not depend on how blocks are scheduled.

#pragma once

#include "qkdsim/dualrail.hpp"
#include "qkdsim/noise.hpp"
#include "qkdsim/protocols.hpp"
#include "qkdsim/qmat.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qkdsim {

struct QubitSpec {
  Microseconds t1{1.0};
  double readout_error = 0.0;
};

struct HardwareProfile {
  std::string name;
  std::vector<QubitSpec> qubits;
  Nanoseconds gate_time{0.0};
  double cnot_beta = 0.0;
  // True when the device data gave no gate time and a stand-in is used.
  bool gate_time_assumed = false;

  void validate() const {
    if (qubits.empty()) {
      throw std::invalid_argument("profile '" + name + "' has no qubits");
    }
    for (const QubitSpec& q : qubits) {
      if (!(q.t1.count() > 0.0)) {
        throw std::invalid_argument("profile '" + name + "': T1 must be positive");
      }
      require_probability(q.readout_error, "readout_error");
    }
    if (!(gate_time.count() >= 0.0)) {
      throw std::invalid_argument("profile '" + name + "': gate time must be non-negative");
    }
    require_probability(cnot_beta, "cnot_beta");
  }
};

namespace profiles {

inline HardwareProfile make(std::string name, const std::vector<double>& t1_us,
                            const std::vector<double>& readout, double gate_ns, bool assumed) {
  HardwareProfile p;
  p.name = std::move(name);
  for (std::size_t i = 0; i < t1_us.size(); ++i) {
    p.qubits.push_back({Microseconds(t1_us[i]), readout[i]});
  }
  p.gate_time = Nanoseconds(gate_ns);
  p.gate_time_assumed = assumed;
  return p;
}

/// Five-qubit device with short T1 and large readout errors.
inline HardwareProfile yorktown() {
  return make("yorktown", {44.33, 50.67, 70.27, 57.62, 56.94}, {0.107, 0.356, 0.079, 0.03, 0.054},
              35.6, false);
}

/// Five-qubit device with longer T1. No gate time was published; 35.6 ns is reused.
inline HardwareProfile bogota() {
  return make("bogota", {97.6, 218.2, 200.3, 111.3, 151.1}, {0.032, 0.0194, 0.0603, 0.05, 0.0178},
              35.6, true);
}

/// No damping (infinite T1) and no readout error.
inline HardwareProfile ideal(std::size_t n_qubits = 3) {
  HardwareProfile p;
  p.name = "ideal";
  p.qubits.assign(n_qubits, {Microseconds(std::numeric_limits<double>::infinity()), 0.0});
  p.gate_time = Nanoseconds(35.6);
  return p;
}

inline std::optional<HardwareProfile> by_name(const std::string& name) {
  if (name == "yorktown") return yorktown();
  if (name == "bogota") return bogota();
  if (name == "ideal") return ideal();
  return std::nullopt;
}

}  // namespace profiles

/// Dual-rail encoded BB84; rails sit on plan qubits 0 and 1, the ancilla on 2.
struct EncodedTarget {
  EncodingScheme scheme = EncodingScheme::ancilla;
};

using ShotTarget = std::variant<ProtocolConfig, EncodedTarget>;

enum class ShotMode { block, random };

/// State tokens are "0", "1", "+", "-" for prepare-and-measure and encoded
/// runs, and the shared basis "z" or "x" for BBM92.
struct ShotPlan {
  std::uint64_t shots_per_block = 8192;
  std::vector<std::string> states;
  std::size_t n_identity_gates = 0;
  std::uint64_t seed = 0;
  ShotMode mode = ShotMode::block;
  // Profile qubit indices used by the run; empty means 0, 1, 2, ...
  QubitList qubits;
  // Replaces the delay-derived damping on every link.
  std::optional<double> fixed_gamma;
  // Replaces every qubit's readout error.
  std::optional<double> readout_override;
};

struct QberEstimate {
  std::uint64_t shots = 0;
  std::uint64_t sifted_bits = 0;
  std::uint64_t sifted_z = 0;
  std::uint64_t sifted_x = 0;
  std::uint64_t errors_z = 0;
  std::uint64_t errors_x = 0;
  double qber = 0.0;
  double phase_error = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Default state sequences: one block per BB84 state, |0>,|+>,|0>,|+> for B92,
/// and z,z,x,x bases for BBM92.
inline std::vector<std::string> default_states(const ShotTarget& target) {
  if (const auto* cfg = std::get_if<ProtocolConfig>(&target)) {
    if (cfg->protocol == Protocol::b92) return {"0", "+", "0", "+"};
    if (cfg->protocol == Protocol::bbm92) return {"z", "z", "x", "x"};
  }
  return {"0", "1", "+", "-"};
}

namespace detail {

struct Preparation {
  Basis basis = Basis::z;
  int bit = 0;
};

inline Preparation parse_state(const std::string& token) {
  if (token == "0") return {Basis::z, 0};
  if (token == "1") return {Basis::z, 1};
  if (token == "+") return {Basis::x, 0};
  if (token == "-") return {Basis::x, 1};
  throw std::invalid_argument("unknown state '" + token + "' (expected 0, 1, + or -)");
}

inline Basis parse_basis(const std::string& token) {
  if (token == "z") return Basis::z;
  if (token == "x") return Basis::x;
  throw std::invalid_argument("unknown basis '" + token + "' (expected z or x)");
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Outcome distribution of the measured qubits (first = most significant bit),
/// with the given qubits rotated into the X basis first.
inline std::vector<double> outcome_distribution(DensityMatrix rho, const QubitList& measured,
                                                const std::vector<Basis>& bases) {
  const std::size_t n = rho.num_qubits();
  for (std::size_t k = 0; k < measured.size(); ++k) {
    if (bases[k] == Basis::x) {
      rho = apply_unitary(rho, gates::hadamard(), {measured[k]});
    }
  }
  std::vector<double> dist(std::size_t{1} << measured.size(), 0.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(rho.dim()); ++i) {
    dist[gather_bits(i, measured, n)] += std::max(0.0, rho.population(i));
  }
  double total = 0.0;
  for (double p : dist) total += p;
  for (double& p : dist) p /= total;
  return dist;
}

/// One measurement setting: outcome distribution plus the classical rule that
/// turns sampled (noisy) bits into sifted / error counts.
struct Setting {
  Basis basis = Basis::z;
  std::vector<double> cumulative;
  std::vector<double> readout;  // flip probability per measured bit
  // Encoded runs: index of the flag bit that must read 1 to be kept.
  std::optional<std::size_t> flag_bit;
  std::size_t key_bit = 0;
  // Bit value that counts as correct, or for pairs: whether bits must agree.
  int expected = 0;
  bool pair = false;
  bool pair_agree = true;
};

inline Setting finish(std::vector<double> dist, Setting s) {
  double acc = 0.0;
  s.cumulative.clear();
  for (double p : dist) {
    acc += p;
    s.cumulative.push_back(acc);
  }
  return s;
}

class Sampler {
 public:
  Sampler(const ShotTarget& target, const ShotPlan& plan, const HardwareProfile& profile)
      : target_(target), plan_(plan), profile_(profile) {}

  std::size_t physical(std::size_t logical) const {
    const std::size_t q = plan_.qubits.empty() ? logical : plan_.qubits.at(logical);
    if (q >= profile_.qubits.size()) {
      throw std::invalid_argument("qubit " + std::to_string(q) + " is not in profile '" +
                                  profile_.name + "'");
    }
    return q;
  }

  double gamma_for(std::size_t logical, std::size_t gates) const {
    return gamma_from_delay({profile_.qubits[physical(logical)].t1, profile_.gate_time, gates});
  }

  double link_gamma(std::size_t logical, std::size_t multiplier = 1) const {
    if (plan_.fixed_gamma) {
      const double g = *plan_.fixed_gamma;
      return multiplier == 2 ? doubled_delay_gamma(g) : g;
    }
    return gamma_for(logical, plan_.n_identity_gates * multiplier);
  }

  double delta(std::size_t logical) const {
    return plan_.readout_override ? *plan_.readout_override
                                  : profile_.qubits[physical(logical)].readout_error;
  }

  Setting prepare_measure(const ProtocolConfig& cfg, Preparation prep, Basis bob) const {
    NoiseModel noise = cfg.noise;
    noise.gamma = link_gamma(0);
    const PureState psi = prep.basis == Basis::z ? (prep.bit ? states::one() : states::zero())
                                                 : (prep.bit ? states::minus() : states::plus());
    const DensityMatrix rho = apply_channel(psi, single_link_channel(noise));
    Setting s;
    s.basis = bob;
    s.readout = {delta(0)};
    s.expected = prep.bit;
    return finish(outcome_distribution(rho, {0}, {bob}), s);
  }

  Setting pair(const ProtocolConfig& cfg, Basis basis) const {
    DensityMatrix rho = DensityMatrix(PureState::basis(2, 0));
    if (cfg.pair == PairType::anti_correlated) {
      rho = DensityMatrix(PureState::basis(2, 3));
    }
    rho = apply_unitary(rho, gates::hadamard(), {0});
    rho = noisy_cnot(rho, {profile_.cnot_beta, 0, 1});
    if (cfg.distribution == Distribution::alice_sends) {
      rho = apply_channel(rho, ad_channel({link_gamma(1, 2)}).on({1}));
    } else {
      rho = apply_channel(rho, ad_channel({link_gamma(0)}).on({0}));
      rho = apply_channel(rho, ad_channel({link_gamma(1)}).on({1}));
    }
    Setting s;
    s.basis = basis;
    s.readout = {delta(0), delta(1)};
    s.pair = true;
    s.pair_agree = cfg.pair == PairType::correlated;
    return finish(outcome_distribution(rho, {0, 1}, {basis, basis}), s);
  }

  Setting encoded(const EncodedTarget& t, Preparation prep, Basis bob) const {
    CircuitNoise noise;
    noise.rail0 = ad_channel({link_gamma(0)});
    noise.rail1 = ad_channel({link_gamma(1)});
    noise.cnot_beta.fill(profile_.cnot_beta);
    const PureState psi = prep.basis == Basis::z ? (prep.bit ? states::one() : states::zero())
                                                 : (prep.bit ? states::minus() : states::plus());
    const EncodedRegister reg = encoded_register(psi, t.scheme, noise);
    const std::size_t flag_logical = t.scheme == EncodingScheme::ancilla ? 2 : 1;
    Setting s;
    s.basis = bob;
    s.readout = {delta(0), delta(flag_logical)};
    s.key_bit = 0;
    s.flag_bit = 1;
    s.expected = prep.bit;
    return finish(outcome_distribution(reg.rho, {reg.decoded_qubit, reg.flag_qubit}, {bob, Basis::z}),
                  s);
  }

  /// Setting for a prepared token measured in `bob`'s basis.
  Setting setting(const std::string& token, Basis bob) const {
    if (const auto* cfg = std::get_if<ProtocolConfig>(&target_)) {
      if (cfg->protocol == Protocol::bbm92) {
        return pair(*cfg, bob);
      }
      return prepare_measure(*cfg, parse_state(token), bob);
    }
    return encoded(std::get<EncodedTarget>(target_), parse_state(token), bob);
  }

 private:
  const ShotTarget& target_;
  const ShotPlan& plan_;
  const HardwareProfile& profile_;
};

struct Tally {
  std::uint64_t shots = 0;
  std::uint64_t sifted_z = 0;
  std::uint64_t sifted_x = 0;
  std::uint64_t errors_z = 0;
  std::uint64_t errors_x = 0;

  Tally& operator+=(const Tally& o) {
    shots += o.shots;
    sifted_z += o.sifted_z;
    sifted_x += o.sifted_x;
    errors_z += o.errors_z;
    errors_x += o.errors_x;
    return *this;
  }
};

inline std::size_t draw(const std::vector<double>& cumulative, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  for (std::size_t i = 0; i + 1 < cumulative.size(); ++i) {
    if (u < cumulative[i]) return i;
  }
  return cumulative.size() - 1;
}

inline void shoot(const Setting& s, std::mt19937_64& rng, Tally& tally) {
  const std::size_t raw = draw(s.cumulative, rng);
  const std::size_t width = s.readout.size();
  std::array<int, 2> bits{};
  for (std::size_t k = 0; k < width; ++k) {
    bits[k] = static_cast<int>((raw >> (width - 1 - k)) & 1U);
    if (uniform01(rng) < s.readout[k]) bits[k] ^= 1;
  }
  ++tally.shots;
  if (s.flag_bit && bits[*s.flag_bit] != 1) {
    return;
  }
  bool error = false;
  if (s.pair) {
    error = (bits[0] == bits[1]) != s.pair_agree;
  } else {
    error = bits[s.key_bit] != s.expected;
  }
  if (s.basis == Basis::z) {
    ++tally.sifted_z;
    tally.errors_z += error ? 1 : 0;
  } else {
    ++tally.sifted_x;
    tally.errors_x += error ? 1 : 0;
  }
}

}  // namespace detail

/// γ seen by the first link of the plan at its delay.
inline double plan_gamma(const ShotTarget& target, const ShotPlan& plan,
                         const HardwareProfile& profile) {
  return detail::Sampler(target, plan, profile).link_gamma(0);
}

/// Samples every block of the plan. In block mode each state token is one block
/// measured in its own basis; in random mode each shot picks a token and a
/// measurement basis uniformly and keeps only matching bases.
inline QberEstimate run_blocks(const ShotTarget& target, const ShotPlan& plan,
                               const HardwareProfile& profile, std::size_t workers = 1) {
  profile.validate();
  if (plan.shots_per_block == 0) {
    throw std::invalid_argument("shots_per_block must be at least 1");
  }
  if (plan.fixed_gamma) require_probability(*plan.fixed_gamma, "gamma override");
  if (plan.readout_override) require_probability(*plan.readout_override, "readout override");
  if (const auto* cfg = std::get_if<ProtocolConfig>(&target)) {
    validate(*cfg);
    if (cfg->asymmetric) {
      throw UnsupportedConfiguration("asymmetric damping comes from the profile in shot runs");
    }
  }
  const std::vector<std::string>& tokens = plan.states;
  if (tokens.empty()) {
    throw std::invalid_argument("shot plan has no states");
  }

  const auto* cfg = std::get_if<ProtocolConfig>(&target);
  const bool is_pair = cfg != nullptr && cfg->protocol == Protocol::bbm92;
  const detail::Sampler sampler(target, plan, profile);

  // Settings indexed by [token][basis]; BBM92 tokens are bases themselves.
  std::vector<std::array<detail::Setting, 2>> settings;
  for (const std::string& token : tokens) {
    if (is_pair) {
      detail::parse_basis(token);
    }
    settings.push_back({sampler.setting(token, Basis::z), sampler.setting(token, Basis::x)});
  }
  const auto prepared_basis = [&](std::size_t t) {
    return is_pair ? detail::parse_basis(tokens[t]) : detail::parse_state(tokens[t]).basis;
  };

  const auto run_block = [&](std::size_t b) {
    std::mt19937_64 rng(splitmix64(plan.seed ^ static_cast<std::uint64_t>(b)));
    detail::Tally tally;
    for (std::uint64_t shot = 0; shot < plan.shots_per_block; ++shot) {
      if (plan.mode == ShotMode::block) {
        const Basis basis = prepared_basis(b);
        detail::shoot(settings[b][basis == Basis::x ? 1 : 0], rng, tally);
        continue;
      }
      const auto t = std::min<std::size_t>(
          static_cast<std::size_t>(detail::uniform01(rng) * static_cast<double>(tokens.size())),
          tokens.size() - 1);
      const Basis alice = is_pair ? (detail::uniform01(rng) < 0.5 ? Basis::z : Basis::x)
                                  : prepared_basis(t);
      const Basis bob = detail::uniform01(rng) < 0.5 ? Basis::z : Basis::x;
      if (alice != bob) {
        ++tally.shots;
        continue;
      }
      detail::shoot(settings[t][bob == Basis::x ? 1 : 0], rng, tally);
    }
    return tally;
  };

  const std::size_t n_blocks = tokens.size();
  std::vector<detail::Tally> tallies(n_blocks);
  const std::size_t pool = std::max<std::size_t>(1, std::min(workers, n_blocks));
  if (pool == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) tallies[b] = run_block(b);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < pool; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t b = w; b < n_blocks; b += pool) tallies[b] = run_block(b);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  detail::Tally total;
  for (const auto& t : tallies) total += t;
  QberEstimate est;
  est.shots = total.shots;
  est.sifted_z = total.sifted_z;
  est.sifted_x = total.sifted_x;
  est.sifted_bits = total.sifted_z + total.sifted_x;
  est.errors_z = total.errors_z;
  est.errors_x = total.errors_x;
  est.qber = est.sifted_z ? static_cast<double>(est.errors_z) / static_cast<double>(est.sifted_z) : 0.0;
  est.phase_error =
      est.sifted_x ? static_cast<double>(est.errors_x) / static_cast<double>(est.sifted_x) : 0.0;
  return est;
}

/// Key length from observed counts; a run with nothing sifted gives a
/// degenerate zero report.
inline KeyRateReport finite_key(const QberEstimate& est) {
  if (est.sifted_bits == 0) {
    KeyRateReport report;
    report.rates = {0.0, 0.0, 0.0};
    report.degenerate = true;
    return report;
  }
  if (est.errors_z > est.sifted_z || est.errors_x > est.sifted_x) {
    throw std::invalid_argument("finite_key: more errors than sifted bits");
  }
  const double sift =
      est.shots ? static_cast<double>(est.sifted_bits) / static_cast<double>(est.shots) : 1.0;
  return make_report({est.qber, est.phase_error, sift}, est.sifted_bits);
}

}  // namespace qkdsim
