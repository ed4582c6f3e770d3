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

// Error rates and secure key rates for BB84, B92 and BBM92.
//
// Every protocol has two routes: closed-form expressions (bb84_rates_ad,
// b92_rates, bbm92_rates, ...) and simulate_protocol, which builds the states,
// runs them through the Kraus channels and evaluates the error traces. The two
// are kept independent so each checks the other.

#pragma once

#include "qkdsim/noise.hpp"
#include "qkdsim/qmat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qkdsim {

enum class Protocol { bb84, b92, bbm92 };
enum class NoiseKind { ad, gad };
enum class PairType { correlated, anti_correlated };
enum class Distribution { charlie_midpoint, alice_sends };

/// Thrown for protocol/noise combinations that have no derivation to check against.
class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct NoiseModel {
  NoiseKind kind = NoiseKind::ad;
  double gamma = 0.0;
  double p = 1.0;  // GAD only
};

/// Separate damping for the Charlie->Alice and Charlie->Bob links.
struct AsymmetricDamping {
  double gamma_a = 0.0;
  double gamma_b = 0.0;
};

/// For BBM92 with alice_sends, noise.gamma is the damping of a half-length
/// link; Bob's qubit sees doubled_delay_gamma(gamma).
struct ProtocolConfig {
  Protocol protocol = Protocol::bb84;
  NoiseModel noise{};
  double readout_delta = 0.0;
  PairType pair = PairType::correlated;
  Distribution distribution = Distribution::charlie_midpoint;
  std::optional<AsymmetricDamping> asymmetric;
};

struct ErrorRates {
  double e_b = 0.0;
  double e_p = 0.0;
  double sift = 1.0;
};

struct KeyRateReport {
  ErrorRates rates;
  double secure_fraction = 0.0;
  std::uint64_t l_sift = 0;
  std::uint64_t l_sec = 0;
  std::optional<ProtocolConfig> config;
  // Set when nothing survived sifting or post-selection.
  bool degenerate = false;
};

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::bb84: return "BB84";
    case Protocol::b92: return "B92";
    case Protocol::bbm92: return "BBM92";
  }
  return "?";
}

inline void validate(const ProtocolConfig& cfg) {
  require_probability(cfg.noise.gamma, "gamma");
  require_probability(cfg.noise.p, "p");
  require_probability(cfg.readout_delta, "readout_delta");
  if (cfg.noise.kind == NoiseKind::gad && cfg.protocol != Protocol::bb84) {
    throw UnsupportedConfiguration(std::string("GAD noise is only derived for BB84, not ") +
                                   std::string(to_string(cfg.protocol)));
  }
  if (cfg.protocol != Protocol::bbm92) {
    if (cfg.asymmetric) {
      throw UnsupportedConfiguration("asymmetric damping applies to BBM92 only");
    }
    return;
  }
  if (cfg.pair == PairType::anti_correlated && cfg.distribution == Distribution::alice_sends) {
    throw UnsupportedConfiguration("anti-correlated pairs with alice-sends are not derived");
  }
  if (cfg.asymmetric) {
    if (cfg.pair != PairType::correlated || cfg.distribution != Distribution::charlie_midpoint) {
      throw UnsupportedConfiguration(
          "asymmetric damping is only derived for correlated pairs distributed by Charlie");
    }
    require_probability(cfg.asymmetric->gamma_a, "gamma_a");
    require_probability(cfg.asymmetric->gamma_b, "gamma_b");
  }
}

/// -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0.
inline double binary_entropy(double x) {
  require_probability(x, "binary_entropy argument");
  if (x == 0.0 || x == 1.0) {
    return 0.0;
  }
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

inline double secure_fraction(const ErrorRates& r) {
  return std::max(0.0, r.sift * (1.0 - binary_entropy(r.e_b) - binary_entropy(r.e_p)));
}

inline ErrorRates bb84_rates_ad(double gamma, double delta) {
  require_probability(gamma, "gamma");
  require_probability(delta, "delta");
  const double root = std::sqrt(1.0 - gamma);
  return {gamma / 2.0 + delta * (1.0 - gamma), 0.5 * (1.0 + root * (2.0 * delta - 1.0)), 1.0};
}

// GAD leaves both the Z-basis error average and the X-basis coherence of the
// BB84 states unchanged relative to AD, so the rates do not depend on p.
inline ErrorRates bb84_rates_gad(double gamma, double p, double delta) {
  require_probability(p, "p");
  return bb84_rates_ad(gamma, delta);
}

inline ErrorRates b92_rates(double gamma, double delta) {
  require_probability(gamma, "gamma");
  require_probability(delta, "delta");
  const double root = std::sqrt(1.0 - gamma);
  return {delta, 0.5 * (1.0 + root * (2.0 * delta - 1.0)), 1.0};
}

namespace detail {

/// Error rate after both parties' independent readout flips with probability delta.
inline double with_two_sided_readout(double e, double delta) {
  const double flip = 2.0 * delta * (1.0 - delta);
  return e + flip * (1.0 - 2.0 * e);
}

}  // namespace detail

inline ErrorRates bbm92_rates(const ProtocolConfig& cfg) {
  if (cfg.protocol != Protocol::bbm92) {
    throw std::invalid_argument("bbm92_rates: config is not BBM92");
  }
  validate(cfg);
  const double g = cfg.noise.gamma;
  double e_b = 0.0;
  double e_p = 0.0;
  if (cfg.asymmetric) {
    const double ga = cfg.asymmetric->gamma_a;
    const double gb = cfg.asymmetric->gamma_b;
    e_b = 0.5 * (ga * (1.0 - gb) + gb * (1.0 - ga));
    e_p = 0.5 * (1.0 - std::sqrt((1.0 - ga) * (1.0 - gb)));
  } else if (cfg.distribution == Distribution::alice_sends) {
    e_b = g - g * g / 2.0;
    e_p = g / 2.0;
  } else if (cfg.pair == PairType::correlated) {
    e_b = g * (1.0 - g);
    e_p = g / 2.0;
  } else {
    e_b = g;
    e_p = g / 2.0;
  }
  return {detail::with_two_sided_readout(e_b, cfg.readout_delta),
          detail::with_two_sided_readout(e_p, cfg.readout_delta), 1.0};
}

/// Closed-form rates for any supported configuration.
inline ErrorRates closed_form_rates(const ProtocolConfig& cfg) {
  validate(cfg);
  switch (cfg.protocol) {
    case Protocol::bb84:
      return cfg.noise.kind == NoiseKind::gad
                 ? bb84_rates_gad(cfg.noise.gamma, cfg.noise.p, cfg.readout_delta)
                 : bb84_rates_ad(cfg.noise.gamma, cfg.readout_delta);
    case Protocol::b92:
      return b92_rates(cfg.noise.gamma, cfg.readout_delta);
    case Protocol::bbm92:
      return bbm92_rates(cfg);
  }
  throw std::invalid_argument("closed_form_rates: unknown protocol");
}

namespace detail {

inline KrausChannel single_link_channel(const NoiseModel& noise) {
  return noise.kind == NoiseKind::gad ? gad_channel({noise.gamma, noise.p})
                                      : ad_channel({noise.gamma});
}

inline double outcome(const DensityMatrix& rho, const MeasurementSet& m, const std::string& label) {
  return measure(rho, m).at(label);
}

/// Received two-qubit state (Alice = qubit 0, Bob = qubit 1) for BBM92.
inline DensityMatrix bbm92_received_state(const ProtocolConfig& cfg) {
  const DensityMatrix source = cfg.pair == PairType::correlated ? DensityMatrix(states::phi_plus())
                                                                : DensityMatrix(states::psi_minus());
  if (cfg.distribution == Distribution::alice_sends) {
    const double doubled = doubled_delay_gamma(cfg.noise.gamma);
    return apply_channel(source, ad_channel({doubled}).on({1}));
  }
  const double ga = cfg.asymmetric ? cfg.asymmetric->gamma_a : cfg.noise.gamma;
  const double gb = cfg.asymmetric ? cfg.asymmetric->gamma_b : cfg.noise.gamma;
  const DensityMatrix after_a = apply_channel(source, ad_channel({ga}).on({0}));
  return apply_channel(after_a, ad_channel({gb}).on({1}));
}

}  // namespace detail

/// First-principles rates: prepare states, apply channels, take traces against
/// the (possibly noisy) measurement operators.
inline ErrorRates simulate_protocol(const ProtocolConfig& cfg) {
  validate(cfg);
  const ReadoutParams readout{cfg.readout_delta};
  const MeasurementSet z = readout_povm(Basis::z, readout);
  const MeasurementSet x = readout_povm(Basis::x, readout);

  if (cfg.protocol == Protocol::bbm92) {
    const DensityMatrix rho = detail::bbm92_received_state(cfg);
    const auto zz = measure(rho, MeasurementSet::product(z, z));
    const auto xx = measure(rho, MeasurementSet::product(x, x));
    if (cfg.pair == PairType::correlated) {
      return {zz.at("01") + zz.at("10"), xx.at("+-") + xx.at("-+"), 1.0};
    }
    return {zz.at("00") + zz.at("11"), xx.at("++") + xx.at("--"), 1.0};
  }

  const KrausChannel link = detail::single_link_channel(cfg.noise);
  const DensityMatrix r0 = apply_channel(states::zero(), link);
  const DensityMatrix rp = apply_channel(states::plus(), link);
  if (cfg.protocol == Protocol::b92) {
    return {detail::outcome(r0, z, "1"), detail::outcome(rp, x, "-"), 1.0};
  }
  const DensityMatrix r1 = apply_channel(states::one(), link);
  const DensityMatrix rm = apply_channel(states::minus(), link);
  return {0.5 * (detail::outcome(r0, z, "1") + detail::outcome(r1, z, "0")),
          0.5 * (detail::outcome(rp, x, "-") + detail::outcome(rm, x, "+")), 1.0};
}

/// Secure key length l_sift * (1 - h(e_b) - h(e_p)), floored and clamped at zero.
inline std::uint64_t secure_length(std::uint64_t l_sift, const ErrorRates& r) {
  const double fraction = 1.0 - binary_entropy(r.e_b) - binary_entropy(r.e_p);
  if (fraction <= 0.0) {
    return 0;
  }
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(l_sift) * fraction));
}

inline KeyRateReport make_report(const ErrorRates& rates, std::uint64_t l_sift) {
  KeyRateReport report;
  report.rates = rates;
  report.secure_fraction = secure_fraction(rates);
  report.l_sift = l_sift;
  report.l_sec = secure_length(l_sift, rates);
  return report;
}

inline KeyRateReport key_report(const ProtocolConfig& cfg, std::uint64_t l_sift) {
  KeyRateReport report = make_report(closed_form_rates(cfg), l_sift);
  report.config = cfg;
  return report;
}

}  // namespace qkdsim
