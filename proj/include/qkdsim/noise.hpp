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

// Noise channels: amplitude damping (AD), generalized amplitude damping (GAD),
// their dual-rail products, the imperfect CNOT, noisy readout, and the
// mapping from idle time to damping probability.

#pragma once

#include "qkdsim/qmat.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkdsim {

using Microseconds = std::chrono::duration<double, std::micro>;
using Nanoseconds = std::chrono::duration<double, std::nano>;
using Seconds = std::chrono::duration<double>;

inline void require_probability(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " +
                                std::to_string(value));
  }
}

struct AdParams {
  double gamma = 0.0;
};

/// p = 1 is plain amplitude damping; p = 0 is pure excitation.
struct GadParams {
  double gamma = 0.0;
  double p = 1.0;
};

struct NoisyCnotParams {
  double beta = 0.0;
  std::size_t control = 0;
  std::size_t target = 1;
};

struct ReadoutParams {
  double delta = 0.0;
};

struct DampingSchedule {
  Microseconds t1{1.0};
  Nanoseconds gate_time{0.0};
  std::size_t n_gates = 0;

  Nanoseconds idle_time() const { return gate_time * static_cast<double>(n_gates); }
};

enum class Basis { z, x };

inline ComplexMatrix ad_a0(double gamma) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = std::sqrt(1.0 - gamma);
  return m;
}

inline ComplexMatrix ad_a1(double gamma) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = std::sqrt(gamma);
  return m;
}

/// {diag(1, sqrt(1-γ)), sqrt(γ)|0><1|} on qubit 0.
inline KrausChannel ad_channel(AdParams params) {
  require_probability(params.gamma, "gamma");
  return KrausChannel({ad_a0(params.gamma), ad_a1(params.gamma)}, {0});
}

/// Four operators; A2 and A3 carry the sqrt(1-p) weight and vanish at p = 1.
inline KrausChannel gad_channel(GadParams params) {
  require_probability(params.gamma, "gamma");
  require_probability(params.p, "p");
  const double g = params.gamma;
  const double sp = std::sqrt(params.p);
  const double sq = std::sqrt(1.0 - params.p);
  ComplexMatrix a2 = ComplexMatrix::Zero(2, 2);
  a2(0, 0) = std::sqrt(1.0 - g);
  a2(1, 1) = 1.0;
  ComplexMatrix a3 = ComplexMatrix::Zero(2, 2);
  a3(1, 0) = std::sqrt(g);
  return KrausChannel({sp * ad_a0(g), sp * ad_a1(g), sq * a2, sq * a3}, {0});
}

/// Independent channels on qubits 0 and 1. Operator k is
/// first[k % m] ⊗ second[k / m] with m = |first|, which reproduces the
/// labelling M1|10> = sqrt(γ)|00>, M2|01> = sqrt(γ)|00> used for dual-rail AD.
inline KrausChannel product_channel(const KrausChannel& first, const KrausChannel& second) {
  if (first.num_qubits() != 1 || second.num_qubits() != 1) {
    throw std::invalid_argument("product_channel: both factors must be single-qubit");
  }
  std::vector<ComplexMatrix> ops;
  ops.reserve(first.operators().size() * second.operators().size());
  for (const auto& b : second.operators()) {
    for (const auto& a : first.operators()) {
      ops.push_back(tensor(a, b));
    }
  }
  return KrausChannel(std::move(ops), {0, 1});
}

inline KrausChannel dual_rail_ad(AdParams params) {
  const KrausChannel single = ad_channel(params);
  return product_channel(single, single);
}

inline KrausChannel dual_rail_gad(GadParams params) {
  const KrausChannel single = gad_channel(params);
  return product_channel(single, single);
}

/// (1-β) CNOT rho CNOT† + β (I/4 on {control, target}) ⊗ (rest of rho).
inline DensityMatrix noisy_cnot(const DensityMatrix& rho, NoisyCnotParams params) {
  require_probability(params.beta, "beta");
  if (params.control == params.target) {
    throw std::invalid_argument("noisy_cnot: control and target must differ");
  }
  const std::size_t n = rho.num_qubits();
  const QubitList pair{params.control, params.target};
  const ComplexMatrix ideal = apply_unitary(rho, gates::cnot(), pair).matrix();
  if (params.beta == 0.0) {
    return DensityMatrix(ideal);
  }

  const QubitList spectators = detail::complement(pair, n);
  ComplexMatrix depolarized = ComplexMatrix::Zero(rho.dim(), rho.dim());
  if (spectators.empty()) {
    depolarized = ComplexMatrix::Identity(rho.dim(), rho.dim()) * (rho.trace() / 4.0);
  } else {
    const DensityMatrix rest = partial_trace(rho, spectators);
    const auto dim = static_cast<std::size_t>(rho.dim());
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        if (detail::gather_bits(i, pair, n) == detail::gather_bits(j, pair, n)) {
          depolarized(i, j) = rest(detail::gather_bits(i, spectators, n),
                                   detail::gather_bits(j, spectators, n)) /
                              4.0;
        }
      }
    }
  }
  return DensityMatrix((1.0 - params.beta) * ideal + params.beta * depolarized);
}

/// Readout with flip probability δ. Z labels "0","1"; X labels "+","-".
inline MeasurementSet readout_povm(Basis basis, ReadoutParams params) {
  require_probability(params.delta, "delta");
  const double d = params.delta;
  const ComplexMatrix p0 = basis == Basis::z ? projectors::ket0() : projectors::ket_plus();
  const ComplexMatrix p1 = basis == Basis::z ? projectors::ket1() : projectors::ket_minus();
  std::vector<std::string> labels =
      basis == Basis::z ? std::vector<std::string>{"0", "1"} : std::vector<std::string>{"+", "-"};
  return MeasurementSet({(1.0 - d) * p0 + d * p1, (1.0 - d) * p1 + d * p0}, std::move(labels));
}

/// 1 - exp(-t / T1) for t = n_gates * gate_time.
inline double gamma_from_delay(const DampingSchedule& s) {
  if (!(s.t1.count() > 0.0)) {
    throw std::invalid_argument("gamma_from_delay: T1 must be positive");
  }
  if (!(s.gate_time.count() >= 0.0)) {
    throw std::invalid_argument("gamma_from_delay: gate time must be non-negative");
  }
  const double ratio = Seconds(s.idle_time()).count() / Seconds(s.t1).count();
  return -std::expm1(-ratio);
}

/// Damping probability of a channel twice as long: 2γ - γ².
inline double doubled_delay_gamma(double gamma) {
  require_probability(gamma, "gamma");
  return gamma * (2.0 - gamma);
}

}  // namespace qkdsim
