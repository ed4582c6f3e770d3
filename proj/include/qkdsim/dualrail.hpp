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

// Dual-rail encoded BB84 with post-selection.
//
// Circuits (q0 carries the BB84 qubit, q1 the second rail, q2 the ancilla):
//   encoder        X(q1); CNOT(q0->q1)                 |0> -> |01>, |1> -> |10>
//   ancilla ED     CNOT(q0->q2); CNOT(q1->q2); keep q2 = 1
//   decoder        CNOT(q0->q1); q0 is the decoded qubit
//   optimal ED     CNOT(q0->q1); keep q1 = 1; q0 is the decoded qubit
//
// Damping acts on q0 and q1 between the encoder and the detection block.

#pragma once

#include "qkdsim/noise.hpp"
#include "qkdsim/protocols.hpp"
#include "qkdsim/qmat.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <variant>

namespace qkdsim {

enum class EncodingScheme { ancilla, optimal };
enum class FaultLocation { none, encoder, post_selection, decoder };

/// The single CNOT allowed to fail in a run. For post_selection this is the
/// first detection CNOT (q0 -> q2, or q0 -> q1 in the optimal scheme).
struct FaultSite {
  FaultLocation site = FaultLocation::none;
  double beta = 0.0;
};

using ChannelNoise = std::variant<AdParams, GadParams>;

struct EncodedRunResult {
  double pass_probability = 0.0;
  // Decoded qubit conditioned on passing; empty if nothing passes.
  std::optional<DensityMatrix> conditional_state;
  // P(pass and Z outcome disagrees with the input), likewise for X.
  double joint_error_z = 0.0;
  double joint_error_x = 0.0;

  bool survived() const { return conditional_state.has_value(); }
};

struct Table1Entry {
  double e_b = 0.0;
  double e_p = 0.0;
};

inline std::string_view to_string(FaultLocation f) {
  switch (f) {
    case FaultLocation::none: return "none";
    case FaultLocation::encoder: return "encoder";
    case FaultLocation::post_selection: return "post-selection";
    case FaultLocation::decoder: return "decoder";
  }
  return "?";
}

inline std::string_view to_string(EncodingScheme s) {
  return s == EncodingScheme::ancilla ? "ancilla" : "optimal";
}

/// Positions of the CNOTs in the encoded circuit.
enum class CnotSlot : std::size_t { encoder = 0, detect_first = 1, detect_second = 2, decoder = 3 };

/// Per-rail damping plus a failure probability for each CNOT slot.
struct CircuitNoise {
  KrausChannel rail0 = ad_channel({0.0});
  KrausChannel rail1 = ad_channel({0.0});
  std::array<double, 4> cnot_beta{};

  double beta(CnotSlot slot) const { return cnot_beta[static_cast<std::size_t>(slot)]; }
};

/// Register state just before the detection measurement, with the qubit roles.
struct EncodedRegister {
  DensityMatrix rho;
  std::size_t flag_qubit = 0;
  std::size_t decoded_qubit = 0;
};

/// Linear map |0> -> |01>, |1> -> |10>.
inline DensityMatrix encode(const PureState& bb84_state) {
  if (bb84_state.num_qubits() != 1) {
    throw std::invalid_argument("encode: input must be a single qubit");
  }
  ComplexVector v = ComplexVector::Zero(4);
  v(1) = bb84_state.amplitudes()(0);
  v(2) = bb84_state.amplitudes()(1);
  return DensityMatrix(PureState(std::move(v)));
}

/// Gate-level encoder: X on q1, then CNOT(q0 -> q1), acting on input ⊗ |0>.
inline DensityMatrix encoder_circuit(const PureState& bb84_state) {
  if (bb84_state.num_qubits() != 1) {
    throw std::invalid_argument("encoder_circuit: input must be a single qubit");
  }
  DensityMatrix rho = tensor(DensityMatrix(bb84_state), DensityMatrix(states::zero()));
  rho = apply_unitary(rho, gates::pauli_x(), {1});
  return apply_unitary(rho, gates::cnot(), {0, 1});
}

namespace detail {

inline DensityMatrix cnot_step(const DensityMatrix& rho, std::size_t control, std::size_t target,
                               double beta) {
  return noisy_cnot(rho, {beta, control, target});
}

}  // namespace detail

/// Runs encoder, channel and detection (plus decoder for the ancilla scheme).
inline EncodedRegister encoded_register(const PureState& bb84_state, EncodingScheme scheme,
                                        const CircuitNoise& noise) {
  if (bb84_state.num_qubits() != 1) {
    throw std::invalid_argument("encoded_register: input must be a single qubit");
  }
  if (noise.rail0.num_qubits() != 1 || noise.rail1.num_qubits() != 1) {
    throw std::invalid_argument("encoded_register: rail channels must be single-qubit");
  }
  for (double b : noise.cnot_beta) {
    require_probability(b, "beta");
  }
  const bool ancilla = scheme == EncodingScheme::ancilla;
  DensityMatrix rho(bb84_state);
  rho = tensor(rho, DensityMatrix(states::zero()));
  if (ancilla) {
    rho = tensor(rho, DensityMatrix(states::zero()));
  }

  rho = apply_unitary(rho, gates::pauli_x(), {1});
  rho = detail::cnot_step(rho, 0, 1, noise.beta(CnotSlot::encoder));
  rho = apply_channel(rho, noise.rail0.on({0}));
  rho = apply_channel(rho, noise.rail1.on({1}));

  if (ancilla) {
    rho = detail::cnot_step(rho, 0, 2, noise.beta(CnotSlot::detect_first));
    rho = detail::cnot_step(rho, 1, 2, noise.beta(CnotSlot::detect_second));
    rho = detail::cnot_step(rho, 0, 1, noise.beta(CnotSlot::decoder));
    return {rho, 2, 0};
  }
  rho = detail::cnot_step(rho, 0, 1, noise.beta(CnotSlot::detect_first));
  return {rho, 1, 0};
}

namespace detail {

/// Σ_b (1 - |<b|psi>|²) |b><b| over the basis {b}: the probability that a
/// measurement in that basis disagrees with an ideal one on the input.
inline ComplexMatrix disagreement_effect(const PureState& psi, Basis basis) {
  const ComplexMatrix p0 = basis == Basis::z ? projectors::ket0() : projectors::ket_plus();
  const ComplexMatrix p1 = basis == Basis::z ? projectors::ket1() : projectors::ket_minus();
  const double w0 = (psi.amplitudes().adjoint() * p0 * psi.amplitudes())(0, 0).real();
  const double w1 = (psi.amplitudes().adjoint() * p1 * psi.amplitudes())(0, 0).real();
  return (1.0 - w0) * p0 + (1.0 - w1) * p1;
}

inline EncodedRunResult summarize(const PureState& input, const EncodedRegister& reg) {
  const std::size_t n = reg.rho.num_qubits();
  const ComplexMatrix pass = embed(projectors::ket1(), {reg.flag_qubit}, n);
  EncodedRunResult result;
  const ConditionalState cond = conditional_state(reg.rho, pass);
  result.pass_probability = cond.probability;
  if (cond.fired()) {
    result.conditional_state = partial_trace(*cond.state, {reg.decoded_qubit});
  }
  const ComplexMatrix ez = embed(disagreement_effect(input, Basis::z), {reg.decoded_qubit}, n);
  const ComplexMatrix ex = embed(disagreement_effect(input, Basis::x), {reg.decoded_qubit}, n);
  const auto snap = [](double v) { return v < kZeroProbability ? 0.0 : v; };
  result.joint_error_z = snap(expectation(reg.rho, pass * ez));
  result.joint_error_x = snap(expectation(reg.rho, pass * ex));
  return result;
}

inline CircuitNoise circuit_noise(const ChannelNoise& noise, const FaultSite& fault) {
  CircuitNoise out;
  const KrausChannel rail = std::visit(
      [](const auto& params) -> KrausChannel {
        if constexpr (std::is_same_v<std::decay_t<decltype(params)>, AdParams>) {
          return ad_channel(params);
        } else {
          return gad_channel(params);
        }
      },
      noise);
  out.rail0 = rail;
  out.rail1 = rail;
  require_probability(fault.beta, "beta");
  switch (fault.site) {
    case FaultLocation::none: break;
    case FaultLocation::encoder: out.cnot_beta[0] = fault.beta; break;
    case FaultLocation::post_selection: out.cnot_beta[1] = fault.beta; break;
    case FaultLocation::decoder: out.cnot_beta[3] = fault.beta; break;
  }
  return out;
}

inline double damping_gamma(const ChannelNoise& noise) {
  return std::visit([](const auto& params) { return params.gamma; }, noise);
}

}  // namespace detail

/// Encode, damp both rails, detect with one designated noisy CNOT, post-select
/// and decode. Probabilities are per transmitted logical qubit.
inline EncodedRunResult run_encoded(const PureState& bb84_state, EncodingScheme scheme,
                                    const ChannelNoise& noise, const FaultSite& fault) {
  if (std::holds_alternative<GadParams>(noise) && fault.site != FaultLocation::none) {
    throw UnsupportedConfiguration("CNOT faults are only analysed under AD noise");
  }
  if (scheme == EncodingScheme::optimal && fault.site == FaultLocation::decoder) {
    throw UnsupportedConfiguration("the optimal scheme has no decoder CNOT");
  }
  const EncodedRegister reg = encoded_register(bb84_state, scheme, detail::circuit_noise(noise, fault));
  return detail::summarize(bb84_state, reg);
}

/// Closed-form joint error probabilities for a single faulty CNOT.
inline Table1Entry table1_rates(const FaultSite& fault, double gamma) {
  require_probability(gamma, "gamma");
  require_probability(fault.beta, "beta");
  const double b = fault.beta;
  switch (fault.site) {
    case FaultLocation::encoder: {
      const double e = b / 4.0 * (1.0 - gamma) * (1.0 + gamma);
      return {e, e};
    }
    case FaultLocation::post_selection:
      return {b / 4.0, b / 4.0};
    case FaultLocation::decoder:
      return {b / 2.0 * (1.0 - gamma), b * (1.0 - gamma)};
    case FaultLocation::none:
      break;
  }
  throw std::invalid_argument("table1_rates: a fault site is required");
}

/// Logical error and sifting rates of the encoded protocol under GAD.
inline ErrorRates gad_encoded_rates(GadParams params) {
  require_probability(params.gamma, "gamma");
  require_probability(params.p, "p");
  const double g = params.gamma;
  const double p = params.p;
  const double sift = 1.0 - g + 2.0 * p * g * g - 2.0 * p * p * g * g;
  if (sift < kZeroProbability) {
    return {0.0, 0.0, std::max(0.0, sift)};
  }
  const double e = p * g * g * (1.0 - p) / sift;
  return {e, e, sift};
}

/// Averages run_encoded over the four BB84 inputs; errors are conditioned on
/// passing post-selection and the pass probability becomes the sifting factor.
inline KeyRateReport encoded_key_rate(EncodingScheme scheme, const ChannelNoise& noise,
                                      const FaultSite& fault, std::uint64_t l_sift = 0) {
  const EncodedRunResult r0 = run_encoded(states::zero(), scheme, noise, fault);
  const EncodedRunResult r1 = run_encoded(states::one(), scheme, noise, fault);
  const EncodedRunResult rp = run_encoded(states::plus(), scheme, noise, fault);
  const EncodedRunResult rm = run_encoded(states::minus(), scheme, noise, fault);

  const double pass_z = 0.5 * (r0.pass_probability + r1.pass_probability);
  const double pass_x = 0.5 * (rp.pass_probability + rm.pass_probability);
  const double joint_b = 0.5 * (r0.joint_error_z + r1.joint_error_z);
  const double joint_p = 0.5 * (rp.joint_error_x + rm.joint_error_x);

  KeyRateReport report;
  report.l_sift = l_sift;
  if (pass_z < kZeroProbability || pass_x < kZeroProbability) {
    report.rates = {0.0, 0.0, 0.0};
    report.degenerate = true;
    return report;
  }
  const ErrorRates rates{std::min(1.0, joint_b / pass_z), std::min(1.0, joint_p / pass_x),
                         0.5 * (pass_z + pass_x)};
  report = make_report(rates, l_sift);
  return report;
}

}  // namespace qkdsim
