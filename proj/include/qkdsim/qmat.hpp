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

// Dense complex-matrix core for registers of at most three qubits.
//
// Bit ordering: qubit 0 is the most significant bit of a basis index, so the
// ket |q0 q1 q2> has index q0*4 + q1*2 + q2.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qkdsim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using QubitList = std::vector<std::size_t>;

inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kChannelTol = 1e-10;
inline constexpr double kZeroProbability = 1e-14;
inline constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
inline constexpr std::size_t kMaxQubits = 3;
inline constexpr Eigen::Index kMaxDim = Eigen::Index{1} << kMaxQubits;

/// Largest absolute entrywise difference; infinity on shape mismatch.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  if (a.size() == 0) {
    return 0.0;
  }
  return (a - b).cwiseAbs().maxCoeff();
}

inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b,
                         double tol = kAlgebraTol) {
  return max_abs_diff(a, b) <= tol;
}

inline bool is_quantum_dim(Eigen::Index n) {
  return n >= 1 && n <= kMaxDim && (n & (n - 1)) == 0;
}

/// Number of qubits for a register dimension 2^n.
inline std::size_t qubits_for_dim(Eigen::Index dim) {
  if (!is_quantum_dim(dim)) {
    throw std::invalid_argument("dimension " + std::to_string(dim) +
                                " is not a power of two in [1, 8]");
  }
  std::size_t n = 0;
  while ((Eigen::Index{1} << n) < dim) {
    ++n;
  }
  return n;
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kAlgebraTol) {
  return m.rows() == m.cols() && max_abs_diff(m, m.adjoint()) <= tol;
}

/// Eigenvalues of the Hermitian part, ascending.
inline Eigen::VectorXd hermitian_eigenvalues(const ComplexMatrix& m) {
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

inline bool is_positive_semidefinite(const ComplexMatrix& m, double tol = kChannelTol) {
  if (!is_hermitian(m, std::max(tol, kAlgebraTol))) {
    return false;
  }
  return m.size() == 0 || hermitian_eigenvalues(m).minCoeff() >= -tol;
}

/// Principal square root of a PSD operator; eigenvalues in (-1e-10, 0) are clamped.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  Eigen::VectorXd roots = solver.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    if (roots(i) < -kChannelTol) {
      throw std::invalid_argument("psd_sqrt: operator is not positive semidefinite");
    }
    roots(i) = std::sqrt(std::max(0.0, roots(i)));
  }
  return solver.eigenvectors() * roots.cast<Complex>().asDiagonal() *
         solver.eigenvectors().adjoint();
}

/// Kronecker product a ⊗ b; the first factor occupies the most significant bits.
inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > kMaxDim || cols > kMaxDim) {
    throw std::invalid_argument("tensor: result exceeds the 3-qubit (8x8) register limit");
  }
  ComplexMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace detail {

inline std::size_t bit_at(std::size_t index, std::size_t qubit, std::size_t n_qubits) {
  return (index >> (n_qubits - 1 - qubit)) & 1U;
}

/// Packs the bits of `index` at `qubits` (first listed = most significant).
inline std::size_t gather_bits(std::size_t index, const QubitList& qubits, std::size_t n_qubits) {
  std::size_t out = 0;
  for (std::size_t q : qubits) {
    out = (out << 1) | bit_at(index, q, n_qubits);
  }
  return out;
}

inline QubitList complement(const QubitList& qubits, std::size_t n_qubits) {
  QubitList rest;
  for (std::size_t q = 0; q < n_qubits; ++q) {
    if (std::find(qubits.begin(), qubits.end(), q) == qubits.end()) {
      rest.push_back(q);
    }
  }
  return rest;
}

inline void check_targets(const QubitList& targets, std::size_t n_qubits, const char* what) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= n_qubits) {
      throw std::invalid_argument(std::string(what) + ": qubit index out of range");
    }
    for (std::size_t j = i + 1; j < targets.size(); ++j) {
      if (targets[i] == targets[j]) {
        throw std::invalid_argument(std::string(what) + ": repeated qubit index");
      }
    }
  }
}

}  // namespace detail

/// Lifts `op` (acting on `targets`, in listed order) to an `n_qubits` register,
/// acting as identity elsewhere.
inline ComplexMatrix embed(const ComplexMatrix& op, const QubitList& targets, std::size_t n_qubits) {
  if (op.rows() != op.cols() || op.rows() != (Eigen::Index{1} << targets.size())) {
    throw std::invalid_argument("embed: operator dimension does not match target count");
  }
  if (n_qubits > kMaxQubits) {
    throw std::invalid_argument("embed: register exceeds 3 qubits");
  }
  detail::check_targets(targets, n_qubits, "embed");
  const QubitList rest = detail::complement(targets, n_qubits);
  const std::size_t dim = std::size_t{1} << n_qubits;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t ri = detail::gather_bits(i, rest, n_qubits);
    const std::size_t si = detail::gather_bits(i, targets, n_qubits);
    for (std::size_t j = 0; j < dim; ++j) {
      if (detail::gather_bits(j, rest, n_qubits) == ri) {
        out(i, j) = op(si, detail::gather_bits(j, targets, n_qubits));
      }
    }
  }
  return out;
}

class PureState {
 public:
  explicit PureState(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    num_qubits_ = qubits_for_dim(amplitudes_.size());
    if (std::abs(amplitudes_.squaredNorm() - 1.0) > kAlgebraTol) {
      throw std::invalid_argument("PureState: amplitudes are not normalized");
    }
  }

  /// alpha|0> + beta|1>, normalized by the caller.
  static PureState qubit(Complex alpha, Complex beta) {
    ComplexVector v(2);
    v << alpha, beta;
    return PureState(std::move(v));
  }

  static PureState basis(std::size_t n_qubits, std::size_t index) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (index >= dim) {
      throw std::invalid_argument("PureState::basis: index out of range");
    }
    ComplexVector v = ComplexVector::Zero(dim);
    v(index) = 1.0;
    return PureState(std::move(v));
  }

  std::size_t num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  ComplexMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  ComplexVector amplitudes_;
  std::size_t num_qubits_ = 0;
};

namespace states {

inline PureState zero() { return PureState::qubit(1.0, 0.0); }
inline PureState one() { return PureState::qubit(0.0, 1.0); }
inline PureState plus() { return PureState::qubit(kInvSqrt2, kInvSqrt2); }
inline PureState minus() { return PureState::qubit(kInvSqrt2, -kInvSqrt2); }

/// (|00> + |11>)/sqrt2
inline PureState phi_plus() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = kInvSqrt2;
  v(3) = kInvSqrt2;
  return PureState(std::move(v));
}

/// (|01> - |10>)/sqrt2
inline PureState psi_minus() {
  ComplexVector v = ComplexVector::Zero(4);
  v(1) = kInvSqrt2;
  v(2) = -kInvSqrt2;
  return PureState(std::move(v));
}

}  // namespace states

/// Hermitian, PSD, trace <= 1. Traces below one are only produced by
/// unnormalized post-selection branches and are reported by is_normalized().
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols()) {
      throw std::invalid_argument("DensityMatrix: matrix is not square");
    }
    num_qubits_ = qubits_for_dim(matrix_.rows());
    if (!is_hermitian(matrix_)) {
      throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
    }
    const double tr = trace();
    if (tr < -kChannelTol || tr > 1.0 + kChannelTol) {
      throw std::invalid_argument("DensityMatrix: trace outside [0, 1]");
    }
    if (hermitian_eigenvalues(matrix_).minCoeff() < -kChannelTol) {
      throw std::invalid_argument("DensityMatrix: matrix is not positive semidefinite");
    }
  }

  DensityMatrix(const PureState& psi)  // NOLINT(google-explicit-constructor)
      : DensityMatrix(psi.projector()) {}

  static DensityMatrix maximally_mixed(std::size_t n_qubits) {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  std::size_t num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return matrix_(i, j); }
  double trace() const { return matrix_.trace().real(); }
  bool is_normalized() const { return std::abs(trace() - 1.0) <= kChannelTol; }

  /// Population of computational basis state `index`.
  double population(std::size_t index) const {
    return matrix_(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)).real();
  }

  DensityMatrix normalized() const {
    const double tr = trace();
    if (tr < kZeroProbability) {
      throw std::domain_error("DensityMatrix::normalized: zero trace");
    }
    return DensityMatrix(matrix_ / tr);
  }

 private:
  ComplexMatrix matrix_;
  std::size_t num_qubits_ = 0;
};

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(tensor(a.matrix(), b.matrix()));
}

/// <psi|rho|psi>; for normalized rho this is the fidelity with a pure target.
inline double fidelity(const DensityMatrix& rho, const PureState& psi) {
  if (rho.dim() != psi.dim()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  return (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0, 0).real();
}

/// Completeness-checked Kraus operators acting on an ordered qubit subset.
class KrausChannel {
 public:
  KrausChannel(std::vector<ComplexMatrix> operators, QubitList acts_on)
      : operators_(std::move(operators)), acts_on_(std::move(acts_on)) {
    if (operators_.empty()) {
      throw std::invalid_argument("KrausChannel: no operators");
    }
    const Eigen::Index dim = Eigen::Index{1} << acts_on_.size();
    if (acts_on_.empty() || acts_on_.size() > kMaxQubits) {
      throw std::invalid_argument("KrausChannel: acts_on must name 1 to 3 qubits");
    }
    detail::check_targets(acts_on_, kMaxQubits, "KrausChannel");
    ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
    for (const auto& op : operators_) {
      if (op.rows() != dim || op.cols() != dim) {
        throw std::invalid_argument("KrausChannel: operator dimension does not match acts_on");
      }
      sum += op.adjoint() * op;
    }
    if (!approx_equal(sum, ComplexMatrix::Identity(dim, dim), kChannelTol)) {
      throw std::invalid_argument("KrausChannel: operators violate completeness");
    }
  }

  /// Acts on qubits {0, ..., k-1} of whatever register it is applied to.
  static KrausChannel local(std::vector<ComplexMatrix> operators) {
    QubitList targets = leading_qubits(operators);
    return KrausChannel(std::move(operators), std::move(targets));
  }

  const std::vector<ComplexMatrix>& operators() const { return operators_; }
  const QubitList& acts_on() const { return acts_on_; }
  std::size_t num_qubits() const { return acts_on_.size(); }

  /// Same operators, re-targeted.
  KrausChannel on(QubitList targets) const { return KrausChannel(operators_, std::move(targets)); }

 private:
  static QubitList leading_qubits(const std::vector<ComplexMatrix>& ops) {
    if (ops.empty()) {
      return {};
    }
    QubitList q(qubits_for_dim(ops.front().rows()));
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = i;
    }
    return q;
  }

  std::vector<ComplexMatrix> operators_;
  QubitList acts_on_;
};

/// Σ A_i rho A_i†, with each A_i lifted to rho's register.
inline DensityMatrix apply_channel(const DensityMatrix& rho, const KrausChannel& ch) {
  const std::size_t n = rho.num_qubits();
  detail::check_targets(ch.acts_on(), n, "apply_channel");
  const bool full = ch.num_qubits() == n;
  ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
  for (const auto& op : ch.operators()) {
    const ComplexMatrix lifted = full && std::is_sorted(ch.acts_on().begin(), ch.acts_on().end())
                                     ? op
                                     : embed(op, ch.acts_on(), n);
    out += lifted * rho.matrix() * lifted.adjoint();
  }
  return DensityMatrix(std::move(out));
}

/// U rho U† with U acting on `targets`.
inline DensityMatrix apply_unitary(const DensityMatrix& rho, const ComplexMatrix& u,
                                   const QubitList& targets) {
  const ComplexMatrix lifted = embed(u, targets, rho.num_qubits());
  return DensityMatrix(lifted * rho.matrix() * lifted.adjoint());
}

/// Reduced state on `keep` (kept qubits retain their relative order).
inline DensityMatrix partial_trace(const DensityMatrix& rho, const QubitList& keep) {
  const std::size_t n = rho.num_qubits();
  if (keep.empty() || keep.size() >= n) {
    throw std::invalid_argument("partial_trace: keep must be a nonempty strict subset");
  }
  detail::check_targets(keep, n, "partial_trace");
  QubitList sorted_keep = keep;
  std::sort(sorted_keep.begin(), sorted_keep.end());
  const QubitList traced = detail::complement(sorted_keep, n);
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t out_dim = std::size_t{1} << sorted_keep.size();
  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t ti = detail::gather_bits(i, traced, n);
    for (std::size_t j = 0; j < dim; ++j) {
      if (detail::gather_bits(j, traced, n) == ti) {
        out(detail::gather_bits(i, sorted_keep, n), detail::gather_bits(j, sorted_keep, n)) +=
            rho(i, j);
      }
    }
  }
  return DensityMatrix(std::move(out));
}

/// Labelled POVM on a full register. Effects are PSD and sum to identity.
class MeasurementSet {
 public:
  MeasurementSet(std::vector<ComplexMatrix> effects, std::vector<std::string> labels)
      : effects_(std::move(effects)), labels_(std::move(labels)) {
    if (effects_.empty() || effects_.size() != labels_.size()) {
      throw std::invalid_argument("MeasurementSet: need one label per effect");
    }
    const Eigen::Index dim = effects_.front().rows();
    qubits_for_dim(dim);
    ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
    for (const auto& e : effects_) {
      if (e.rows() != dim || e.cols() != dim) {
        throw std::invalid_argument("MeasurementSet: effect dimensions differ");
      }
      if (!is_positive_semidefinite(e)) {
        throw std::invalid_argument("MeasurementSet: effect is not positive semidefinite");
      }
      sum += e;
    }
    if (!approx_equal(sum, ComplexMatrix::Identity(dim, dim), kChannelTol)) {
      throw std::invalid_argument("MeasurementSet: effects do not sum to identity");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      for (std::size_t j = i + 1; j < labels_.size(); ++j) {
        if (labels_[i] == labels_[j]) {
          throw std::invalid_argument("MeasurementSet: duplicate label " + labels_[i]);
        }
      }
    }
  }

  const std::vector<ComplexMatrix>& effects() const { return effects_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return effects_.size(); }
  Eigen::Index dim() const { return effects_.front().rows(); }

  /// Lift onto `targets` of an `n_qubits` register.
  MeasurementSet on(const QubitList& targets, std::size_t n_qubits) const {
    std::vector<ComplexMatrix> lifted;
    lifted.reserve(effects_.size());
    for (const auto& e : effects_) {
      lifted.push_back(embed(e, targets, n_qubits));
    }
    return MeasurementSet(std::move(lifted), labels_);
  }

  /// Joint measurement a ⊗ b; labels are concatenated ("0" + "1" -> "01").
  static MeasurementSet product(const MeasurementSet& a, const MeasurementSet& b) {
    std::vector<ComplexMatrix> effects;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        effects.push_back(tensor(a.effects_[i], b.effects_[j]));
        labels.push_back(a.labels_[i] + b.labels_[j]);
      }
    }
    return MeasurementSet(std::move(effects), std::move(labels));
  }

 private:
  std::vector<ComplexMatrix> effects_;
  std::vector<std::string> labels_;
};

/// Outcome probabilities Tr(E_i rho), keyed by label.
inline std::map<std::string, double> measure(const DensityMatrix& rho, const MeasurementSet& m) {
  if (rho.dim() != m.dim()) {
    throw std::invalid_argument("measure: dimension mismatch");
  }
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    out[m.labels()[i]] = (m.effects()[i] * rho.matrix()).trace().real();
  }
  return out;
}

/// Tr(E rho) for a single effect.
inline double expectation(const DensityMatrix& rho, const ComplexMatrix& effect) {
  if (rho.dim() != effect.rows() || effect.rows() != effect.cols()) {
    throw std::invalid_argument("expectation: dimension mismatch");
  }
  return (effect * rho.matrix()).trace().real();
}

/// Result of filtering a state through one effect. `state` is empty when the
/// effect never fires (probability below 1e-14).
struct ConditionalState {
  std::optional<DensityMatrix> state;
  double probability = 0.0;

  bool fired() const { return state.has_value(); }
};

/// (sqrt(E) rho sqrt(E) / p, p) with p = Tr(E rho).
inline ConditionalState conditional_state(const DensityMatrix& rho, const ComplexMatrix& effect) {
  if (effect.rows() != rho.dim() || effect.cols() != rho.dim()) {
    throw std::invalid_argument("conditional_state: dimension mismatch");
  }
  if (!is_positive_semidefinite(effect)) {
    throw std::invalid_argument("conditional_state: effect is not positive semidefinite");
  }
  const ComplexMatrix id = ComplexMatrix::Identity(rho.dim(), rho.dim());
  if (!is_positive_semidefinite(id - effect)) {
    throw std::invalid_argument("conditional_state: effect exceeds identity");
  }
  const double p = std::clamp(expectation(rho, effect), 0.0, 1.0);
  if (p < kZeroProbability) {
    return {std::nullopt, p};
  }
  const ComplexMatrix root = psd_sqrt(effect);
  ComplexMatrix post = root * rho.matrix() * root.adjoint() / p;
  post = 0.5 * (post + post.adjoint()).eval();
  return {DensityMatrix(std::move(post)), p};
}

namespace gates {

inline ComplexMatrix identity(std::size_t n_qubits = 1) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  return ComplexMatrix::Identity(dim, dim);
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix hadamard() {
  ComplexMatrix m(2, 2);
  m << kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2;
  return m;
}

/// Control is the first (most significant) qubit of the pair.
inline ComplexMatrix cnot() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

}  // namespace gates

namespace projectors {

inline ComplexMatrix ket0() { return states::zero().projector(); }
inline ComplexMatrix ket1() { return states::one().projector(); }
inline ComplexMatrix ket_plus() { return states::plus().projector(); }
inline ComplexMatrix ket_minus() { return states::minus().projector(); }

}  // namespace projectors

}  // namespace qkdsim
