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

#include "qkdsim/noise.hpp"
#include "qkdsim/qmat.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace qkdsim {
namespace {

using testing::diag;
using testing::Gen;

TEST(Tensor, IdentityAndProjectors) {
  EXPECT_TRUE(approx_equal(tensor(gates::identity(), gates::identity()), gates::identity(2)));
  EXPECT_TRUE(approx_equal(tensor(projectors::ket0(), projectors::ket1()),
                           PureState::basis(2, 1).projector()));
}

TEST(Tensor, DampingOperators) {
  EXPECT_TRUE(approx_equal(tensor(ad_a0(0.36), ad_a0(0.36)), diag({1, 0.8, 0.8, 0.64})));
}

TEST(Tensor, RejectsMoreThanThreeQubits) {
  EXPECT_THROW(tensor(gates::identity(2), gates::identity(2)), std::invalid_argument);
}

TEST(Embed, FirstTargetIsMostSignificant) {
  // X on qubit 2 of |000> gives |001>.
  const ComplexMatrix x2 = embed(gates::pauli_x(), {2}, 3);
  EXPECT_EQ(x2(1, 0), Complex(1.0));
  // CNOT with control 1, target 0 maps |01> to |11>.
  const ComplexMatrix reversed = embed(gates::cnot(), {1, 0}, 2);
  EXPECT_EQ(reversed(3, 1), Complex(1.0));
}

TEST(DensityMatrix, RejectsInvalidMatrices) {
  EXPECT_THROW(DensityMatrix(ComplexMatrix::Identity(3, 3) / 3.0), std::invalid_argument);
  EXPECT_THROW(DensityMatrix(diag({1.5, -0.5})), std::invalid_argument);
  EXPECT_THROW(DensityMatrix(diag({0.8, 0.8})), std::invalid_argument);
  ComplexMatrix nonherm = diag({0.5, 0.5});
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{nonherm}, std::invalid_argument);
  EXPECT_THROW(PureState::qubit(1.0, 1.0), std::invalid_argument);
}

TEST(ApplyChannel, DampingLeavesGroundStateAlone) {
  for (double g : {0.0, 0.2, 0.7, 1.0}) {
    const DensityMatrix out = apply_channel(states::zero(), ad_channel({g}));
    EXPECT_TRUE(approx_equal(out.matrix(), projectors::ket0()));
  }
}

TEST(ApplyChannel, DampingOfExcitedState) {
  const DensityMatrix out = apply_channel(states::one(), ad_channel({0.25}));
  EXPECT_TRUE(approx_equal(out.matrix(), diag({0.25, 0.75})));
}

TEST(ApplyChannel, IdentityChannel) {
  Gen gen(11);
  const DensityMatrix rho = gen.mixed(2);
  const KrausChannel id({gates::identity(2)}, {0, 1});
  EXPECT_TRUE(approx_equal(apply_channel(rho, id).matrix(), rho.matrix()));
}

TEST(ApplyChannel, PreservesTraceAndHermiticity) {
  Gen gen(2024);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + gen.index(3);
    const DensityMatrix rho = gen.mixed(n);
    const KrausChannel ch = gen.index(2) == 0 ? ad_channel({gen.uniform()})
                                              : gad_channel({gen.uniform(), gen.uniform()});
    const DensityMatrix out = apply_channel(rho, ch.on({gen.index(n)}));
    EXPECT_NEAR(out.trace(), 1.0, kChannelTol);
    EXPECT_TRUE(is_hermitian(out.matrix(), kChannelTol));
  }
}

TEST(KrausChannel, RejectsIncompleteSets) {
  EXPECT_THROW(KrausChannel({ad_a0(0.3)}, {0}), std::invalid_argument);
  EXPECT_THROW(KrausChannel({}, {0}), std::invalid_argument);
  EXPECT_THROW(KrausChannel({gates::identity()}, {0, 1}), std::invalid_argument);
}

TEST(PartialTrace, BellStateReducesToMixed) {
  const DensityMatrix r = partial_trace(states::phi_plus(), {0});
  EXPECT_TRUE(approx_equal(r.matrix(), gates::identity() / 2.0));
}

TEST(PartialTrace, ProductState) {
  const DensityMatrix r = partial_trace(PureState::basis(2, 1), {0});
  EXPECT_TRUE(approx_equal(r.matrix(), projectors::ket0()));
}

TEST(PartialTrace, DampedBellPairMarginal) {
  const KrausChannel ch = ad_channel({0.5});
  const DensityMatrix rho =
      apply_channel(apply_channel(states::phi_plus(), ch.on({0})), ch.on({1}));
  EXPECT_TRUE(approx_equal(partial_trace(rho, {1}).matrix(), diag({0.75, 0.25})));
  EXPECT_TRUE(approx_equal(partial_trace(rho, {0}).matrix(), diag({0.75, 0.25})));
}

TEST(PartialTrace, FactorizesProducts) {
  Gen gen(7);
  for (int i = 0; i < 200; ++i) {
    const DensityMatrix a = gen.mixed(1);
    const DensityMatrix b = gen.mixed(2);
    const DensityMatrix ab = tensor(a, b);
    EXPECT_TRUE(approx_equal(partial_trace(ab, {0}).matrix(), a.matrix() * b.trace()));
    EXPECT_TRUE(approx_equal(partial_trace(ab, {1, 2}).matrix(), b.matrix() * a.trace()));
  }
}

TEST(PartialTrace, RejectsDegenerateKeepSets) {
  EXPECT_THROW(partial_trace(states::phi_plus(), {}), std::invalid_argument);
  EXPECT_THROW(partial_trace(states::phi_plus(), {0, 1}), std::invalid_argument);
  EXPECT_THROW(partial_trace(states::phi_plus(), {2}), std::invalid_argument);
}

TEST(Measure, PlusInZBasis) {
  const auto m = measure(states::plus(), readout_povm(Basis::z, {0.0}));
  EXPECT_NEAR(m.at("0"), 0.5, kAlgebraTol);
  EXPECT_NEAR(m.at("1"), 0.5, kAlgebraTol);
}

TEST(Measure, DampedPlusInXBasis) {
  const DensityMatrix rho = apply_channel(states::plus(), ad_channel({0.36}));
  const auto m = measure(rho, readout_povm(Basis::x, {0.0}));
  EXPECT_NEAR(m.at("-"), 0.1, kAlgebraTol);
  EXPECT_NEAR(m.at("+"), 0.9, kAlgebraTol);
}

TEST(Measure, TrivialPovm) {
  const MeasurementSet only({gates::identity(2)}, {"only"});
  EXPECT_NEAR(measure(Gen(3).mixed(2), only).at("only"), 1.0, kAlgebraTol);
}

TEST(Measure, CompleteSetsSumToOne) {
  Gen gen(99);
  const MeasurementSet zz =
      MeasurementSet::product(readout_povm(Basis::z, {0.1}), readout_povm(Basis::x, {0.02}));
  for (int i = 0; i < 200; ++i) {
    double total = 0.0;
    for (const auto& [label, p] : measure(gen.mixed(2), zz)) total += p;
    EXPECT_NEAR(total, 1.0, kChannelTol);
  }
}

TEST(MeasurementSet, ValidatesEffects) {
  EXPECT_THROW(MeasurementSet({projectors::ket0()}, {"0"}), std::invalid_argument);
  EXPECT_THROW(MeasurementSet({projectors::ket0(), projectors::ket1()}, {"a", "a"}),
               std::invalid_argument);
  EXPECT_THROW(MeasurementSet({diag({1.5, 1}), diag({-0.5, 0})}, {"a", "b"}), std::invalid_argument);
}

TEST(ConditionalState, AlreadyInSupport) {
  const ComplexMatrix keep = embed(projectors::ket1(), {1}, 2);
  const ConditionalState c = conditional_state(PureState::basis(2, 1), keep);
  ASSERT_TRUE(c.fired());
  EXPECT_NEAR(c.probability, 1.0, kAlgebraTol);
  EXPECT_TRUE(approx_equal(c.state->matrix(), PureState::basis(2, 1).projector()));
}

TEST(ConditionalState, DampedDualRailState) {
  const DensityMatrix rho(diag({0.3, 0.7, 0.0, 0.0}));
  const ConditionalState c = conditional_state(rho, embed(projectors::ket1(), {1}, 2));
  ASSERT_TRUE(c.fired());
  EXPECT_NEAR(c.probability, 0.7, kAlgebraTol);
  EXPECT_TRUE(approx_equal(c.state->matrix(), PureState::basis(2, 1).projector()));
}

TEST(ConditionalState, OrthogonalSupportSignalsZero) {
  const ConditionalState c =
      conditional_state(PureState::basis(2, 0), embed(projectors::ket1(), {1}, 2));
  EXPECT_FALSE(c.fired());
  EXPECT_LT(c.probability, kZeroProbability);
}

TEST(ConditionalState, RandomStatesRenormalize) {
  Gen gen(5);
  for (int i = 0; i < 200; ++i) {
    const DensityMatrix rho = gen.mixed(2);
    const ConditionalState c = conditional_state(rho, readout_povm(Basis::x, {gen.uniform(0, 0.5)})
                                                           .on({gen.index(2)}, 2)
                                                           .effects()[0]);
    EXPECT_GE(c.probability, 0.0);
    EXPECT_LE(c.probability, 1.0);
    if (c.fired()) EXPECT_NEAR(c.state->trace(), 1.0, kChannelTol);
  }
}

TEST(ConditionalState, RejectsNonEffects) {
  EXPECT_THROW(conditional_state(states::zero(), 2.0 * projectors::ket0()), std::invalid_argument);
  EXPECT_THROW(conditional_state(states::zero(), -projectors::ket0()), std::invalid_argument);
}

TEST(Fidelity, PureOverlap) {
  EXPECT_NEAR(fidelity(states::plus(), states::zero()), 0.5, kAlgebraTol);
  EXPECT_NEAR(fidelity(states::plus(), states::plus()), 1.0, kAlgebraTol);
}

}  // namespace
}  // namespace qkdsim
