// Copyright 2026 The spikesep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "spikesep/separation.h"

#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "test_signals.h"

namespace spikesep {
namespace {

// Grouping where channels [first, last] carry `label` and the rest are
// silent unless set by another call.
PhaseGrouping Blank() {
  PhaseGrouping g;
  g.labels.assign(kNumChannels, PhaseGrouping::kSilent);
  return g;
}

void Label(PhaseGrouping& g, int first, int last, int label) {
  for (int c = first; c <= last; ++c) g.labels[c] = label;
  g.num_groups = std::max(g.num_groups, label + 1);
}

TEST(GroupsToMasksTest, OverlappingGroupsKeepTheirSource) {
  PhaseGrouping f0 = Blank();
  Label(f0, 0, 99, 0);
  Label(f0, 100, 255, 1);
  PhaseGrouping f1 = Blank();
  // Group order flipped on purpose: identity comes from overlap, not label.
  Label(f1, 98, 255, 0);
  Label(f1, 0, 97, 1);

  const auto masks = GroupsToMasks({f0, f1});
  ASSERT_EQ(masks.size(), 2u);
  for (int c = 0; c < kNumChannels; ++c) {
    EXPECT_EQ(masks[0].on(c, 0), c <= 99) << c;
    EXPECT_EQ(masks[0].on(c, 1), c <= 97) << c;
    EXPECT_EQ(masks[1].on(c, 0), c >= 100) << c;
    EXPECT_EQ(masks[1].on(c, 1), c >= 98) << c;
  }
  EXPECT_EQ(masks[0].CountOn() + masks[1].CountOn(), 2 * kNumChannels);
}

TEST(GroupsToMasksTest, UnmatchedGroupStartsANewSource) {
  PhaseGrouping f0 = Blank();
  Label(f0, 0, 49, 0);
  PhaseGrouping f1 = Blank();
  Label(f1, 0, 49, 0);
  Label(f1, 200, 220, 1);
  const auto masks = GroupsToMasks({f0, f1});
  ASSERT_EQ(masks.size(), 2u);
  EXPECT_EQ(masks[1].source_id, 1);
  EXPECT_EQ(masks[1].CountOn(), 21);
  EXPECT_FALSE(masks[1].on(210, 0));
  EXPECT_TRUE(masks[1].on(210, 1));
}

TEST(GroupsToMasksTest, SourceSurvivesAFrameOfAbsence) {
  PhaseGrouping f0 = Blank();
  Label(f0, 10, 30, 0);
  PhaseGrouping f1 = Blank();
  PhaseGrouping f2 = Blank();
  Label(f2, 12, 32, 0);
  const auto masks = GroupsToMasks({f0, f1, f2});
  ASSERT_EQ(masks.size(), 1u);
  EXPECT_EQ(masks[0].CountOn(), 42);
}

TEST(GroupsToMasksTest, SilentChannelsBelongToNoMask) {
  PhaseGrouping f0 = Blank();
  Label(f0, 0, 9, 0);
  Label(f0, 20, 29, 1);
  const auto masks = GroupsToMasks({f0});
  ASSERT_EQ(masks.size(), 2u);
  for (int c = 10; c < 20; ++c) {
    EXPECT_FALSE(masks[0].on(c, 0));
    EXPECT_FALSE(masks[1].on(c, 0));
  }
  EXPECT_EQ(masks[0].values.rows, kNumChannels);
  EXPECT_EQ(masks[0].num_frames(), 1);
}

TEST(GroupsToMasksTest, NoGroupsNoMasks) {
  EXPECT_TRUE(GroupsToMasks({Blank(), Blank()}).empty());
  EXPECT_TRUE(GroupsToMasks({}).empty());
}

SourceMask MaskFromRange(int id, int frames, int first, int last) {
  SourceMask m;
  m.source_id = id;
  m.values = Grid(kNumChannels, frames);
  for (int f = 0; f < frames; ++f) {
    for (int c = first; c <= last; ++c) m.values.at(c, f) = 1.0;
  }
  return m;
}

TEST(LimitSourcesTest, KeepsLargestAndReassignsByNearestChannel) {
  std::vector<SourceMask> masks = {MaskFromRange(0, 2, 0, 99),
                                   MaskFromRange(1, 2, 110, 119),
                                   MaskFromRange(2, 2, 130, 255)};
  const auto out = LimitSources(masks, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].source_id, 0);
  EXPECT_EQ(out[1].source_id, 1);
  // Channel c of the dropped mask is c - 99 from the low mask and 130 - c
  // from the high one: 110..114 go low, 115..119 go high.
  for (int c = 110; c <= 114; ++c) EXPECT_TRUE(out[0].on(c, 0)) << c;
  for (int c = 115; c <= 119; ++c) EXPECT_TRUE(out[1].on(c, 1)) << c;
  EXPECT_EQ(out[0].CountOn() + out[1].CountOn(), 2 * (100 + 10 + 126));
}

TEST(LimitSourcesTest, NoOpWhenWithinLimit) {
  std::vector<SourceMask> masks = {MaskFromRange(0, 1, 0, 9)};
  const auto out = LimitSources(masks, 2);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].CountOn(), 10);
}

TEST(LimitSourcesTest, CellsWithNoKeptNeighbourAreDropped) {
  SourceMask big = MaskFromRange(0, 2, 0, 99);
  for (int c = 0; c <= 99; ++c) big.values.at(c, 1) = 0.0;
  SourceMask small = MaskFromRange(1, 2, 200, 209);
  const auto out = LimitSources({big, small}, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].on(205, 0));
  EXPECT_FALSE(out[0].on(205, 1));
}

TEST(ExpandMaskTest, HoldsFrameValuesAndTail) {
  SourceMask m = MaskFromRange(0, 3, 5, 5);
  m.values.at(5, 1) = 0.0;
  const auto g = ExpandMask(m, 5, 3 * 10 + 4, 10, 0);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(g[t], 1.0);
  for (int t = 10; t < 20; ++t) EXPECT_EQ(g[t], 0.0);
  for (int t = 20; t < 34; ++t) EXPECT_EQ(g[t], 1.0);
}

TEST(ExpandMaskTest, RaisedCosineCentredOnBoundary) {
  SourceMask m = MaskFromRange(0, 2, 0, 0);
  m.values.at(0, 1) = 0.0;
  const int frame = 64;
  const auto g = ExpandMask(m, 0, 2 * frame, frame, 16);
  EXPECT_EQ(g[frame - 9], 1.0);
  EXPECT_EQ(g[frame + 8], 0.0);
  for (int k = 0; k < 16; ++k) {
    const double expected = 1.0 - (0.5 - 0.5 * std::cos(kPi * (k + 0.5) / 16));
    EXPECT_NEAR(g[frame - 8 + k], expected, 1e-15);
  }
  // Symmetric about the boundary.
  EXPECT_NEAR(g[frame - 1] + g[frame], 1.0, 1e-15);
  for (int t = 1; t < 2 * frame; ++t) EXPECT_LE(g[t], g[t - 1]);
}

TEST(ExpandMaskTest, ComplementaryMasksSumToOne) {
  const int frames = 6, frame = 32;
  SourceMask a = MaskFromRange(0, frames, 0, 0);
  SourceMask b = MaskFromRange(1, frames, 0, 0);
  const int pattern[frames] = {1, 0, 0, 1, 0, 1};
  for (int f = 0; f < frames; ++f) {
    a.values.at(0, f) = pattern[f];
    b.values.at(0, f) = 1 - pattern[f];
  }
  const auto ga = ExpandMask(a, 0, frames * frame + 7, frame);
  const auto gb = ExpandMask(b, 0, frames * frame + 7, frame);
  for (std::size_t t = 0; t < ga.size(); ++t) {
    EXPECT_NEAR(ga[t] + gb[t], 1.0, 1e-15) << t;
    EXPECT_GE(ga[t], 0.0);
    EXPECT_LE(ga[t], 1.0);
  }
}

ChannelSignals RampChannels(std::size_t length) {
  ChannelSignals cs;
  cs.channels.assign(kNumChannels, std::vector<double>(length));
  for (int c = 0; c < kNumChannels; ++c) {
    for (std::size_t t = 0; t < length; ++t) {
      cs.channels[c][t] = std::sin(0.01 * (c + 1) * t);
    }
  }
  return cs;
}

TEST(ApplyMaskTest, ValidatesShapes) {
  const auto cs = RampChannels(100);
  EXPECT_THROW(ApplyMask(cs, MaskFromRange(0, 3, 0, 0), 50), ConfigError);
  EXPECT_THROW(ApplyMask(cs, MaskFromRange(0, 1, 0, 0), 50), ConfigError);
  EXPECT_THROW(ApplyMask(cs, MaskFromRange(0, 2, 0, 0), 0), ConfigError);
  SourceMask wrong;
  wrong.values = Grid(10, 2);
  EXPECT_THROW(ApplyMask(cs, wrong, 50), ConfigError);
  EXPECT_NO_THROW(ApplyMask(cs, MaskFromRange(0, 2, 0, 0), 50));
}

TEST(ApplyMaskTest, BinaryMaskIsIdempotentWithoutCrossfade) {
  SourceMask m = MaskFromRange(0, 4, 20, 120);
  m.values.at(50, 2) = 0.0;
  m.values.at(200, 1) = 1.0;
  const auto cs = RampChannels(4 * 25 + 3);
  const auto once = ApplyMask(cs, m, 25, 0);
  const auto twice = ApplyMask(once, m, 25, 0);
  EXPECT_EQ(once.channels, twice.channels);
  EXPECT_EQ(once.channels[0], std::vector<double>(once.length(), 0.0));
  EXPECT_EQ(once.channels[60], cs.channels[60]);
}

TEST(ApplyMaskTest, FullMaskSynthesizesTheMixture) {
  const auto mix = testing::MakeDeskMixture().mixture;
  const Filterbank bank;
  const auto analyzed = bank.Analyze(mix);
  const int frame = FrameSpec{}.window_samples();
  const int frames = static_cast<int>(mix.size()) / frame;
  const auto full = MaskFromRange(0, frames, 0, kNumChannels - 1);
  const auto masked = ApplyMaskAndSynthesize(analyzed, full, frame, bank);
  const auto direct = bank.Synthesize(analyzed);
  EXPECT_EQ(masked.samples, direct.samples);
}

TEST(NormalizeEnergyTest, MatchesFrameRms) {
  const auto ref = testing::Sine(440.0, 0.5, 250);
  auto sig = testing::Sine(300.0, 0.1, 250);
  for (std::size_t n = 100; n < 200; ++n) sig.samples[n] *= 7.0;
  const auto out = NormalizeEnergy(sig, ref, 100);
  for (std::size_t start : {0u, 100u, 200u}) {
    const std::size_t end = std::min<std::size_t>(start + 100, 250);
    EXPECT_NEAR(testing::Energy(out.samples, start, end),
                testing::Energy(ref.samples, start, end), 1e-9)
        << start;
  }
}

TEST(NormalizeEnergyTest, LeavesSilentFramesAlone) {
  const auto ref = testing::Sine(440.0, 0.5, 200);
  AudioSignal sig = ref;
  for (std::size_t n = 0; n < 100; ++n) sig.samples[n] = 0.0;
  const auto out = NormalizeEnergy(sig, ref, 100);
  for (std::size_t n = 0; n < 100; ++n) EXPECT_EQ(out.samples[n], 0.0);
  EXPECT_THROW(NormalizeEnergy(sig, testing::Sine(1.0, 1.0, 10), 100), ConfigError);
  EXPECT_THROW(NormalizeEnergy(sig, ref, 0), ConfigError);
}

TEST(SnrTest, KnownValues) {
  const auto t = testing::Sine(500.0, 1.0, 800);
  EXPECT_EQ(SnrDb(t, t), kSnrCapDb);
  EXPECT_NEAR(SnrDb(testing::Scaled(t, 0.9), t), 20.0, 1e-9);
  EXPECT_NEAR(SnrDb(testing::Scaled(t, 0.0), t), 0.0, 1e-12);
  // Mixture error 0.5 t (6.02 dB), estimate error 0.1 t (20 dB).
  EXPECT_NEAR(SnrImprovement(testing::Scaled(t, 0.9), t, testing::Scaled(t, 1.5)),
              20.0 - 20.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(SnrImprovement(t, t, testing::Scaled(t, 0.5)),
              kSnrCapDb - 20.0 * std::log10(2.0), 1e-9);
}

TEST(SnrTest, RejectsSilentTargetAndLengthMismatch) {
  const auto t = testing::Sine(500.0, 1.0, 800);
  EXPECT_THROW(SnrDb(t, testing::Scaled(t, 0.0)), ConfigError);
  EXPECT_THROW(SnrDb(t, testing::Sine(500.0, 1.0, 10)), ConfigError);
  EXPECT_THROW(SnrImprovement(t, testing::Scaled(t, 0.0), t), ConfigError);
}

}  // namespace
}  // namespace spikesep
