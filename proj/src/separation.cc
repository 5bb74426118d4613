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

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace spikesep {
namespace {

using ChannelSet = std::vector<int>;  // sorted

double Jaccard(const ChannelSet& a, const ChannelSet& b) {
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

double SumSquares(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

}  // namespace

int SourceMask::CountOn() const {
  return static_cast<int>(std::count_if(values.values.begin(), values.values.end(),
                                        [](double v) { return v != 0.0; }));
}

std::vector<SourceMask> GroupsToMasks(const std::vector<PhaseGrouping>& groupings) {
  const int frames = static_cast<int>(groupings.size());
  std::vector<ChannelSet> last_seen;            // per source
  std::vector<std::vector<int>> assignment;     // per frame: group -> source

  for (int f = 0; f < frames; ++f) {
    const PhaseGrouping& g = groupings[f];
    std::vector<ChannelSet> groups(g.num_groups);
    for (int c = 0; c < static_cast<int>(g.labels.size()); ++c) {
      if (g.labels[c] != PhaseGrouping::kSilent) groups[g.labels[c]].push_back(c);
    }

    // (overlap, group, source), largest overlap first; ties resolve to the
    // lowest group then the lowest source.
    std::vector<std::tuple<double, int, int>> pairs;
    for (int gi = 0; gi < g.num_groups; ++gi) {
      for (int s = 0; s < static_cast<int>(last_seen.size()); ++s) {
        const double j = Jaccard(groups[gi], last_seen[s]);
        if (j > 0.0) pairs.emplace_back(j, gi, s);
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
      return std::get<2>(a) < std::get<2>(b);
    });

    std::vector<int> to_source(g.num_groups, -1);
    std::vector<bool> source_taken(last_seen.size(), false);
    for (const auto& [overlap, gi, s] : pairs) {
      if (to_source[gi] != -1 || source_taken[s]) continue;
      to_source[gi] = s;
      source_taken[s] = true;
    }
    for (int gi = 0; gi < g.num_groups; ++gi) {
      if (groups[gi].empty()) continue;
      if (to_source[gi] == -1) {
        to_source[gi] = static_cast<int>(last_seen.size());
        last_seen.emplace_back();
      }
      last_seen[to_source[gi]] = groups[gi];
    }
    assignment.push_back(std::move(to_source));
  }

  std::vector<SourceMask> masks(last_seen.size());
  for (std::size_t s = 0; s < masks.size(); ++s) {
    masks[s].source_id = static_cast<int>(s);
    masks[s].values = Grid(kNumChannels, frames);
  }
  for (int f = 0; f < frames; ++f) {
    const PhaseGrouping& g = groupings[f];
    for (int c = 0; c < static_cast<int>(g.labels.size()); ++c) {
      const int gi = g.labels[c];
      if (gi == PhaseGrouping::kSilent) continue;
      masks[assignment[f][gi]].values.at(c, f) = 1.0;
    }
  }
  return masks;
}

std::vector<SourceMask> LimitSources(std::vector<SourceMask> masks, int max_sources) {
  if (max_sources <= 0 || static_cast<int>(masks.size()) <= max_sources) return masks;
  std::vector<int> order(masks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return masks[a].CountOn() > masks[b].CountOn();
  });
  std::vector<int> kept(order.begin(), order.begin() + max_sources);
  std::sort(kept.begin(), kept.end());
  std::vector<SourceMask> out;
  for (int k : kept) out.push_back(masks[k]);

  const int frames = masks.front().num_frames();
  for (std::size_t d = 0; d < masks.size(); ++d) {
    if (std::find(kept.begin(), kept.end(), static_cast<int>(d)) != kept.end()) continue;
    for (int f = 0; f < frames; ++f) {
      for (int c = 0; c < kNumChannels; ++c) {
        if (!masks[d].on(c, f)) continue;
        int best = -1;
        int best_dist = std::numeric_limits<int>::max();
        for (std::size_t k = 0; k < out.size(); ++k) {
          for (int c2 = 0; c2 < kNumChannels; ++c2) {
            if (masks[kept[k]].on(c2, f) && std::abs(c2 - c) < best_dist) {
              best_dist = std::abs(c2 - c);
              best = static_cast<int>(k);
            }
          }
        }
        if (best >= 0) out[best].values.at(c, f) = 1.0;
      }
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k].source_id = static_cast<int>(k);
  return out;
}

std::vector<double> ExpandMask(const SourceMask& mask, int channel,
                               std::size_t length, int frame_len, int crossfade) {
  const int frames = mask.num_frames();
  std::vector<double> gain(length, 0.0);
  if (frames == 0) return gain;
  auto value_at = [&](long f) {
    return mask.values.at(channel, static_cast<int>(std::clamp<long>(f, 0, frames - 1)));
  };
  for (std::size_t t = 0; t < length; ++t) gain[t] = value_at(static_cast<long>(t / frame_len));

  const int fade = std::min(crossfade, frame_len);
  if (fade <= 1) return gain;
  for (int f = 1; f < frames; ++f) {
    const double before = value_at(f - 1);
    const double after = value_at(f);
    if (before == after) continue;
    const long boundary = static_cast<long>(f) * frame_len;
    for (int k = 0; k < fade; ++k) {
      const long t = boundary - fade / 2 + k;
      if (t < 0 || t >= static_cast<long>(length)) continue;
      const double r = 0.5 - 0.5 * std::cos(kPi * (k + 0.5) / fade);
      gain[t] = before + (after - before) * r;
    }
  }
  return gain;
}

ChannelSignals ApplyMask(const ChannelSignals& channels, const SourceMask& mask,
                         int frame_len, int crossfade) {
  if (static_cast<int>(channels.num_channels()) != mask.values.rows) {
    throw ConfigError("ApplyMask: channel count does not match mask");
  }
  if (frame_len <= 0) throw ConfigError("ApplyMask: frame_len must be positive");
  const std::size_t len = channels.length();
  if (static_cast<std::size_t>(mask.num_frames()) * frame_len > len ||
      (mask.num_frames() + 1) * static_cast<std::size_t>(frame_len) <= len) {
    throw ConfigError("ApplyMask: mask frames do not cover the signal");
  }
  ChannelSignals out = channels;
  for (int c = 0; c < static_cast<int>(out.num_channels()); ++c) {
    const auto gain = ExpandMask(mask, c, len, frame_len, crossfade);
    for (std::size_t t = 0; t < len; ++t) out.channels[c][t] *= gain[t];
  }
  return out;
}

AudioSignal ApplyMaskAndSynthesize(const ChannelSignals& channels,
                                   const SourceMask& mask, int frame_len,
                                   const Filterbank& bank, ExecPolicy policy) {
  return bank.Synthesize(ApplyMask(channels, mask, frame_len), policy);
}

AudioSignal NormalizeEnergy(const AudioSignal& signal, const AudioSignal& reference,
                            int frame_len) {
  if (signal.size() != reference.size()) {
    throw ConfigError("NormalizeEnergy: length mismatch");
  }
  if (frame_len <= 0) throw ConfigError("NormalizeEnergy: frame_len must be positive");
  AudioSignal out = signal;
  for (std::size_t start = 0; start < signal.size(); start += frame_len) {
    const std::size_t n = std::min<std::size_t>(frame_len, signal.size() - start);
    std::span<const double> s(signal.samples.data() + start, n);
    std::span<const double> r(reference.samples.data() + start, n);
    const double rms_s = std::sqrt(SumSquares(s) / n);
    if (rms_s < 1e-8) continue;
    const double gain = std::sqrt(SumSquares(r) / n) / rms_s;
    for (std::size_t k = 0; k < n; ++k) out.samples[start + k] *= gain;
  }
  return out;
}

double SnrDb(const AudioSignal& estimate, const AudioSignal& target) {
  if (estimate.size() != target.size()) throw ConfigError("SnrDb: length mismatch");
  const double signal = SumSquares(target.samples);
  if (!(signal > 0.0)) throw ConfigError("SnrDb: zero-energy target");
  double error = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = target.samples[i] - estimate.samples[i];
    error += d * d;
  }
  if (error == 0.0) return kSnrCapDb;
  return std::min(kSnrCapDb, 10.0 * std::log10(signal / error));
}

double SnrImprovement(const AudioSignal& estimate, const AudioSignal& target,
                      const AudioSignal& mixture) {
  return std::min(kSnrCapDb, SnrDb(estimate, target) - SnrDb(mixture, target));
}

}  // namespace spikesep
