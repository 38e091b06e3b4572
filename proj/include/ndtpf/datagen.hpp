// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ndtpf/f0core.hpp"
#include "ndtpf/gmmn.hpp"
#include "ndtpf/modspec.hpp"

namespace ndtpf {

struct Note {
  int midi_pitch = 60;
  double duration_ms = 500.0;
  bool rest = false;
};

struct Score {
  std::vector<Note> notes;

  double total_ms() const;
  // Duration-weighted mean pitch; rests hold the previous pitch.
  double mean_pitch() const;
  void validate() const;
};

inline constexpr int kMinMidiPitch = 40;
inline constexpr int kMaxMidiPitch = 90;

// Stepwise-biased random walk, durations 200-1000 ms. The last note is
// stretched if the score is shorter than `min_total_ms`.
Score gen_score(std::uint64_t seed, int n_notes, double min_total_ms = 960.0);

// Per-take performance parameters of the synthetic singer.
struct NaturalStyle {
  double vibrato_rate_hz = 6.0;       // U[5, 7]
  double vibrato_depth = 0.5;         // U[0.2, 0.8] semitones
  double overshoot = 0.25;            // U[0, 0.5] semitones
  double drift_std = 0.0;             // U[0.05, 0.2] semitones
  bool random_vibrato_phase = false;
  std::uint64_t seed = 0;

  static NaturalStyle sample(std::uint64_t seed);
  // Distribution means with drift disabled; what the deterministic
  // synthesizer stand-in renders.
  static NaturalStyle mean();
};

inline constexpr double kSmoothingTauMs = 40.0;

// Step function -> two cascaded one-pole smoothers (40 ms) -> boundary
// overshoot -> vibrato -> low-passed drift.
F0Contour render_natural(const Score& score, const NaturalStyle& style,
                         double frame_shift_ms = kDefaultFrameShiftMs);
F0Contour render_generated(const Score& score,
                           double frame_shift_ms = kDefaultFrameShiftMs);

struct SongContours {
  std::string id;
  F0Contour generated;
  std::vector<F0Contour> natural;
};

struct CorpusOptions {
  int n_songs = 8;
  int takes_per_song = 4;
  int notes_per_song = 12;
  std::uint64_t seed = 0;
};

std::vector<SongContours> build_corpus(const CorpusOptions& opt);

// Segment-aligned (generated MS, natural MS) pairs over every take and every
// analysis offset, normalized with a normalizer fitted on the natural side.
struct CorpusPairs {
  TrainingPairs pairs;
  MsNormalizer normalizer;
  std::size_t songs = 0;
  std::size_t takes = 0;
};

CorpusPairs build_pairs(const std::vector<SongContours>& songs,
                        const StftConfig& stft,
                        const std::vector<std::size_t>& bins = {1});

// Same, reusing an existing normalizer (held-out data).
TrainingPairs build_pairs(const std::vector<SongContours>& songs,
                          const StftConfig& stft,
                          const MsNormalizer& normalizer);

// Writes song_XXX_generated.f0 / song_XXX_take_YY.f0 and corpus.txt:
//   #CORPUS v1
//   song <id> generated <path> natural <path>...
void write_corpus(const std::string& dir,
                  const std::vector<SongContours>& songs);
std::vector<SongContours> read_corpus(const std::string& dir);

inline constexpr const char* kManifestName = "corpus.txt";

}  // namespace ndtpf
