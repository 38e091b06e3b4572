// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "ndtpf/f0core.hpp"
#include "ndtpf/gmmn.hpp"
#include "ndtpf/postfilter.hpp"

namespace ndtpf {

// Sine LFO in the pitch domain. depth is the peak deviation in semitones.
struct AdtConfig {
  double rate_hz = 0.775;
  double depth_semitones = 0.1;
  double phase_rad = 0.0;

  void validate() const;
};

struct MixConfig {
  double delay_ms = 20.0;
  double gain_db = -3.0;  // -inf mutes the secondary track
  double sample_rate_hz = 16000.0;

  void validate() const;
  double gain_factor() const;
  long delay_samples(double sample_rate_hz) const;
};

// Additive harmonic test vehicle standing in for a vocoder.
struct SynthConfig {
  int n_harmonics = 10;
  double rolloff = 0.7;
  double fade_ms = 5.0;
  double peak = 0.9;
  double min_hz = 50.0;
  double max_hz = 2000.0;
};

struct Waveform {
  std::vector<double> samples;
  double sample_rate_hz = 16000.0;

  // Samples a 16-bit writer would have to clip.
  std::size_t clipped_count() const;
  double peak() const;
};

F0Contour adt_modulate(const F0Contour& contour, const AdtConfig& cfg);

Waveform synthesize_harmonic(const F0Contour& contour, const SynthConfig& cfg,
                             double sample_rate_hz);

// out = primary + gain * secondary delayed by round(delay_ms * sr / 1000).
Waveform mix_tracks(const Waveform& primary, const Waveform& secondary,
                    const MixConfig& cfg);

Waveform render_ndt(const GmmnModel& model, const F0Contour& contour,
                    const PostfilterConfig& pf, const MixConfig& mix,
                    const SynthConfig& synth);
Waveform render_adt(const F0Contour& contour, const AdtConfig& adt,
                    const MixConfig& mix, const SynthConfig& synth);

// RIFF/WAVE, mono, 16-bit signed PCM. Returns the number of clipped samples.
std::size_t write_wav(const std::string& path, const Waveform& wave);
Waveform read_wav(const std::string& path);

}  // namespace ndtpf
