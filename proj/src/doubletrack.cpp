// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ndtpf/doubletrack.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "ndtpf/error.hpp"

namespace ndtpf {

void AdtConfig::validate() const {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz))
    throw InvalidArgument("LFO rate must be > 0");
  if (!(depth_semitones >= 0.0) || !std::isfinite(depth_semitones))
    throw InvalidArgument("LFO depth must be >= 0");
  if (!std::isfinite(phase_rad)) throw InvalidArgument("LFO phase must be finite");
}

void MixConfig::validate() const {
  if (!(delay_ms >= 0.0) || !std::isfinite(delay_ms))
    throw InvalidArgument("delay must be >= 0");
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample rate must be > 0");
  if (std::isnan(gain_db) || gain_db == HUGE_VAL)
    throw InvalidArgument("gain must be finite or -inf");
}

double MixConfig::gain_factor() const {
  return std::isinf(gain_db) ? 0.0 : std::pow(10.0, gain_db / 20.0);
}

long MixConfig::delay_samples(double sr) const {
  return std::lround(delay_ms * sr / 1000.0);
}

std::size_t Waveform::clipped_count() const {
  return static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(), [](double s) { return std::abs(s) > 1.0; }));
}

double Waveform::peak() const {
  double p = 0.0;
  for (const double s : samples) p = std::max(p, std::abs(s));
  return p;
}

F0Contour adt_modulate(const F0Contour& contour, const AdtConfig& cfg) {
  cfg.validate();
  std::vector<double> out = contour.values();
  if (cfg.depth_semitones == 0.0) return contour;
  const double step = contour.frame_shift_ms() / 1000.0;
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] += cfg.depth_semitones *
              std::sin(2.0 * std::numbers::pi * cfg.rate_hz *
                           static_cast<double>(t) * step +
                       cfg.phase_rad);
  return contour.with_values(std::move(out));
}

Waveform synthesize_harmonic(const F0Contour& contour, const SynthConfig& cfg,
                             double sample_rate_hz) {
  if (cfg.n_harmonics < 1 || !(sample_rate_hz > 0.0) || !(cfg.peak > 0.0))
    throw InvalidArgument("bad synthesizer configuration");
  const std::size_t frames = contour.size();
  std::vector<double> hz(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    hz[t] = semitone_to_hz(contour[t]);
    if (contour.voicing()[t] && (hz[t] < cfg.min_hz || hz[t] > cfg.max_hz))
      throw DomainError("f0 " + std::to_string(hz[t]) + " Hz at frame " +
                        std::to_string(t) + " outside synthesizer range");
  }

  const double per_frame = sample_rate_hz * contour.frame_shift_ms() / 1000.0;
  const auto n = static_cast<std::size_t>(
      std::llround(static_cast<double>(frames) * per_frame));
  const double fade_step =
      1.0 / std::max(1.0, std::round(cfg.fade_ms * sample_rate_hz / 1000.0));
  const double nyquist = sample_rate_hz / 2.0;

  Waveform wave{std::vector<double>(n, 0.0), sample_rate_hz};
  double phase = 0.0;
  double gain = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double pos = static_cast<double>(s) / per_frame;
    const auto f = std::min(static_cast<std::size_t>(pos), frames - 1);
    const auto g = std::min(f + 1, frames - 1);
    const double frac = std::min(pos - static_cast<double>(f), 1.0);
    const double f0 = hz[f] + (hz[g] - hz[f]) * frac;

    const double target = contour.voicing()[f] ? 1.0 : 0.0;
    if (gain < target)
      gain = std::min(target, gain + fade_step);
    else if (gain > target)
      gain = std::max(target, gain - fade_step);

    double sample = 0.0;
    if (gain > 0.0) {
      double amp = 1.0;
      for (int h = 1; h <= cfg.n_harmonics; ++h) {
        if (h * f0 >= nyquist) break;
        sample += amp * std::sin(h * phase);
        amp *= cfg.rolloff;
      }
    }
    wave.samples[s] = gain * sample;
    phase += 2.0 * std::numbers::pi * f0 / sample_rate_hz;
    if (phase >= 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
  }
  const double peak = wave.peak();
  if (peak > 0.0)
    for (auto& v : wave.samples) v *= cfg.peak / peak;
  return wave;
}

Waveform mix_tracks(const Waveform& primary, const Waveform& secondary,
                    const MixConfig& cfg) {
  cfg.validate();
  if (primary.sample_rate_hz != secondary.sample_rate_hz)
    throw InvalidArgument("cannot mix tracks with different sample rates");
  const auto delay = static_cast<std::size_t>(
      cfg.delay_samples(primary.sample_rate_hz));
  const double gain = cfg.gain_factor();
  Waveform out;
  out.sample_rate_hz = primary.sample_rate_hz;
  out.samples.assign(
      std::max(primary.samples.size(), secondary.samples.size() + delay), 0.0);
  std::copy(primary.samples.begin(), primary.samples.end(), out.samples.begin());
  for (std::size_t i = 0; i < secondary.samples.size(); ++i)
    out.samples[i + delay] += gain * secondary.samples[i];
  return out;
}

Waveform render_ndt(const GmmnModel& model, const F0Contour& contour,
                    const PostfilterConfig& pf, const MixConfig& mix,
                    const SynthConfig& synth) {
  const F0Contour modulated = filter_contour(model, contour, pf);
  return mix_tracks(synthesize_harmonic(contour, synth, mix.sample_rate_hz),
                    synthesize_harmonic(modulated, synth, mix.sample_rate_hz),
                    mix);
}

Waveform render_adt(const F0Contour& contour, const AdtConfig& adt,
                    const MixConfig& mix, const SynthConfig& synth) {
  const F0Contour modulated = adt_modulate(contour, adt);
  return mix_tracks(synthesize_harmonic(contour, synth, mix.sample_rate_hz),
                    synthesize_harmonic(modulated, synth, mix.sample_rate_hz),
                    mix);
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff),
                              static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

void put_u16(std::ofstream& out, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xff),
                              static_cast<char>((v >> 8) & 0xff)};
  out.write(b.data(), 2);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

constexpr double kPcmScale = 32767.0;

}  // namespace

std::size_t write_wav(const std::string& path, const Waveform& wave) {
  if (!(wave.sample_rate_hz > 0.0) ||
      wave.sample_rate_hz != std::round(wave.sample_rate_hz))
    throw InvalidArgument("WAV needs a positive integer sample rate");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const auto rate = static_cast<std::uint32_t>(wave.sample_rate_hz);
  const auto data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, rate);
  put_u32(out, rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.write("data", 4);
  put_u32(out, data_bytes);
  std::size_t clipped = 0;
  for (const double s : wave.samples) {
    if (!std::isfinite(s)) throw NumericError("non-finite sample in waveform");
    double v = std::round(s * kPcmScale);
    if (v > kPcmScale || v < -kPcmScale) {
      ++clipped;
      v = std::clamp(v, -kPcmScale, kPcmScale);
    }
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  if (!out) throw IoError("write failed: " + path);
  return clipped;
}

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError(path + ": not a RIFF/WAVE file");
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint32_t rate = 0;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = get_u32(chunk + 4);
    if (pos + 8 + size > bytes.size())
      throw FormatError(path + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(path + ": short fmt chunk");
      if (get_u16(chunk + 8) != 1 || get_u16(chunk + 10) != 1 ||
          get_u16(chunk + 22) != 16)
        throw FormatError(path + ": only mono 16-bit PCM is supported");
      rate = get_u32(chunk + 12);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw FormatError(path + ": data before fmt chunk");
      Waveform w;
      w.sample_rate_hz = rate;
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(get_u16(chunk + 8 + 2 * i));
        w.samples[i] = static_cast<double>(v) / kPcmScale;
      }
      return w;
    }
    pos += 8 + size + (size & 1);
  }
  throw FormatError(path + ": no data chunk");
}

}  // namespace ndtpf
