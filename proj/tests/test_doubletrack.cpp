// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "ndtpf/datagen.hpp"
#include "ndtpf/doubletrack.hpp"
#include "ndtpf/error.hpp"
#include "oracles.hpp"

using namespace ndtpf;
namespace fs = std::filesystem;

namespace {

F0Contour flat(double semitone, std::size_t frames) {
  return F0Contour(std::vector<double>(frames, semitone));
}

F0Contour melody() {
  return render_natural(gen_score(31, 6), NaturalStyle::mean());
}

double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (const double v : x) e += v * v;
  return e;
}

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ndtpf_doubletrack";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("ADT with zero depth is the identity") {
  const auto in = melody();
  AdtConfig cfg;
  cfg.depth_semitones = 0.0;
  CHECK(adt_modulate(in, cfg).values() == in.values());
}

TEST_CASE("ADT follows the LFO") {
  const auto in = flat(60.0, 400);
  const AdtConfig cfg;
  const auto out = adt_modulate(in, cfg);
  CHECK(out[0] == doctest::Approx(60.0));
  // quarter period of 0.775 Hz sits at frame 64.5
  const double at64 = 0.1 * std::sin(2.0 * std::numbers::pi * 0.775 * 0.320);
  CHECK(out[64] - 60.0 == doctest::Approx(at64).epsilon(1e-12));
  CHECK(out[64] - 60.0 > 0.0999);
  double dev = 0.0;
  for (std::size_t t = 0; t < out.size(); ++t) dev = std::max(dev, std::abs(out[t] - 60.0));
  CHECK(dev <= 0.1 + 1e-12);
  CHECK(dev > 0.1 - 1e-4);
}

TEST_CASE("ADT is undone by the opposite phase") {
  const auto in = melody();
  AdtConfig up;
  up.depth_semitones = 0.3;
  up.phase_rad = 0.4;
  AdtConfig down = up;
  down.phase_rad = 0.4 + std::numbers::pi;
  const auto back = adt_modulate(adt_modulate(in, up), down);
  for (std::size_t t = 0; t < in.size(); ++t) REQUIRE(std::abs(back[t] - in[t]) < 1e-12);
  CHECK(back.voicing() == in.voicing());
}

TEST_CASE("ADT rejects non-finite settings") {
  AdtConfig cfg;
  cfg.rate_hz = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adt_modulate(flat(60.0, 10), cfg), InvalidArgument);
}

TEST_CASE("single harmonic at A4 peaks at 440 Hz") {
  SynthConfig cfg;
  cfg.n_harmonics = 1;
  const auto wave = synthesize_harmonic(flat(69.0, 200), cfg, 16000.0);
  REQUIRE(wave.samples.size() == 16000);
  const std::vector<double> slice(wave.samples.begin() + 4000, wave.samples.begin() + 8000);
  CHECK(oracle::peak_frequency(slice, 16000.0, 4000) == doctest::Approx(440.0));
  CHECK(wave.peak() == doctest::Approx(cfg.peak));
}

TEST_CASE("synthesizer output is silent when unvoiced and smooth when voiced") {
  const F0Contour silent(std::vector<double>(100, 60.0), std::vector<bool>(100, false));
  for (const double s : synthesize_harmonic(silent, SynthConfig{}, 16000.0).samples)
    REQUIRE(s == 0.0);

  SynthConfig cfg;
  cfg.n_harmonics = 1;
  const auto wave = synthesize_harmonic(melody(), cfg, 16000.0);
  const double bound = 2.0 * std::numbers::pi * semitone_to_hz(kMaxMidiPitch + 2.0) / 16000.0;
  for (std::size_t i = 1; i < wave.samples.size(); ++i)
    REQUIRE(std::abs(wave.samples[i] - wave.samples[i - 1]) <= cfg.peak * bound * 1.5);
}

TEST_CASE("synthesizer argument checks") {
  SynthConfig bad;
  bad.n_harmonics = 0;
  CHECK_THROWS_AS(synthesize_harmonic(flat(60.0, 10), bad, 16000.0), InvalidArgument);
  CHECK_THROWS_AS(synthesize_harmonic(flat(60.0, 10), SynthConfig{}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(synthesize_harmonic(flat(140.0, 10), SynthConfig{}, 16000.0), DomainError);
}

TEST_CASE("mix delays and scales the secondary track") {
  const auto a = synthesize_harmonic(melody(), SynthConfig{}, 16000.0);
  const auto b = synthesize_harmonic(adt_modulate(melody(), AdtConfig{}), SynthConfig{}, 16000.0);
  MixConfig cfg;
  CHECK(cfg.delay_samples(16000.0) == 320);
  CHECK(cfg.gain_factor() == doctest::Approx(0.70795).epsilon(1e-4));

  const auto out = mix_tracks(a, b, cfg);
  REQUIRE(out.samples.size() == b.samples.size() + 320);
  const double g = cfg.gain_factor();
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const double pa = i < a.samples.size() ? a.samples[i] : 0.0;
    const double pb = i >= 320 ? b.samples[i - 320] : 0.0;
    REQUIRE(out.samples[i] == doctest::Approx(pa + g * pb).epsilon(1e-12));
  }

  Waveform silent{std::vector<double>(a.samples.size(), 0.0), 16000.0};
  MixConfig loud = cfg;
  loud.gain_db = 0.0;
  const auto echo = mix_tracks(silent, b, loud);
  CHECK(oracle::xcorr_peak(echo.samples, b.samples, 600) == 320);
}

TEST_CASE("mix with -inf gain returns the primary") {
  const auto a = synthesize_harmonic(melody(), SynthConfig{}, 16000.0);
  const auto b = synthesize_harmonic(flat(62.0, 300), SynthConfig{}, 16000.0);
  MixConfig cfg;
  cfg.gain_db = -std::numeric_limits<double>::infinity();
  const auto out = mix_tracks(a, b, cfg);
  for (std::size_t i = 0; i < a.samples.size(); ++i) REQUIRE(out.samples[i] == a.samples[i]);
}

TEST_CASE("mix is linear in the secondary track") {
  const auto a = synthesize_harmonic(flat(60.0, 100), SynthConfig{}, 16000.0);
  const auto b = synthesize_harmonic(flat(64.0, 100), SynthConfig{}, 16000.0);
  auto b2 = b;
  for (auto& v : b2.samples) v *= 2.0;
  const MixConfig cfg;
  const auto once = mix_tracks(a, b, cfg);
  const auto twice = mix_tracks(a, b2, cfg);
  for (std::size_t i = 0; i < once.samples.size(); ++i) {
    const double pa = i < a.samples.size() ? a.samples[i] : 0.0;
    REQUIRE(twice.samples[i] - pa == doctest::Approx(2.0 * (once.samples[i] - pa)).epsilon(1e-12));
  }
}

TEST_CASE("mix argument checks") {
  const Waveform a{std::vector<double>(10, 0.0), 16000.0};
  const Waveform b{std::vector<double>(10, 0.0), 8000.0};
  CHECK_THROWS_AS(mix_tracks(a, b, MixConfig{}), InvalidArgument);
  MixConfig neg;
  neg.delay_ms = -1.0;
  CHECK_THROWS_AS(mix_tracks(a, a, neg), InvalidArgument);
}

TEST_CASE("WAV round trip is exact up to quantization") {
  const auto wave = synthesize_harmonic(melody(), SynthConfig{}, 16000.0);
  const auto path = temp_file("round.wav").string();
  CHECK(write_wav(path, wave) == 0);
  const auto back = read_wav(path);
  REQUIRE(back.samples.size() == wave.samples.size());
  CHECK(back.sample_rate_hz == 16000.0);
  for (std::size_t i = 0; i < wave.samples.size(); ++i)
    REQUIRE(std::abs(back.samples[i] - wave.samples[i]) <= 1.0 / 32767.0);
}

TEST_CASE("WAV writer counts clipped samples") {
  const Waveform loud{{0.5, 1.5, -2.0, 1.0}, 16000.0};
  CHECK(loud.clipped_count() == 2);
  const auto path = temp_file("clip.wav").string();
  CHECK(write_wav(path, loud) == 2);
  const auto back = read_wav(path);
  CHECK(back.samples[1] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(back.samples[2] == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("WAV error handling") {
  const Waveform nan{{std::numeric_limits<double>::quiet_NaN()}, 16000.0};
  CHECK_THROWS_AS(write_wav(temp_file("nan.wav").string(), nan), NumericError);
  const Waveform odd{{0.0}, 16000.5};
  CHECK_THROWS_AS(write_wav(temp_file("odd.wav").string(), odd), InvalidArgument);
  const auto junk = temp_file("junk.wav");
  std::ofstream(junk) << "not a wave file";
  CHECK_THROWS_AS(read_wav(junk.string()), FormatError);
  CHECK_THROWS_AS(read_wav(temp_file("missing.wav").string()), IoError);
}

TEST_CASE("NDT with the identity model is a comb filter") {
  const GmmnModel identity(NetworkShape{}, 1, true);
  const auto in = melody();
  PostfilterConfig pf;
  pf.normalizer = MsNormalizer({1}, {-5.0}, {5.0});
  pf.noise_seed = 9;
  const MixConfig mix;
  const auto out = render_ndt(identity, in, pf, mix, SynthConfig{});
  const auto dry = synthesize_harmonic(in, SynthConfig{}, 16000.0);
  const double g = mix.gain_factor();
  REQUIRE(out.samples.size() == dry.samples.size() + 320);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const double pa = i < dry.samples.size() ? dry.samples[i] : 0.0;
    const double pb = i >= 320 ? dry.samples[i - 320] : 0.0;
    REQUIRE(out.samples[i] == doctest::Approx(pa + g * pb).epsilon(1e-6));
  }
}

TEST_CASE("NDT rendering is deterministic and comparable in level to ADT") {
  CorpusOptions opt;
  opt.n_songs = 2;
  opt.takes_per_song = 2;
  opt.notes_per_song = 8;
  opt.seed = 13;
  const auto songs = build_corpus(opt);
  auto corpus = build_pairs(songs, StftConfig{}, {1});
  TrainConfig tc;
  tc.seed = 1;
  tc.epochs = 1;
  tc.batch_size = 128;
  const auto model = train(corpus.pairs, tc).model;
  PostfilterConfig pf;
  pf.normalizer = corpus.normalizer;
  pf.noise_seed = 4;

  const auto in = songs[0].generated;
  const auto a = render_ndt(model, in, pf, MixConfig{}, SynthConfig{});
  const auto b = render_ndt(model, in, pf, MixConfig{}, SynthConfig{});
  CHECK(a.samples == b.samples);
  const auto adt = render_adt(in, AdtConfig{}, MixConfig{}, SynthConfig{});
  const double ratio_db = 10.0 * std::log10(energy(a.samples) / energy(adt.samples));
  CHECK(std::abs(ratio_db) < 3.0);
}
