// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ndtpf/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ndtpf/error.hpp"
#include "ndtpf/rng.hpp"

namespace ndtpf {

double Score::total_ms() const {
  double total = 0.0;
  for (const auto& n : notes) total += n.duration_ms;
  return total;
}

double Score::mean_pitch() const {
  double weighted = 0.0, total = 0.0;
  int held = notes.empty() ? 60 : notes.front().midi_pitch;
  for (const auto& n : notes) {
    if (!n.rest) held = n.midi_pitch;
    weighted += held * n.duration_ms;
    total += n.duration_ms;
  }
  return weighted / total;
}

void Score::validate() const {
  if (notes.empty()) throw InvalidArgument("score has no notes");
  if (notes.front().rest) throw InvalidArgument("score cannot open on a rest");
  for (const auto& n : notes) {
    if (n.midi_pitch < kMinMidiPitch || n.midi_pitch > kMaxMidiPitch)
      throw InvalidArgument("note pitch outside 40..90");
    if (!(n.duration_ms > 0.0)) throw InvalidArgument("note duration <= 0");
  }
}

Score gen_score(std::uint64_t seed, int n_notes, double min_total_ms) {
  if (n_notes < 1) throw InvalidArgument("n_notes must be >= 1");
  Rng rng(seed);
  Score score;
  int pitch = static_cast<int>(rng.uniform_int(55, 72));
  for (int i = 0; i < n_notes; ++i) {
    Note note;
    if (i > 0) {
      // Mostly steps of 0-2 semitones, occasional leaps.
      int step = static_cast<int>(std::lround(2.0 * rng.normal()));
      step = std::clamp(step, -7, 7);
      pitch += step;
      if (pitch < kMinMidiPitch) pitch = 2 * kMinMidiPitch - pitch;
      if (pitch > kMaxMidiPitch) pitch = 2 * kMaxMidiPitch - pitch;
    }
    note.midi_pitch = pitch;
    note.duration_ms = 10.0 * static_cast<double>(rng.uniform_int(20, 100));
    note.rest = i > 0 && i + 1 < n_notes && rng.uniform() < 0.1;
    score.notes.push_back(note);
  }
  const double total = score.total_ms();
  if (total < min_total_ms) score.notes.back().duration_ms += min_total_ms - total;
  return score;
}

NaturalStyle NaturalStyle::sample(std::uint64_t seed) {
  Rng rng(seed);
  NaturalStyle s;
  s.vibrato_rate_hz = rng.uniform(5.0, 7.0);
  s.vibrato_depth = rng.uniform(0.2, 0.8);
  s.overshoot = rng.uniform(0.0, 0.5);
  s.drift_std = rng.uniform(0.05, 0.2);
  s.random_vibrato_phase = true;
  s.seed = seed;
  return s;
}

NaturalStyle NaturalStyle::mean() { return NaturalStyle{}; }

namespace {

constexpr double kOvershootTauMs = 60.0;
constexpr double kVibratoDelayMs = 100.0;
constexpr double kVibratoRampMs = 200.0;
constexpr double kDriftTauMs = 150.0;

// Two cascaded one-pole low-passes, state initialized at the first sample.
std::vector<double> smooth2(const std::vector<double>& x, double tau_ms,
                            double shift_ms) {
  const double alpha = 1.0 - std::exp(-shift_ms / tau_ms);
  std::vector<double> y(x.size());
  double s1 = x.front(), s2 = x.front();
  for (std::size_t t = 0; t < x.size(); ++t) {
    s1 += alpha * (x[t] - s1);
    s2 += alpha * (s1 - s2);
    y[t] = s2;
  }
  return y;
}

}  // namespace

F0Contour render_natural(const Score& score, const NaturalStyle& style,
                         double frame_shift_ms) {
  score.validate();
  Rng rng(style.seed);
  std::vector<double> target;
  std::vector<bool> voicing;
  struct Span {
    std::size_t start, end;
    int pitch;
    bool rest;
  };
  std::vector<Span> spans;
  int held = score.notes.front().midi_pitch;
  for (const auto& n : score.notes) {
    const auto frames = static_cast<std::size_t>(
        std::max(1L, std::lround(n.duration_ms / frame_shift_ms)));
    if (!n.rest) held = n.midi_pitch;
    spans.push_back({target.size(), target.size() + frames, held, n.rest});
    target.insert(target.end(), frames, static_cast<double>(held));
    voicing.insert(voicing.end(), frames, !n.rest);
  }

  std::vector<double> f0 = smooth2(target, kSmoothingTauMs, frame_shift_ms);

  for (std::size_t i = 1; i < spans.size(); ++i) {
    const double jump = spans[i].pitch - spans[i - 1].pitch;
    if (jump == 0.0 || spans[i].rest) continue;
    const double sign = jump > 0 ? 1.0 : -1.0;
    for (std::size_t t = spans[i].start; t < f0.size(); ++t) {
      const double u =
          static_cast<double>(t - spans[i].start) * frame_shift_ms / kOvershootTauMs;
      if (u > 8.0) break;
      f0[t] += style.overshoot * sign * u * std::exp(1.0 - u);
    }
  }

  for (const auto& span : spans) {
    if (span.rest) continue;
    const double phase =
        style.random_vibrato_phase ? rng.uniform(0.0, 2.0 * std::numbers::pi) : 0.0;
    for (std::size_t t = span.start; t < span.end; ++t) {
      const double ms = static_cast<double>(t - span.start) * frame_shift_ms;
      const double ramp =
          std::clamp((ms - kVibratoDelayMs) / kVibratoRampMs, 0.0, 1.0);
      f0[t] += style.vibrato_depth * ramp *
               std::sin(2.0 * std::numbers::pi * style.vibrato_rate_hz * ms /
                            1000.0 +
                        phase);
    }
  }

  if (style.drift_std > 0.0) {
    std::vector<double> noise(f0.size());
    for (auto& v : noise) v = rng.normal();
    noise = smooth2(noise, kDriftTauMs, frame_shift_ms);
    double mean = 0.0, var = 0.0;
    for (const double v : noise) mean += v;
    mean /= static_cast<double>(noise.size());
    for (const double v : noise) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(noise.size()));
    if (sd > 0.0)
      for (std::size_t t = 0; t < f0.size(); ++t)
        f0[t] += style.drift_std * (noise[t] - mean) / sd;
  }
  return F0Contour(std::move(f0), std::move(voicing), frame_shift_ms);
}

F0Contour render_generated(const Score& score, double frame_shift_ms) {
  return render_natural(score, NaturalStyle::mean(), frame_shift_ms);
}

std::vector<SongContours> build_corpus(const CorpusOptions& opt) {
  if (opt.n_songs < 1) throw InvalidArgument("n_songs must be >= 1");
  if (opt.takes_per_song < 1) throw InvalidArgument("takes must be >= 1");
  std::vector<SongContours> songs;
  for (int s = 0; s < opt.n_songs; ++s) {
    const std::uint64_t song_seed =
        derive_seed(opt.seed, static_cast<std::uint64_t>(s));
    const Score score = gen_score(song_seed, opt.notes_per_song);
    char id[32];
    std::snprintf(id, sizeof id, "song_%03d", s);
    SongContours song{id, render_generated(score), {}};
    for (int k = 0; k < opt.takes_per_song; ++k)
      song.natural.push_back(render_natural(
          score, NaturalStyle::sample(derive_seed(
                     song_seed, 1000 + static_cast<std::uint64_t>(k)))));
    songs.push_back(std::move(song));
  }
  return songs;
}

namespace {

struct SongSpectra {
  std::vector<ModulationSpectrum> generated;             // per offset
  std::vector<std::vector<ModulationSpectrum>> natural;  // per take, offset
};

std::vector<SongSpectra> analyse(const std::vector<SongContours>& songs,
                                 const StftConfig& stft) {
  std::vector<SongSpectra> out;
  for (const auto& song : songs) {
    SongSpectra sp;
    sp.generated = augment_offsets(remove_mean(song.generated), stft);
    for (const auto& take : song.natural) {
      if (take.size() != song.generated.size())
        throw InvalidArgument(song.id + ": natural take length differs from "
                                        "the generated contour");
      sp.natural.push_back(augment_offsets(remove_mean(take), stft));
    }
    out.push_back(std::move(sp));
  }
  return out;
}

TrainingPairs assemble(const std::vector<SongSpectra>& spectra,
                       const MsNormalizer& norm) {
  std::size_t rows = 0;
  for (const auto& sp : spectra)
    for (const auto& take : sp.natural)
      for (const auto& ms : take) rows += ms.segments();
  const auto dims = static_cast<Eigen::Index>(norm.size());
  TrainingPairs pairs{Eigen::MatrixXd(static_cast<Eigen::Index>(rows), dims),
                      Eigen::MatrixXd(static_cast<Eigen::Index>(rows), dims)};
  Eigen::Index r = 0;
  for (const auto& sp : spectra) {
    for (const auto& take : sp.natural) {
      for (std::size_t o = 0; o < take.size(); ++o) {
        const auto& gen = sp.generated[o];
        const auto& nat = take[o];
        for (std::size_t k = 0; k < nat.segments(); ++k, ++r) {
          for (std::size_t s = 0; s < norm.size(); ++s) {
            const auto b = norm.bins()[s];
            pairs.conditions(r, static_cast<Eigen::Index>(s)) =
                norm.apply(s, gen.log_power(k, b));
            pairs.targets(r, static_cast<Eigen::Index>(s)) =
                norm.apply(s, nat.log_power(k, b));
          }
        }
      }
    }
  }
  return pairs;
}

}  // namespace

CorpusPairs build_pairs(const std::vector<SongContours>& songs,
                        const StftConfig& stft,
                        const std::vector<std::size_t>& bins) {
  if (songs.empty()) throw InvalidArgument("corpus has no songs");
  if (bins.empty()) throw InvalidArgument("at least one bin must be selected");
  for (const auto& song : songs)
    if (song.generated.size() < static_cast<std::size_t>(stft.window_frames))
      throw InvalidArgument(song.id + ": contour shorter than one window");
  const auto spectra = analyse(songs, stft);
  std::vector<ModulationSpectrum> natural;
  std::size_t takes = 0;
  for (const auto& sp : spectra) {
    takes = std::max(takes, sp.natural.size());
    for (const auto& take : sp.natural)
      natural.insert(natural.end(), take.begin(), take.end());
  }
  CorpusPairs out;
  out.normalizer = fit_normalizer(natural, bins);
  out.pairs = assemble(spectra, out.normalizer);
  out.songs = songs.size();
  out.takes = takes;
  return out;
}

TrainingPairs build_pairs(const std::vector<SongContours>& songs,
                          const StftConfig& stft,
                          const MsNormalizer& normalizer) {
  return assemble(analyse(songs, stft), normalizer);
}

void write_corpus(const std::string& dir,
                  const std::vector<SongContours>& songs) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  std::ofstream manifest(fs::path(dir) / kManifestName);
  if (!manifest) throw IoError("cannot write manifest in " + dir);
  manifest << "#CORPUS v1\n";
  for (const auto& song : songs) {
    const std::string gen = song.id + "_generated.f0";
    save_f0((fs::path(dir) / gen).string(), song.generated);
    manifest << "song " << song.id << " generated " << gen << " natural";
    for (std::size_t k = 0; k < song.natural.size(); ++k) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_take_%02zu.f0", song.id.c_str(), k);
      save_f0((fs::path(dir) / name).string(), song.natural[k]);
      manifest << ' ' << name;
    }
    manifest << '\n';
  }
  if (!manifest) throw IoError("manifest write failed in " + dir);
}

std::vector<SongContours> read_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto path = fs::path(dir) / kManifestName;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "#CORPUS v1")
    throw FormatError(path.string() + ": missing #CORPUS v1 header");
  std::vector<SongContours> songs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string kw, id, gen_kw, gen_path, nat_kw;
    if (!(fields >> kw >> id >> gen_kw >> gen_path >> nat_kw) || kw != "song" ||
        gen_kw != "generated" || nat_kw != "natural")
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'song <id> generated <path> natural ...'");
    SongContours song{id, load_f0((fs::path(dir) / gen_path).string()), {}};
    std::string take;
    while (fields >> take)
      song.natural.push_back(load_f0((fs::path(dir) / take).string()));
    if (song.natural.empty())
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": song lists no natural takes");
    songs.push_back(std::move(song));
  }
  if (songs.empty()) throw FormatError(path.string() + ": no songs");
  return songs;
}

}  // namespace ndtpf
