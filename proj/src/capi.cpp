// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ndtpf/ndtpf.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "ndtpf/datagen.hpp"
#include "ndtpf/doubletrack.hpp"
#include "ndtpf/error.hpp"
#include "ndtpf/evaluate.hpp"
#include "ndtpf/f0core.hpp"
#include "ndtpf/gmmn.hpp"
#include "ndtpf/modspec.hpp"
#include "ndtpf/postfilter.hpp"

struct ndtpf_contour {
  ndtpf::F0Contour value;
};

struct ndtpf_model {
  ndtpf::SavedModel saved;
};

struct ndtpf_waveform {
  ndtpf::Waveform value;
};

namespace {

thread_local std::string g_last_error;

ndtpf_status fail(ndtpf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

ndtpf_status from_code(ndtpf::ErrorCode code) {
  switch (code) {
    case ndtpf::ErrorCode::kInvalidArgument:
      return NDTPF_E_INVALID_ARGUMENT;
    case ndtpf::ErrorCode::kFormat:
      return NDTPF_E_FORMAT;
    case ndtpf::ErrorCode::kIo:
      return NDTPF_E_IO;
    case ndtpf::ErrorCode::kNumeric:
      return NDTPF_E_NUMERIC;
    case ndtpf::ErrorCode::kDomain:
      return NDTPF_E_DOMAIN;
  }
  return NDTPF_E_INTERNAL;
}

template <typename F>
ndtpf_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return NDTPF_OK;
  } catch (const ndtpf::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(NDTPF_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NDTPF_E_INTERNAL, e.what());
  } catch (...) {
    return fail(NDTPF_E_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ndtpf::InvalidArgument(what);
}

ndtpf::MixConfig to_mix(const ndtpf_mix_options* mix) {
  ndtpf::MixConfig cfg;
  if (mix) {
    cfg.delay_ms = mix->delay_ms;
    cfg.gain_db = mix->gain_db;
    cfg.sample_rate_hz = mix->sample_rate_hz;
  }
  cfg.validate();
  return cfg;
}

ndtpf::SynthConfig to_synth(const ndtpf_synth_options* synth) {
  ndtpf::SynthConfig cfg;
  if (synth) {
    require(synth->harmonics >= 1, "harmonics must be >= 1");
    require(synth->rolloff > 0.0, "rolloff must be positive");
    require(synth->peak > 0.0 && synth->peak <= 1.0,
            "peak must be in (0, 1]");
    cfg.n_harmonics = synth->harmonics;
    cfg.rolloff = synth->rolloff;
    cfg.peak = synth->peak;
  }
  return cfg;
}

ndtpf::PostfilterConfig postfilter_for(const ndtpf_model* model,
                                       uint64_t seed) {
  if (!model->saved.normalizer)
    throw ndtpf::FormatError("model file carries no normalizer");
  ndtpf::PostfilterConfig cfg;
  cfg.normalizer = *model->saved.normalizer;
  cfg.noise_seed = seed;
  return cfg;
}

std::vector<ndtpf::F0Contour> load_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ndtpf::IoError("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".f0")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw ndtpf::FormatError("no .f0 files in " + dir);
  std::vector<ndtpf::F0Contour> out;
  for (const auto& p : paths) out.push_back(ndtpf::load_f0(p));
  return out;
}

std::vector<ndtpf::F0Contour> load_natural(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(fs::path(dir) / ndtpf::kManifestName)) return load_dir(dir);
  std::vector<ndtpf::F0Contour> out;
  for (auto& song : ndtpf::read_corpus(dir))
    for (auto& take : song.natural) out.push_back(std::move(take));
  return out;
}

}  // namespace

extern "C" {

const char* ndtpf_version(void) { return "0.1.0"; }

const char* ndtpf_last_error(void) { return g_last_error.c_str(); }

const char* ndtpf_status_name(ndtpf_status status) {
  switch (status) {
    case NDTPF_OK:
      return "ok";
    case NDTPF_E_INVALID_ARGUMENT:
      return "invalid argument";
    case NDTPF_E_FORMAT:
      return "format error";
    case NDTPF_E_IO:
      return "i/o error";
    case NDTPF_E_NUMERIC:
      return "numeric error";
    case NDTPF_E_DOMAIN:
      return "domain error";
    case NDTPF_E_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

ndtpf_status ndtpf_contour_create(const double* semitones,
                                  const unsigned char* voiced, size_t length,
                                  double frame_shift_ms, ndtpf_contour** out) {
  return guarded([&] {
    require(out && semitones, "null argument");
    std::vector<double> values(semitones, semitones + length);
    std::vector<bool> voicing(length, true);
    if (voiced)
      for (size_t i = 0; i < length; ++i) voicing[i] = voiced[i] != 0;
    *out = new ndtpf_contour{
        ndtpf::F0Contour(std::move(values), std::move(voicing),
                         frame_shift_ms)};
  });
}

ndtpf_status ndtpf_contour_load(const char* path, ndtpf_contour** out) {
  return guarded([&] {
    require(out && path, "null argument");
    *out = new ndtpf_contour{ndtpf::load_f0(path)};
  });
}

ndtpf_status ndtpf_contour_save(const ndtpf_contour* contour,
                                const char* path) {
  return guarded([&] {
    require(contour && path, "null argument");
    ndtpf::save_f0(path, contour->value);
  });
}

size_t ndtpf_contour_length(const ndtpf_contour* contour) {
  return contour ? contour->value.size() : 0;
}

double ndtpf_contour_frame_shift(const ndtpf_contour* contour) {
  return contour ? contour->value.frame_shift_ms() : 0.0;
}

ndtpf_status ndtpf_contour_values(const ndtpf_contour* contour,
                                  double* semitones, unsigned char* voiced,
                                  size_t capacity) {
  return guarded([&] {
    require(contour && semitones, "null argument");
    const size_t n = std::min(capacity, contour->value.size());
    for (size_t i = 0; i < n; ++i) {
      semitones[i] = contour->value[i];
      if (voiced) voiced[i] = contour->value.voicing()[i] ? 1 : 0;
    }
  });
}

void ndtpf_contour_free(ndtpf_contour* contour) { delete contour; }

ndtpf_status ndtpf_extract_ms(const ndtpf_contour* contour, int offset,
                              int all_offsets, const char* out_path) {
  return guarded([&] {
    require(contour && out_path, "null argument");
    const ndtpf::StftConfig cfg;
    const auto mrc = ndtpf::remove_mean(contour->value);
    std::vector<ndtpf::ModulationSpectrum> records;
    if (all_offsets) {
      records = ndtpf::augment_offsets(mrc, cfg);
    } else {
      require(offset >= 0 && offset < cfg.hop_frames,
              "offset must be in [0, hop)");
      records.push_back(ndtpf::extract_ms(mrc, cfg, offset));
    }
    ndtpf::save_ms(out_path, records);
  });
}

ndtpf_status ndtpf_reconstruction_error(const ndtpf_contour* contour,
                                        double* out) {
  return guarded([&] {
    require(contour && out, "null argument");
    *out = ndtpf::reconstruction_error({&contour->value, 1},
                                       ndtpf::StftConfig{});
  });
}

ndtpf_status ndtpf_datagen(int songs, int takes, int notes, uint64_t seed,
                           const char* out_dir) {
  return guarded([&] {
    require(out_dir != nullptr, "null argument");
    require(songs >= 1 && takes >= 1 && notes >= 1,
            "songs, takes and notes must be >= 1");
    ndtpf::CorpusOptions opt;
    opt.n_songs = songs;
    opt.takes_per_song = takes;
    opt.notes_per_song = notes;
    opt.seed = seed;
    ndtpf::write_corpus(out_dir, ndtpf::build_corpus(opt));
  });
}

void ndtpf_train_options_init(ndtpf_train_options* opts) {
  if (!opts) return;
  const ndtpf::TrainConfig d;
  opts->epochs = d.epochs;
  opts->batch_size = d.batch_size;
  opts->learning_rate = d.learning_rate;
  opts->mode = d.cmmd.mode == ndtpf::CmmdMode::kRff ? NDTPF_CMMD_RFF
                                                    : NDTPF_CMMD_EXACT;
  opts->lambda = d.cmmd.lambda;
  opts->sigma_in = d.cmmd.sigma_in;
  opts->sigma_out = d.cmmd.sigma_out;
  opts->rff_dim = d.cmmd.rff_dim;
  opts->noise_dim = d.shape.noise_dim;
  opts->hidden = d.shape.hidden_units;
  opts->layers = d.shape.hidden_layers;
  opts->seed = d.seed;
}

ndtpf_status ndtpf_train_corpus(const char* corpus_dir,
                                const ndtpf_train_options* opts,
                                ndtpf_epoch_callback on_epoch, void* user,
                                ndtpf_model** out) {
  return guarded([&] {
    require(corpus_dir && opts && out, "null argument");
    require(opts->mode == NDTPF_CMMD_EXACT || opts->mode == NDTPF_CMMD_RFF,
            "unknown CMMD mode");
    const auto songs = ndtpf::read_corpus(corpus_dir);
    const ndtpf::StftConfig stft;
    auto corpus = ndtpf::build_pairs(songs, stft, {1});

    ndtpf::TrainConfig cfg;
    cfg.epochs = opts->epochs;
    cfg.batch_size = opts->batch_size;
    cfg.learning_rate = opts->learning_rate;
    cfg.seed = opts->seed;
    cfg.cmmd.mode = opts->mode == NDTPF_CMMD_RFF ? ndtpf::CmmdMode::kRff
                                                 : ndtpf::CmmdMode::kExact;
    cfg.cmmd.lambda = opts->lambda;
    cfg.cmmd.sigma_in = opts->sigma_in;
    cfg.cmmd.sigma_out = opts->sigma_out;
    cfg.cmmd.rff_dim = opts->rff_dim;
    cfg.shape.cond_dim = static_cast<int>(corpus.normalizer.size());
    cfg.shape.noise_dim = opts->noise_dim;
    cfg.shape.hidden_units = opts->hidden;
    cfg.shape.hidden_layers = opts->layers;

    ndtpf::EpochCallback cb;
    if (on_epoch)
      cb = [on_epoch, user](int epoch, double loss) {
        on_epoch(epoch, loss, user);
      };
    auto result = ndtpf::train(corpus.pairs, cfg, cb);
    *out = new ndtpf_model{
        ndtpf::SavedModel{std::move(result.model), corpus.normalizer}};
  });
}

ndtpf_status ndtpf_model_load(const char* path, ndtpf_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new ndtpf_model{ndtpf::load_model(path)};
  });
}

ndtpf_status ndtpf_model_save(const ndtpf_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "null argument");
    ndtpf::save_model(path, model->saved.model,
                      model->saved.normalizer ? &*model->saved.normalizer
                                              : nullptr);
  });
}

int ndtpf_model_noise_dim(const ndtpf_model* model) {
  return model ? model->saved.model.shape().noise_dim : 0;
}

void ndtpf_model_free(ndtpf_model* model) { delete model; }

ndtpf_status ndtpf_filter(const ndtpf_model* model,
                          const ndtpf_contour* contour, uint64_t seed,
                          ndtpf_contour** out) {
  return guarded([&] {
    require(model && contour && out, "null argument");
    *out = new ndtpf_contour{ndtpf::filter_contour(
        model->saved.model, contour->value, postfilter_for(model, seed))};
  });
}

ndtpf_status ndtpf_sample_variations(const ndtpf_model* model,
                                     const ndtpf_contour* contour,
                                     uint64_t seed, int takes,
                                     ndtpf_contour** out) {
  return guarded([&] {
    require(model && contour && out, "null argument");
    require(takes >= 1, "takes must be >= 1");
    auto all = ndtpf::sample_variations(model->saved.model, contour->value,
                                        postfilter_for(model, seed), takes);
    std::vector<std::unique_ptr<ndtpf_contour>> owned;
    for (auto& c : all)
      owned.push_back(std::make_unique<ndtpf_contour>(std::move(c)));
    for (size_t i = 0; i < owned.size(); ++i) out[i] = owned[i].release();
  });
}

ndtpf_status ndtpf_adt_modulate(const ndtpf_contour* contour, double rate_hz,
                                double depth_semitones, double phase_rad,
                                ndtpf_contour** out) {
  return guarded([&] {
    require(contour && out, "null argument");
    ndtpf::AdtConfig cfg{rate_hz, depth_semitones, phase_rad};
    *out = new ndtpf_contour{ndtpf::adt_modulate(contour->value, cfg)};
  });
}

void ndtpf_mix_options_init(ndtpf_mix_options* opts) {
  if (!opts) return;
  const ndtpf::MixConfig d;
  opts->delay_ms = d.delay_ms;
  opts->gain_db = d.gain_db;
  opts->sample_rate_hz = d.sample_rate_hz;
}

void ndtpf_synth_options_init(ndtpf_synth_options* opts) {
  if (!opts) return;
  const ndtpf::SynthConfig d;
  opts->harmonics = d.n_harmonics;
  opts->rolloff = d.rolloff;
  opts->peak = d.peak;
}

ndtpf_status ndtpf_synthesize(const ndtpf_contour* contour,
                              const ndtpf_synth_options* synth,
                              double sample_rate_hz, ndtpf_waveform** out) {
  return guarded([&] {
    require(contour && out, "null argument");
    require(sample_rate_hz > 0.0, "sample rate must be positive");
    *out = new ndtpf_waveform{ndtpf::synthesize_harmonic(
        contour->value, to_synth(synth), sample_rate_hz)};
  });
}

ndtpf_status ndtpf_render_adt(const ndtpf_contour* contour, double rate_hz,
                              double depth_semitones,
                              const ndtpf_mix_options* mix,
                              const ndtpf_synth_options* synth,
                              ndtpf_waveform** out) {
  return guarded([&] {
    require(contour && out, "null argument");
    ndtpf::AdtConfig adt{rate_hz, depth_semitones, 0.0};
    *out = new ndtpf_waveform{ndtpf::render_adt(contour->value, adt,
                                                to_mix(mix), to_synth(synth))};
  });
}

ndtpf_status ndtpf_render_ndt(const ndtpf_model* model,
                              const ndtpf_contour* contour, uint64_t seed,
                              const ndtpf_mix_options* mix,
                              const ndtpf_synth_options* synth,
                              ndtpf_waveform** out) {
  return guarded([&] {
    require(model && contour && out, "null argument");
    *out = new ndtpf_waveform{ndtpf::render_ndt(
        model->saved.model, contour->value, postfilter_for(model, seed),
        to_mix(mix), to_synth(synth))};
  });
}

ndtpf_status ndtpf_mix(const ndtpf_waveform* primary,
                       const ndtpf_waveform* secondary,
                       const ndtpf_mix_options* mix, ndtpf_waveform** out) {
  return guarded([&] {
    require(primary && secondary && out, "null argument");
    *out = new ndtpf_waveform{
        ndtpf::mix_tracks(primary->value, secondary->value, to_mix(mix))};
  });
}

ndtpf_status ndtpf_waveform_load(const char* path, ndtpf_waveform** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new ndtpf_waveform{ndtpf::read_wav(path)};
  });
}

ndtpf_status ndtpf_waveform_save(const ndtpf_waveform* wave, const char* path,
                                 size_t* clipped) {
  return guarded([&] {
    require(wave && path, "null argument");
    const size_t n = ndtpf::write_wav(path, wave->value);
    if (clipped) *clipped = n;
  });
}

size_t ndtpf_waveform_length(const ndtpf_waveform* wave) {
  return wave ? wave->value.samples.size() : 0;
}

double ndtpf_waveform_sample_rate(const ndtpf_waveform* wave) {
  return wave ? wave->value.sample_rate_hz : 0.0;
}

ndtpf_status ndtpf_waveform_samples(const ndtpf_waveform* wave, double* out,
                                    size_t capacity) {
  return guarded([&] {
    require(wave && out, "null argument");
    const size_t n = std::min(capacity, wave->value.samples.size());
    std::copy_n(wave->value.samples.begin(), n, out);
  });
}

void ndtpf_waveform_free(ndtpf_waveform* wave) { delete wave; }

ndtpf_status ndtpf_eval_mmd(const double* a, size_t rows_a, const double* b,
                            size_t rows_b, size_t dim, double sigma,
                            double* out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    require(dim >= 1, "dim must be >= 1");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>;
    const auto ra = static_cast<Eigen::Index>(rows_a);
    const auto rb = static_cast<Eigen::Index>(rows_b);
    const auto d = static_cast<Eigen::Index>(dim);
    ndtpf::SampleSet sa = Eigen::Map<const RowMajor>(a, ra, d);
    ndtpf::SampleSet sb = Eigen::Map<const RowMajor>(b, rb, d);
    *out = ndtpf::eval_mmd(sa, sb, sigma);
  });
}

ndtpf_status ndtpf_eval_variation(const ndtpf_contour* const* takes,
                                  size_t count, ndtpf_variation* out) {
  return guarded([&] {
    require(takes && out, "null argument");
    std::vector<ndtpf::F0Contour> all;
    for (size_t i = 0; i < count; ++i) {
      require(takes[i] != nullptr, "null take");
      all.push_back(takes[i]->value);
    }
    const auto st = ndtpf::eval_variation(all);
    out->mean_std = st.mean_std;
    out->max_std = st.max_std;
    out->max_deviation_from_first = st.max_deviation_from_first;
  });
}

ndtpf_status ndtpf_eval_dirs(const char* natural_dir, const char* takes_dir,
                             const ndtpf_model* model, double sigma,
                             const char* report_path) {
  return guarded([&] {
    require(natural_dir && takes_dir && report_path, "null argument");
    require(sigma > 0.0, "sigma must be positive");
    const auto natural = load_natural(natural_dir);
    const auto takes = load_dir(takes_dir);
    const ndtpf::StftConfig stft;
    auto a = ndtpf::ms_samples(natural, stft, {1});
    auto b = ndtpf::ms_samples(takes, stft, {1});
    if (model) {
      if (!model->saved.normalizer)
        throw ndtpf::FormatError("model file carries no normalizer");
      const auto& norm = *model->saved.normalizer;
      if (norm.size() != 1 || norm.bins()[0] != 1)
        throw ndtpf::InvalidArgument("model normalizer does not cover bin 1");
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, 0) = norm.apply(0, a(i, 0));
      for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, 0) = norm.apply(0, b(i, 0));
    }
    ndtpf::EvalReport report;
    report.natural_count = natural.size();
    report.take_count = takes.size();
    report.mmd_squared = ndtpf::eval_mmd(a, b, sigma);
    if (takes.size() >= 2) {
      const auto st = ndtpf::eval_variation(takes);
      report.mean_std = st.mean_std;
      report.max_std = st.max_std;
      report.max_deviation = st.max_deviation_from_first;
    }
    report.reconstruction_error = ndtpf::reconstruction_error(takes, stft);
    std::ofstream out(report_path);
    if (!out) throw ndtpf::IoError(std::string("cannot write ") + report_path);
    report.write(out);
    if (!out) throw ndtpf::IoError(std::string("write failed: ") + report_path);
  });
}

}  // extern "C"
