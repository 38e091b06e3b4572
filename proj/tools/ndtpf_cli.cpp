// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// ndtpf: corpus generation, MS extraction, training, post-filtering,
// double-tracking renders and evaluation. Exit codes: 0 success, 2 usage,
// 3 data/format, 4 numeric failure.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ndtpf/ndtpf.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitInternal = 1;

struct Failure {
  int code;
};

int exit_code(ndtpf_status st) {
  switch (st) {
    case NDTPF_OK:
      return kExitOk;
    case NDTPF_E_INVALID_ARGUMENT:
      return kExitUsage;
    case NDTPF_E_FORMAT:
    case NDTPF_E_IO:
    case NDTPF_E_DOMAIN:
      return kExitData;
    case NDTPF_E_NUMERIC:
      return kExitNumeric;
    case NDTPF_E_INTERNAL:
      return kExitInternal;
  }
  return kExitInternal;
}

void check(ndtpf_status st) {
  if (st == NDTPF_OK) return;
  std::cerr << "ndtpf: " << ndtpf_status_name(st) << ": " << ndtpf_last_error()
            << '\n';
  throw Failure{exit_code(st)};
}

struct ContourDeleter {
  void operator()(ndtpf_contour* c) const { ndtpf_contour_free(c); }
};
struct ModelDeleter {
  void operator()(ndtpf_model* m) const { ndtpf_model_free(m); }
};
struct WaveDeleter {
  void operator()(ndtpf_waveform* w) const { ndtpf_waveform_free(w); }
};
using Contour = std::unique_ptr<ndtpf_contour, ContourDeleter>;
using Model = std::unique_ptr<ndtpf_model, ModelDeleter>;
using Wave = std::unique_ptr<ndtpf_waveform, WaveDeleter>;

Contour load_contour(const std::string& path) {
  ndtpf_contour* c = nullptr;
  check(ndtpf_contour_load(path.c_str(), &c));
  return Contour(c);
}

Model load_model(const std::string& path) {
  ndtpf_model* m = nullptr;
  check(ndtpf_model_load(path.c_str(), &m));
  return Model(m);
}

Wave load_wave(const std::string& path) {
  ndtpf_waveform* w = nullptr;
  check(ndtpf_waveform_load(path.c_str(), &w));
  return Wave(w);
}

void save_wave(const ndtpf_waveform* w, const std::string& path) {
  size_t clipped = 0;
  check(ndtpf_waveform_save(w, path.c_str(), &clipped));
  if (clipped > 0)
    std::cerr << "ndtpf: warning: " << clipped << " samples clipped in "
              << path << " (lower --peak to avoid)\n";
}

void add_mix_flags(CLI::App* cmd, ndtpf_mix_options& mix) {
  cmd->add_option("--delay-ms", mix.delay_ms, "Secondary track delay in ms")
      ->capture_default_str();
  cmd->add_option("--gain-db", mix.gain_db,
                  "Secondary track gain in dB (-inf mutes)")
      ->capture_default_str();
  cmd->add_option("--sample-rate", mix.sample_rate_hz, "Output sample rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_synth_flags(CLI::App* cmd, ndtpf_synth_options& synth) {
  cmd->add_option("--harmonics", synth.harmonics, "Harmonics per track")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--rolloff", synth.rolloff, "Per-harmonic amplitude ratio")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--peak", synth.peak, "Per-track peak level")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
}

void epoch_printer(int epoch, double loss, void*) {
  std::printf("epoch %d loss %.9g\n", epoch, loss);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural double-tracking post-filter for F0 contours"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ndtpf_version());

  // datagen
  int dg_songs = 8, dg_takes = 4, dg_notes = 12;
  std::uint64_t dg_seed = 0;
  std::string dg_out;
  auto* datagen = app.add_subcommand("datagen", "Write a synthetic corpus");
  datagen->add_option("--songs", dg_songs, "Number of songs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  datagen->add_option("--takes", dg_takes, "Natural takes per song")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  datagen->add_option("--notes", dg_notes, "Notes per song")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  datagen->add_option("--seed", dg_seed, "Corpus seed")->required();
  datagen->add_option("--out", dg_out, "Output directory")->required();

  // extract
  std::string ex_f0, ex_out;
  int ex_offset = 0;
  auto* extract =
      app.add_subcommand("extract", "Write the modulation spectrum of a contour");
  extract->add_option("--f0", ex_f0, "Input F0 file")->required();
  extract->add_option("--out", ex_out, "Output MS file")->required();
  auto* ex_off = extract->add_option("--offset", ex_offset,
                                     "Analysis offset in frames")
                     ->capture_default_str();
  auto* ex_all =
      extract->add_flag("--all-offsets", "Write one record per offset");
  ex_off->excludes(ex_all);

  // train
  ndtpf_train_options topt;
  ndtpf_train_options_init(&topt);
  std::string tr_corpus, tr_out, tr_mode = "exact";
  bool tr_quiet = false;
  auto* train = app.add_subcommand("train", "Train a post-filter model");
  train->add_option("--corpus", tr_corpus, "Corpus directory")->required();
  train->add_option("--epochs", topt.epochs, "Training epochs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--batch", topt.batch_size, "Segments per batch")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--seed", topt.seed, "Training seed")->required();
  train->add_option("--mode", tr_mode, "CMMD estimator")
      ->capture_default_str()
      ->check(CLI::IsMember({"exact", "rff"}));
  train->add_option("--lr", topt.learning_rate, "AdaGrad learning rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--lambda", topt.lambda, "Ridge regularizer")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--sigma-in", topt.sigma_in, "Condition kernel width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--sigma-out", topt.sigma_out, "Output kernel width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--rff-dim", topt.rff_dim, "Random Fourier features")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--noise-dim", topt.noise_dim, "Prior noise dimension")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  train->add_option("--out", tr_out, "Output model file")->required();
  train->add_flag("--quiet", tr_quiet, "Do not print per-epoch losses");

  // filter
  std::string fi_model, fi_f0, fi_out;
  std::uint64_t fi_seed = 0;
  int fi_takes = 1;
  auto* filter = app.add_subcommand("filter", "Sample post-filtered takes");
  filter->add_option("--model", fi_model, "Model file")->required();
  filter->add_option("--f0", fi_f0, "Input F0 file")->required();
  filter->add_option("--seed", fi_seed, "Noise seed")->required();
  filter->add_option("--takes", fi_takes, "Number of takes")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  filter->add_option("--out", fi_out,
                     "Output prefix; take i goes to PREFIX_ii.f0")
      ->required();

  // adt
  std::string adt_f0, adt_out;
  double adt_rate = 0.775, adt_depth = 0.1;
  ndtpf_mix_options adt_mix;
  ndtpf_mix_options_init(&adt_mix);
  ndtpf_synth_options adt_synth;
  ndtpf_synth_options_init(&adt_synth);
  auto* adt = app.add_subcommand("adt", "Render an LFO double-tracked mix");
  adt->add_option("--f0", adt_f0, "Input F0 file")->required();
  adt->add_option("--rate", adt_rate, "LFO rate in Hz")->capture_default_str();
  adt->add_option("--depth", adt_depth, "LFO peak depth in semitones")
      ->capture_default_str();
  adt->add_option("--out", adt_out, "Output WAV")->required();
  add_mix_flags(adt, adt_mix);
  add_synth_flags(adt, adt_synth);

  // ndt
  std::string ndt_model, ndt_f0, ndt_out;
  std::uint64_t ndt_seed = 0;
  ndtpf_mix_options ndt_mix;
  ndtpf_mix_options_init(&ndt_mix);
  ndtpf_synth_options ndt_synth;
  ndtpf_synth_options_init(&ndt_synth);
  auto* ndt = app.add_subcommand("ndt", "Render a post-filter double-tracked mix");
  ndt->add_option("--model", ndt_model, "Model file")->required();
  ndt->add_option("--f0", ndt_f0, "Input F0 file")->required();
  ndt->add_option("--seed", ndt_seed, "Noise seed")->required();
  ndt->add_option("--out", ndt_out, "Output WAV")->required();
  add_mix_flags(ndt, ndt_mix);
  add_synth_flags(ndt, ndt_synth);

  // mix
  std::string mx_a, mx_b, mx_out;
  ndtpf_mix_options mx_mix;
  ndtpf_mix_options_init(&mx_mix);
  auto* mix = app.add_subcommand("mix", "Mix two WAV files");
  mix->add_option("--a", mx_a, "Primary WAV")->required();
  mix->add_option("--b", mx_b, "Secondary WAV")->required();
  mix->add_option("--delay-ms", mx_mix.delay_ms, "Secondary track delay in ms")
      ->capture_default_str();
  mix->add_option("--gain-db", mx_mix.gain_db,
                  "Secondary track gain in dB (-inf mutes)")
      ->capture_default_str();
  mix->add_option("--out", mx_out, "Output WAV")->required();

  // eval
  std::string ev_natural, ev_takes, ev_report, ev_model;
  double ev_sigma = 1.0;
  auto* eval = app.add_subcommand("eval", "Objective evaluation report");
  eval->add_option("--natural", ev_natural,
                   "Corpus directory or directory of natural .f0 files")
      ->required();
  eval->add_option("--takes", ev_takes, "Directory of take .f0 files")
      ->required();
  eval->add_option("--report", ev_report, "Output report file")->required();
  eval->add_option("--model", ev_model,
                   "Model whose normalizer maps MS samples before the MMD");
  eval->add_option("--sigma", ev_sigma, "MMD kernel width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  // plot
  std::vector<std::string> pl_f0;
  std::string pl_out;
  auto* plot = app.add_subcommand("plot", "Write contours as CSV columns");
  plot->add_option("--f0", pl_f0, "Input F0 files")->required();
  plot->add_option("--out", pl_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*datagen) {
      check(ndtpf_datagen(dg_songs, dg_takes, dg_notes, dg_seed,
                          dg_out.c_str()));
    } else if (*extract) {
      auto c = load_contour(ex_f0);
      check(ndtpf_extract_ms(c.get(), ex_offset, ex_all->count() > 0,
                             ex_out.c_str()));
    } else if (*train) {
      topt.mode = tr_mode == "rff" ? NDTPF_CMMD_RFF : NDTPF_CMMD_EXACT;
      ndtpf_model* m = nullptr;
      check(ndtpf_train_corpus(tr_corpus.c_str(), &topt,
                               tr_quiet ? nullptr : epoch_printer, nullptr,
                               &m));
      Model model(m);
      check(ndtpf_model_save(model.get(), tr_out.c_str()));
    } else if (*filter) {
      auto model = load_model(fi_model);
      auto c = load_contour(fi_f0);
      std::vector<ndtpf_contour*> raw(static_cast<size_t>(fi_takes), nullptr);
      check(ndtpf_sample_variations(model.get(), c.get(), fi_seed, fi_takes,
                                    raw.data()));
      std::vector<Contour> takes;
      for (auto* t : raw) takes.emplace_back(t);
      for (size_t i = 0; i < takes.size(); ++i) {
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_%02zu.f0", i);
        check(ndtpf_contour_save(takes[i].get(), (fi_out + suffix).c_str()));
      }
    } else if (*adt) {
      auto c = load_contour(adt_f0);
      ndtpf_waveform* w = nullptr;
      check(ndtpf_render_adt(c.get(), adt_rate, adt_depth, &adt_mix, &adt_synth,
                             &w));
      Wave wave(w);
      save_wave(wave.get(), adt_out);
    } else if (*ndt) {
      auto model = load_model(ndt_model);
      auto c = load_contour(ndt_f0);
      ndtpf_waveform* w = nullptr;
      check(ndtpf_render_ndt(model.get(), c.get(), ndt_seed, &ndt_mix,
                             &ndt_synth, &w));
      Wave wave(w);
      save_wave(wave.get(), ndt_out);
    } else if (*mix) {
      auto a = load_wave(mx_a);
      auto b = load_wave(mx_b);
      mx_mix.sample_rate_hz = ndtpf_waveform_sample_rate(a.get());
      ndtpf_waveform* w = nullptr;
      check(ndtpf_mix(a.get(), b.get(), &mx_mix, &w));
      Wave wave(w);
      save_wave(wave.get(), mx_out);
    } else if (*eval) {
      Model model;
      if (!ev_model.empty()) model = load_model(ev_model);
      check(ndtpf_eval_dirs(ev_natural.c_str(), ev_takes.c_str(), model.get(),
                            ev_sigma, ev_report.c_str()));
    } else if (*plot) {
      std::vector<Contour> contours;
      size_t rows = 0;
      for (const auto& p : pl_f0) {
        contours.push_back(load_contour(p));
        rows = std::max(rows, ndtpf_contour_length(contours.back().get()));
      }
      std::vector<std::vector<double>> cols;
      for (const auto& c : contours) {
        cols.emplace_back(ndtpf_contour_length(c.get()));
        check(ndtpf_contour_values(c.get(), cols.back().data(), nullptr,
                                   cols.back().size()));
      }
      std::ofstream out(pl_out);
      if (!out) {
        std::cerr << "ndtpf: cannot write " << pl_out << '\n';
        return kExitData;
      }
      const double shift = ndtpf_contour_frame_shift(contours.front().get());
      out << "frame,time_ms";
      for (const auto& p : pl_f0)
        out << ',' << std::filesystem::path(p).stem().string();
      out << '\n' << std::setprecision(10);
      for (size_t r = 0; r < rows; ++r) {
        out << r << ',' << static_cast<double>(r) * shift;
        for (const auto& col : cols) {
          out << ',';
          if (r < col.size()) out << col[r];
        }
        out << '\n';
      }
      if (!out) {
        std::cerr << "ndtpf: write failed: " << pl_out << '\n';
        return kExitData;
      }
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitOk;
}
