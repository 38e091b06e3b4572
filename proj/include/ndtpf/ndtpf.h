/* Copyright 2026 The ndtpf Authors
 * License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
 *
 * C interface of libndtpf. Every call returns an ndtpf_status; on failure
 * ndtpf_last_error() holds a message for the calling thread. Objects are
 * opaque and released with the matching *_free function (NULL is allowed).
 */
#ifndef NDTPF_NDTPF_H_
#define NDTPF_NDTPF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(NDTPF_BUILDING_LIBRARY)
#define NDTPF_API __declspec(dllexport)
#else
#define NDTPF_API __declspec(dllimport)
#endif
#else
#define NDTPF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ndtpf_status {
  NDTPF_OK = 0,
  NDTPF_E_INVALID_ARGUMENT = 1,
  NDTPF_E_FORMAT = 2,
  NDTPF_E_IO = 3,
  NDTPF_E_NUMERIC = 4,
  NDTPF_E_DOMAIN = 5,
  NDTPF_E_INTERNAL = 6
} ndtpf_status;

typedef struct ndtpf_contour ndtpf_contour;
typedef struct ndtpf_model ndtpf_model;
typedef struct ndtpf_waveform ndtpf_waveform;

NDTPF_API const char* ndtpf_version(void);
NDTPF_API const char* ndtpf_last_error(void);
NDTPF_API const char* ndtpf_status_name(ndtpf_status status);

/* Contours: continuous semitone values plus voicing flags. */
NDTPF_API ndtpf_status ndtpf_contour_create(const double* semitones,
                                            const unsigned char* voiced,
                                            size_t length,
                                            double frame_shift_ms,
                                            ndtpf_contour** out);
NDTPF_API ndtpf_status ndtpf_contour_load(const char* path,
                                          ndtpf_contour** out);
NDTPF_API ndtpf_status ndtpf_contour_save(const ndtpf_contour* contour,
                                          const char* path);
NDTPF_API size_t ndtpf_contour_length(const ndtpf_contour* contour);
NDTPF_API double ndtpf_contour_frame_shift(const ndtpf_contour* contour);
/* Copies min(length, capacity) entries. voiced may be NULL. */
NDTPF_API ndtpf_status ndtpf_contour_values(const ndtpf_contour* contour,
                                            double* semitones,
                                            unsigned char* voiced,
                                            size_t capacity);
NDTPF_API void ndtpf_contour_free(ndtpf_contour* contour);

/* Writes the modulation spectrum of a contour as MS text records. With
 * all_offsets != 0 every analysis offset 0..hop-1 is written. */
NDTPF_API ndtpf_status ndtpf_extract_ms(const ndtpf_contour* contour,
                                        int offset, int all_offsets,
                                        const char* out_path);
/* Largest |resynthesis - input| over the contour, in semitones. */
NDTPF_API ndtpf_status ndtpf_reconstruction_error(
    const ndtpf_contour* contour, double* out);

/* Synthetic corpus directory with a corpus.txt manifest. */
NDTPF_API ndtpf_status ndtpf_datagen(int songs, int takes, int notes,
                                     uint64_t seed, const char* out_dir);

typedef enum ndtpf_cmmd_mode {
  NDTPF_CMMD_EXACT = 0,
  NDTPF_CMMD_RFF = 1
} ndtpf_cmmd_mode;

typedef struct ndtpf_train_options {
  int epochs;
  int batch_size;
  double learning_rate;
  ndtpf_cmmd_mode mode;
  double lambda;
  double sigma_in;
  double sigma_out;
  int rff_dim;
  int noise_dim;
  int hidden;
  int layers;
  uint64_t seed;
} ndtpf_train_options;

typedef void (*ndtpf_epoch_callback)(int epoch, double loss, void* user);

NDTPF_API void ndtpf_train_options_init(ndtpf_train_options* opts);
NDTPF_API ndtpf_status ndtpf_train_corpus(const char* corpus_dir,
                                          const ndtpf_train_options* opts,
                                          ndtpf_epoch_callback on_epoch,
                                          void* user, ndtpf_model** out);
NDTPF_API ndtpf_status ndtpf_model_load(const char* path, ndtpf_model** out);
NDTPF_API ndtpf_status ndtpf_model_save(const ndtpf_model* model,
                                        const char* path);
NDTPF_API int ndtpf_model_noise_dim(const ndtpf_model* model);
NDTPF_API void ndtpf_model_free(ndtpf_model* model);

/* Post-filter. Take i of ndtpf_sample_variations uses the same noise as a
 * single ndtpf_filter call seeded with the derived seed of take i. */
NDTPF_API ndtpf_status ndtpf_filter(const ndtpf_model* model,
                                    const ndtpf_contour* contour,
                                    uint64_t seed, ndtpf_contour** out);
NDTPF_API ndtpf_status ndtpf_sample_variations(const ndtpf_model* model,
                                               const ndtpf_contour* contour,
                                               uint64_t seed, int takes,
                                               ndtpf_contour** out);
NDTPF_API ndtpf_status ndtpf_adt_modulate(const ndtpf_contour* contour,
                                          double rate_hz,
                                          double depth_semitones,
                                          double phase_rad,
                                          ndtpf_contour** out);

/* Audio. */
typedef struct ndtpf_mix_options {
  double delay_ms;
  double gain_db;
  double sample_rate_hz;
} ndtpf_mix_options;

/* Harmonic test synthesizer; each track is peak-normalized to peak. */
typedef struct ndtpf_synth_options {
  int harmonics;
  double rolloff;
  double peak;
} ndtpf_synth_options;

NDTPF_API void ndtpf_mix_options_init(ndtpf_mix_options* opts);
NDTPF_API void ndtpf_synth_options_init(ndtpf_synth_options* opts);
/* NULL option pointers select the defaults. */
NDTPF_API ndtpf_status ndtpf_synthesize(const ndtpf_contour* contour,
                                        const ndtpf_synth_options* synth,
                                        double sample_rate_hz,
                                        ndtpf_waveform** out);
NDTPF_API ndtpf_status ndtpf_render_adt(const ndtpf_contour* contour,
                                        double rate_hz,
                                        double depth_semitones,
                                        const ndtpf_mix_options* mix,
                                        const ndtpf_synth_options* synth,
                                        ndtpf_waveform** out);
NDTPF_API ndtpf_status ndtpf_render_ndt(const ndtpf_model* model,
                                        const ndtpf_contour* contour,
                                        uint64_t seed,
                                        const ndtpf_mix_options* mix,
                                        const ndtpf_synth_options* synth,
                                        ndtpf_waveform** out);
NDTPF_API ndtpf_status ndtpf_mix(const ndtpf_waveform* primary,
                                 const ndtpf_waveform* secondary,
                                 const ndtpf_mix_options* mix,
                                 ndtpf_waveform** out);
NDTPF_API ndtpf_status ndtpf_waveform_load(const char* path,
                                           ndtpf_waveform** out);
/* clipped may be NULL; receives the number of samples clipped to 16 bit. */
NDTPF_API ndtpf_status ndtpf_waveform_save(const ndtpf_waveform* wave,
                                           const char* path,
                                           size_t* clipped);
NDTPF_API size_t ndtpf_waveform_length(const ndtpf_waveform* wave);
NDTPF_API double ndtpf_waveform_sample_rate(const ndtpf_waveform* wave);
NDTPF_API ndtpf_status ndtpf_waveform_samples(const ndtpf_waveform* wave,
                                              double* out, size_t capacity);
NDTPF_API void ndtpf_waveform_free(ndtpf_waveform* wave);

/* Evaluation. */
NDTPF_API ndtpf_status ndtpf_eval_mmd(const double* a, size_t rows_a,
                                      const double* b, size_t rows_b,
                                      size_t dim, double sigma, double* out);

typedef struct ndtpf_variation {
  double mean_std;
  double max_std;
  double max_deviation_from_first;
} ndtpf_variation;

NDTPF_API ndtpf_status ndtpf_eval_variation(
    const ndtpf_contour* const* takes, size_t count, ndtpf_variation* out);

/* Directory evaluation. natural_dir is a corpus directory (corpus.txt) or a
 * directory of .f0 files; takes_dir holds .f0 files of equal length. The
 * MMD compares bin-1 log-power samples at offset 0 with the given sigma;
 * when model is non-NULL the samples are first mapped through its
 * normalizer. */
NDTPF_API ndtpf_status ndtpf_eval_dirs(const char* natural_dir,
                                       const char* takes_dir,
                                       const ndtpf_model* model, double sigma,
                                       const char* report_path);

#ifdef __cplusplus
}
#endif

#endif /* NDTPF_NDTPF_H_ */
