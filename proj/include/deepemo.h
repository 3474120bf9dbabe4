/* C interface to the deepemo shared library.
 *
 * Conventions:
 *   - Every fallible call returns de_status; DE_OK (0) means success.
 *   - On failure, de_last_error() returns a thread-local message describing
 *     what went wrong; it stays valid until the next failing call on the
 *     same thread.
 *   - Objects are opaque handles created and destroyed by this API. Pointers
 *     returned by accessor functions stay valid until their owning handle is
 *     destroyed or mutated.
 *   - Strings returned as char* (report text/JSON) are heap-allocated and
 *     must be released with de_string_free().
 */
#ifndef DEEPEMO_H
#define DEEPEMO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DEEPEMO_BUILD)
#define DEEPEMO_API __declspec(dllexport)
#else
#define DEEPEMO_API __declspec(dllimport)
#endif
#else
#define DEEPEMO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum de_status {
  DE_OK = 0,
  DE_USAGE,
  DE_IO,
  DE_MALFORMED_HEADER,
  DE_UNSUPPORTED_FORMAT,
  DE_TRUNCATED_FILE,
  DE_EMPTY_CLIP,
  DE_NON_POWER_OF_TWO_LENGTH,
  DE_SIGNAL_SHORTER_THAN_FRAME,
  DE_NEGATIVE_FREQUENCY,
  DE_INVALID_BAND_RANGE,
  DE_MALFORMED_FILENAME,
  DE_UNKNOWN_EMOTION_CODE,
  DE_MISSING_DIRECTORY,
  DE_EMPTY_DATASET,
  DE_EMPTY_INPUT,
  DE_SHAPE_MISMATCH,
  DE_TARGET_OUT_OF_RANGE,
  DE_NO_FINAL_LINEAR,
  DE_BAD_MAGIC,
  DE_VERSION_MISMATCH,
  DE_MISSING_PARAMETER,
  DE_CHECKSUM_MISMATCH,
  DE_EMPTY_TRAIN_SET,
  DE_NON_FINITE_LOSS,
  DE_EMPTY_EVAL_SET,
  DE_INTERNAL
} de_status;

typedef struct de_clip de_clip;     /* mono audio buffer + sample rate */
typedef struct de_spec de_spec;     /* log-mel spectrogram */
typedef struct de_model de_model;   /* residual classifier */
typedef struct de_report de_report; /* top-k prediction report */
typedef struct de_config de_config; /* layered key=value run settings */

/* ---- library + error reporting ---------------------------------------- */

DEEPEMO_API const char* de_version(void);
DEEPEMO_API const char* de_status_name(de_status status);
/* Process exit code for a status: 0 ok, 1 usage, 2 data, 3 numerical. */
DEEPEMO_API int de_status_exit_code(de_status status);
DEEPEMO_API const char* de_last_error(void);

/* ---- audio clips ------------------------------------------------------- */

DEEPEMO_API de_status de_clip_load_wav(const char* path, de_clip** out);
DEEPEMO_API de_status de_clip_from_samples(const float* samples, size_t count, int sample_rate,
                                           de_clip** out);
DEEPEMO_API void de_clip_destroy(de_clip* clip);
DEEPEMO_API size_t de_clip_length(const de_clip* clip);
DEEPEMO_API int de_clip_sample_rate(const de_clip* clip);
DEEPEMO_API const float* de_clip_samples(const de_clip* clip);
DEEPEMO_API de_status de_clip_resample(const de_clip* clip, int target_rate, de_clip** out);
DEEPEMO_API de_status de_clip_normalize_peak(const de_clip* clip, de_clip** out);
DEEPEMO_API de_status de_clip_save_wav16(const de_clip* clip, const char* path);

/* ---- spectrograms ------------------------------------------------------ */

typedef struct de_spec_params {
  int32_t n_fft;   /* power of two */
  int32_t hop;     /* 0 < hop <= n_fft */
  int32_t n_mels;  /* >= 2 */
  double fmin;     /* Hz */
  double fmax;     /* Hz, <= sample_rate / 2 */
  double floor_db; /* lower clamp on log-power cells */
} de_spec_params;

DEEPEMO_API void de_spec_params_default(de_spec_params* out);

DEEPEMO_API de_status de_spec_compute(const de_clip* clip, const de_spec_params* params,
                                      de_spec** out);
DEEPEMO_API void de_spec_destroy(de_spec* spec);
DEEPEMO_API int de_spec_n_mels(const de_spec* spec);
DEEPEMO_API int de_spec_n_frames(const de_spec* spec);
DEEPEMO_API int de_spec_sample_rate(const de_spec* spec);
/* Row-major [n_mels][n_frames] cell grid, valid until the spec is destroyed. */
DEEPEMO_API const float* de_spec_data(const de_spec* spec);
DEEPEMO_API de_status de_spec_save(const de_spec* spec, const char* path);
DEEPEMO_API de_status de_spec_load(const char* path, de_spec** out);
DEEPEMO_API de_status de_spec_render_pgm(const de_spec* spec, const char* path);

/* ---- emotion labels ---------------------------------------------------- */

DEEPEMO_API int de_emotion_count(void);
/* Name for a 1-based emotion code; NULL if out of range. */
DEEPEMO_API const char* de_emotion_name(int code);
DEEPEMO_API de_status de_parse_ravdess_filename(const char* filename, int* emotion_code,
                                                int* actor_id);

/* ---- models ------------------------------------------------------------ */

DEEPEMO_API de_status de_model_create(const char* arch, int num_classes, uint64_t seed,
                                      de_model** out);
DEEPEMO_API de_status de_model_load(const char* path, de_model** out);
/* Copies backbone tensors from the checkpoint, leaving the head untouched. */
DEEPEMO_API de_status de_model_load_backbone(de_model* model, const char* path);
DEEPEMO_API de_status de_model_replace_head(de_model* model, int num_classes, uint64_t seed);
DEEPEMO_API de_status de_model_save(const de_model* model, const char* path, int epoch,
                                    uint64_t seed);
DEEPEMO_API void de_model_destroy(de_model* model);
DEEPEMO_API int de_model_num_classes(const de_model* model);
DEEPEMO_API const char* de_model_arch(const de_model* model);
DEEPEMO_API uint64_t de_model_parameter_count(const de_model* model);

/* Full prediction pipeline on one clip. render_path may be NULL to skip the
 * spectrogram image. */
DEEPEMO_API de_status de_model_predict_topk(de_model* model, const de_clip* clip, int k,
                                            const de_spec_params* params, int sample_rate,
                                            int imagenet_norm, const char* input_id,
                                            const char* render_path, de_report** out);

/* ---- prediction reports ------------------------------------------------ */

DEEPEMO_API void de_report_destroy(de_report* report);
DEEPEMO_API int de_report_size(const de_report* report);
DEEPEMO_API const char* de_report_label(const de_report* report, int rank);
DEEPEMO_API de_status de_report_probability(const de_report* report, int rank, double* out);
/* NULL when no spectrogram image was rendered. */
DEEPEMO_API const char* de_report_spectrogram_path(const de_report* report);
/* "rank,label,probability" lines; free with de_string_free. */
DEEPEMO_API char* de_report_text(const de_report* report);
DEEPEMO_API char* de_report_json(const de_report* report);
DEEPEMO_API void de_string_free(char* text);

/* ---- run configuration + commands -------------------------------------- */

/* A fresh config holds the built-in defaults. */
DEEPEMO_API de_status de_config_create(de_config** out);
DEEPEMO_API void de_config_destroy(de_config* config);
/* Applies DEEPEMO_CACHE_DIR (if set) as the cache_dir default. */
DEEPEMO_API de_status de_config_apply_env(de_config* config);
DEEPEMO_API de_status de_config_load_file(de_config* config, const char* path);
DEEPEMO_API de_status de_config_set(de_config* config, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated, truncating if needed). */
DEEPEMO_API de_status de_config_get(const de_config* config, const char* key, char* buf,
                                    size_t buf_len);

/* Subcommand bodies; progress and results go to stdout. */
DEEPEMO_API de_status de_cmd_features(const de_config* config);
DEEPEMO_API de_status de_cmd_train(const de_config* config);
DEEPEMO_API de_status de_cmd_eval(const de_config* config, const char* split);
DEEPEMO_API de_status de_cmd_predict(const de_config* config, const char* wav_path);
DEEPEMO_API de_status de_cmd_render(const de_config* config, const char* wav_path,
                                    const char* out_image);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DEEPEMO_H */
