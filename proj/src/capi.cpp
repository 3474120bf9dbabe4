#include "deepemo.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "json.hpp"

#include "deepemo/audio.hpp"
#include "deepemo/checkpoint.hpp"
#include "deepemo/commands.hpp"
#include "deepemo/dataset.hpp"
#include "deepemo/dsp.hpp"
#include "deepemo/error.hpp"
#include "deepemo/train.hpp"

using deepemo::Error;
using deepemo::ErrorCode;

struct de_clip {
  deepemo::AudioClip clip;
};
struct de_spec {
  deepemo::MelSpectrogram spec;
};
struct de_model {
  deepemo::ResNet<float> model;
};
struct de_report {
  deepemo::TopKReport report;
};
struct de_config {
  deepemo::Config config;
};

namespace {

// One slot per de_status, same order, shifted by DE_OK.
static_assert(static_cast<int>(ErrorCode::Usage) + 1 == DE_USAGE);
static_assert(static_cast<int>(ErrorCode::ShapeMismatch) + 1 == DE_SHAPE_MISMATCH);
static_assert(static_cast<int>(ErrorCode::NonFiniteLoss) + 1 == DE_NON_FINITE_LOSS);
static_assert(static_cast<int>(ErrorCode::Internal) + 1 == DE_INTERNAL);

thread_local std::string g_last_error;

de_status to_status(ErrorCode code) { return static_cast<de_status>(static_cast<int>(code) + 1); }

template <typename F>
de_status guarded(F&& f) {
  try {
    f();
    return DE_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DE_INTERNAL;
  }
}

de_status usage_error(const char* message) {
  g_last_error = message;
  return DE_USAGE;
}

deepemo::SpectrogramConfig to_config(const de_spec_params* params) {
  deepemo::SpectrogramConfig config;
  if (params) {
    config.n_fft = params->n_fft;
    config.hop = params->hop;
    config.n_mels = params->n_mels;
    config.fmin = params->fmin;
    config.fmax = params->fmax;
    config.floor_db = params->floor_db;
  }
  return config;
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out) std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* de_version(void) { return "0.1.0"; }

const char* de_status_name(de_status status) {
  if (status == DE_OK) return "Ok";
  return deepemo::error_code_name(static_cast<ErrorCode>(static_cast<int>(status) - 1));
}

int de_status_exit_code(de_status status) {
  if (status == DE_OK) return 0;
  return deepemo::exit_code_for(static_cast<ErrorCode>(static_cast<int>(status) - 1));
}

const char* de_last_error(void) { return g_last_error.c_str(); }

/* ---- audio clips ------------------------------------------------------- */

de_status de_clip_load_wav(const char* path, de_clip** out) {
  if (!path || !out) return usage_error("de_clip_load_wav: null argument");
  return guarded([&] { *out = new de_clip{deepemo::decode_wav_file(path)}; });
}

de_status de_clip_from_samples(const float* samples, size_t count, int sample_rate,
                               de_clip** out) {
  if (!samples || !out) return usage_error("de_clip_from_samples: null argument");
  return guarded([&] {
    if (count == 0) deepemo::fail(ErrorCode::EmptyClip, "clip needs at least one sample");
    if (sample_rate < 1) deepemo::fail(ErrorCode::Usage, "sample_rate must be positive");
    *out = new de_clip{{std::vector<float>(samples, samples + count), sample_rate}};
  });
}

void de_clip_destroy(de_clip* clip) { delete clip; }

size_t de_clip_length(const de_clip* clip) { return clip ? clip->clip.samples.size() : 0; }

int de_clip_sample_rate(const de_clip* clip) { return clip ? clip->clip.sample_rate : 0; }

const float* de_clip_samples(const de_clip* clip) {
  return clip ? clip->clip.samples.data() : nullptr;
}

de_status de_clip_resample(const de_clip* clip, int target_rate, de_clip** out) {
  if (!clip || !out) return usage_error("de_clip_resample: null argument");
  return guarded([&] { *out = new de_clip{deepemo::resample(clip->clip, target_rate)}; });
}

de_status de_clip_normalize_peak(const de_clip* clip, de_clip** out) {
  if (!clip || !out) return usage_error("de_clip_normalize_peak: null argument");
  return guarded([&] { *out = new de_clip{deepemo::normalize_peak(clip->clip)}; });
}

de_status de_clip_save_wav16(const de_clip* clip, const char* path) {
  if (!clip || !path) return usage_error("de_clip_save_wav16: null argument");
  return guarded([&] { deepemo::write_wav16(clip->clip, path); });
}

/* ---- spectrograms ------------------------------------------------------ */

void de_spec_params_default(de_spec_params* out) {
  if (!out) return;
  const deepemo::SpectrogramConfig config;
  out->n_fft = config.n_fft;
  out->hop = config.hop;
  out->n_mels = config.n_mels;
  out->fmin = config.fmin;
  out->fmax = config.fmax;
  out->floor_db = config.floor_db;
}

de_status de_spec_compute(const de_clip* clip, const de_spec_params* params, de_spec** out) {
  if (!clip || !out) return usage_error("de_spec_compute: null argument");
  return guarded(
      [&] { *out = new de_spec{deepemo::mel_spectrogram(clip->clip, to_config(params))}; });
}

void de_spec_destroy(de_spec* spec) { delete spec; }

int de_spec_n_mels(const de_spec* spec) { return spec ? spec->spec.n_mels : 0; }

int de_spec_n_frames(const de_spec* spec) { return spec ? spec->spec.n_frames : 0; }

int de_spec_sample_rate(const de_spec* spec) { return spec ? spec->spec.sample_rate : 0; }

const float* de_spec_data(const de_spec* spec) { return spec ? spec->spec.data.data() : nullptr; }

de_status de_spec_save(const de_spec* spec, const char* path) {
  if (!spec || !path) return usage_error("de_spec_save: null argument");
  return guarded([&] { deepemo::save_mspc(spec->spec, path); });
}

de_status de_spec_load(const char* path, de_spec** out) {
  if (!path || !out) return usage_error("de_spec_load: null argument");
  return guarded([&] { *out = new de_spec{deepemo::load_mspc(path)}; });
}

de_status de_spec_render_pgm(const de_spec* spec, const char* path) {
  if (!spec || !path) return usage_error("de_spec_render_pgm: null argument");
  return guarded([&] { deepemo::write_pgm(deepemo::render_image(spec->spec), path); });
}

/* ---- emotion labels ---------------------------------------------------- */

int de_emotion_count(void) { return deepemo::kNumEmotions; }

const char* de_emotion_name(int code) {
  if (code < 1 || code > deepemo::kNumEmotions) return nullptr;
  return deepemo::emotion_name(static_cast<deepemo::Emotion>(code));
}

de_status de_parse_ravdess_filename(const char* filename, int* emotion_code, int* actor_id) {
  if (!filename) return usage_error("de_parse_ravdess_filename: null argument");
  return guarded([&] {
    const deepemo::ParsedName parsed = deepemo::parse_ravdess_filename(filename);
    if (emotion_code) *emotion_code = deepemo::emotion_code(parsed.label);
    if (actor_id) *actor_id = parsed.actor_id;
  });
}

/* ---- models ------------------------------------------------------------ */

de_status de_model_create(const char* arch, int num_classes, uint64_t seed, de_model** out) {
  if (!arch || !out) return usage_error("de_model_create: null argument");
  return guarded([&] {
    *out = new de_model{
        deepemo::ResNet<float>(deepemo::ArchSpec::named(arch), num_classes, seed)};
  });
}

de_status de_model_load(const char* path, de_model** out) {
  if (!path || !out) return usage_error("de_model_load: null argument");
  return guarded([&] {
    const deepemo::Checkpoint ckpt = deepemo::load_checkpoint(path);
    if (ckpt.arch.empty()) {
      deepemo::fail(ErrorCode::MalformedHeader,
                    "checkpoint lacks architecture metadata; use de_model_create + "
                    "de_model_load_backbone instead");
    }
    if (ckpt.num_classes < 1) {
      deepemo::fail(ErrorCode::MalformedHeader, "checkpoint lacks a class count");
    }
    deepemo::ResNet<float> model(deepemo::ArchSpec::named(ckpt.arch), ckpt.num_classes,
                                 ckpt.seed);
    deepemo::load_into(model, ckpt, false);
    *out = new de_model{std::move(model)};
  });
}

de_status de_model_load_backbone(de_model* model, const char* path) {
  if (!model || !path) return usage_error("de_model_load_backbone: null argument");
  return guarded(
      [&] { deepemo::load_into(model->model, deepemo::load_checkpoint(path), true); });
}

de_status de_model_replace_head(de_model* model, int num_classes, uint64_t seed) {
  if (!model) return usage_error("de_model_replace_head: null argument");
  return guarded([&] { model->model.replace_final_layer(num_classes, seed); });
}

de_status de_model_save(const de_model* model, const char* path, int epoch, uint64_t seed) {
  if (!model || !path) return usage_error("de_model_save: null argument");
  return guarded([&] {
    auto& mutable_model = const_cast<de_model*>(model)->model;  // snapshot only reads
    deepemo::save_checkpoint(deepemo::snapshot(mutable_model, epoch, seed), path);
  });
}

void de_model_destroy(de_model* model) { delete model; }

int de_model_num_classes(const de_model* model) {
  return model ? model->model.num_classes() : 0;
}

const char* de_model_arch(const de_model* model) {
  return model ? model->model.arch().name.c_str() : nullptr;
}

uint64_t de_model_parameter_count(const de_model* model) {
  return model ? const_cast<de_model*>(model)->model.parameter_count() : 0;
}

de_status de_model_predict_topk(de_model* model, const de_clip* clip, int k,
                                const de_spec_params* params, int sample_rate,
                                int imagenet_norm, const char* input_id,
                                const char* render_path, de_report** out) {
  if (!model || !clip || !out) return usage_error("de_model_predict_topk: null argument");
  return guarded([&] {
    *out = new de_report{deepemo::predict_topk(
        model->model, clip->clip, k, to_config(params), sample_rate, imagenet_norm != 0,
        input_id ? input_id : "", render_path ? render_path : "")};
  });
}

/* ---- prediction reports ------------------------------------------------ */

void de_report_destroy(de_report* report) { delete report; }

int de_report_size(const de_report* report) {
  return report ? static_cast<int>(report->report.entries.size()) : 0;
}

const char* de_report_label(const de_report* report, int rank) {
  if (!report || rank < 0 || rank >= de_report_size(report)) return nullptr;
  return report->report.entries[static_cast<size_t>(rank)].label.c_str();
}

de_status de_report_probability(const de_report* report, int rank, double* out) {
  if (!report || !out) return usage_error("de_report_probability: null argument");
  if (rank < 0 || rank >= de_report_size(report)) {
    return usage_error("de_report_probability: rank out of range");
  }
  *out = report->report.entries[static_cast<size_t>(rank)].probability;
  return DE_OK;
}

const char* de_report_spectrogram_path(const de_report* report) {
  if (!report || report->report.spectrogram_path.empty()) return nullptr;
  return report->report.spectrogram_path.c_str();
}

char* de_report_text(const de_report* report) {
  if (!report) return nullptr;
  return copy_string(deepemo::format_topk_report(report->report));
}

char* de_report_json(const de_report* report) {
  if (!report) return nullptr;
  nlohmann::json entries = nlohmann::json::array();
  for (size_t i = 0; i < report->report.entries.size(); ++i) {
    entries.push_back({{"rank", i + 1},
                       {"label", report->report.entries[i].label},
                       {"probability", report->report.entries[i].probability}});
  }
  const nlohmann::json doc = {{"input", report->report.input_id},
                              {"spectrogram", report->report.spectrogram_path},
                              {"entries", entries}};
  return copy_string(doc.dump());
}

void de_string_free(char* text) { std::free(text); }

/* ---- run configuration + commands -------------------------------------- */

de_status de_config_create(de_config** out) {
  if (!out) return usage_error("de_config_create: null argument");
  return guarded([&] { *out = new de_config{}; });
}

void de_config_destroy(de_config* config) { delete config; }

de_status de_config_apply_env(de_config* config) {
  if (!config) return usage_error("de_config_apply_env: null argument");
  return guarded([&] { config->config.apply_env(); });
}

de_status de_config_load_file(de_config* config, const char* path) {
  if (!config || !path) return usage_error("de_config_load_file: null argument");
  return guarded([&] { config->config.apply_file(path); });
}

de_status de_config_set(de_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return usage_error("de_config_set: null argument");
  return guarded([&] { config->config.set(key, value); });
}

de_status de_config_get(const de_config* config, const char* key, char* buf, size_t buf_len) {
  if (!config || !key || !buf || buf_len == 0) {
    return usage_error("de_config_get: null argument");
  }
  return guarded([&] {
    const std::string& value = config->config.get(key);
    const size_t n = value.size() < buf_len - 1 ? value.size() : buf_len - 1;
    std::memcpy(buf, value.data(), n);
    buf[n] = '\0';
  });
}

de_status de_cmd_features(const de_config* config) {
  if (!config) return usage_error("de_cmd_features: null argument");
  return guarded(
      [&] { deepemo::cmd_features(deepemo::RunConfig::resolve(config->config), std::cout); });
}

de_status de_cmd_train(const de_config* config) {
  if (!config) return usage_error("de_cmd_train: null argument");
  return guarded(
      [&] { deepemo::cmd_train(deepemo::RunConfig::resolve(config->config), std::cout); });
}

de_status de_cmd_eval(const de_config* config, const char* split) {
  if (!config || !split) return usage_error("de_cmd_eval: null argument");
  return guarded([&] {
    deepemo::cmd_eval(deepemo::RunConfig::resolve(config->config), split, std::cout);
  });
}

de_status de_cmd_predict(const de_config* config, const char* wav_path) {
  if (!config || !wav_path) return usage_error("de_cmd_predict: null argument");
  return guarded([&] {
    deepemo::cmd_predict(deepemo::RunConfig::resolve(config->config), wav_path, std::cout);
  });
}

de_status de_cmd_render(const de_config* config, const char* wav_path, const char* out_image) {
  if (!config || !wav_path || !out_image) return usage_error("de_cmd_render: null argument");
  return guarded([&] {
    deepemo::cmd_render(deepemo::RunConfig::resolve(config->config), wav_path, out_image,
                        std::cout);
  });
}

} /* extern "C" */
