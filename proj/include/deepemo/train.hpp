#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "deepemo/audio.hpp"
#include "deepemo/dataset.hpp"
#include "deepemo/dsp.hpp"
#include "deepemo/resnet.hpp"

namespace deepemo {

struct TrainConfig {
  int epochs = 42;
  int batch_size = 16;
  double lr = 3e-5;
  uint64_t seed = 42;
  bool freeze_backbone = false;
  bool imagenet_norm = false;
};

/// One row of the training log: post-epoch accuracy over the training set
/// (eval mode), mean training-mode loss across the epoch's batches, and
/// validation accuracy (0 when the validation set is empty).
struct EpochMetrics {
  int epoch = 0;
  double train_accuracy = 0.0;
  double mean_loss = 0.0;
  double val_accuracy = 0.0;
};

struct ConfusionMatrix {
  int classes = 0;
  std::vector<int64_t> counts;  // row-major, rows = true class, columns = predicted

  explicit ConfusionMatrix(int n = 0)
      : classes(n), counts(static_cast<size_t>(n) * static_cast<size_t>(n), 0) {}
  int64_t& at(int true_class, int predicted) {
    return counts[static_cast<size_t>(true_class) * classes + predicted];
  }
  int64_t at(int true_class, int predicted) const {
    return counts[static_cast<size_t>(true_class) * classes + predicted];
  }
  int64_t total() const;
  int64_t trace() const;
};

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  ConfusionMatrix confusion;
};

struct TopKEntry {
  std::string label;
  double probability = 0.0;
};

struct TopKReport {
  std::string input_id;
  std::string spectrogram_path;      // empty when no image was rendered
  std::vector<TopKEntry> entries;    // k rows, probability descending
  std::vector<double> full_probs;    // all classes, class-index order
};

/// Optional side channels for train(). Checkpoint paths left empty disable
/// writing; `should_stop` (checked after each epoch's metrics) lets a
/// harness cap runtime once a target is reached.
struct TrainHooks {
  std::function<void(const EpochMetrics&)> on_epoch;
  std::function<bool(const EpochMetrics&)> should_stop;
  std::string checkpoint_last_path;
  std::string checkpoint_best_path;
};

/// Runs the full loop: per epoch, a seeded shuffle of the training set,
/// minibatch forward/cross-entropy/backward/Adam steps, then post-epoch
/// accuracy in eval mode. A non-finite batch loss aborts with a diagnostic
/// naming the epoch and batch. Checkpoints: last is rewritten every epoch
/// (and once before the first, so epochs=0 still persists the initial
/// weights); best tracks the highest validation accuracy.
std::vector<EpochMetrics> train(ResNet<float>& model,
                                const std::vector<LabeledExample>& train_set,
                                const std::vector<LabeledExample>& val_set,
                                const TrainConfig& config, const TrainHooks& hooks = {});

/// Eval-mode pass over `examples`: accuracy, mean loss, and the confusion
/// matrix of argmax predictions (ties resolved to the lowest class index).
EvalResult evaluate(ResNet<float>& model, const std::vector<LabeledExample>& examples,
                    int batch_size, bool imagenet_norm);

/// Whole-pipeline prediction for one clip: resample to `sample_rate`,
/// peak-normalize, mel spectrogram, model input, softmax, sort descending
/// (ties by class index), keep k. When `render_path` is non-empty the
/// spectrogram is also written there as a PGM and recorded in the report.
TopKReport predict_topk(ResNet<float>& model, const AudioClip& clip, int k,
                        const SpectrogramConfig& spectrogram, int sample_rate,
                        bool imagenet_norm, const std::string& input_id,
                        const std::string& render_path);

/// Class label for reports: the emotion name when the model is 8-way,
/// otherwise "class_<index>".
std::string class_label(int index, int num_classes);

/// CSV with header "epoch,train_acc,loss,val_acc", values fixed to six
/// decimals. parse(format(x)) reproduces format(x) byte-for-byte.
std::string format_metrics_csv(const std::vector<EpochMetrics>& metrics);
std::vector<EpochMetrics> parse_metrics_csv(const std::string& text);

/// Line-oriented report: a "rank,label,probability" header, one row per
/// entry, then a "spectrogram,<path>" trailer when an image was rendered.
std::string format_topk_report(const TopKReport& report);

std::string format_confusion_csv(const ConfusionMatrix& m, int num_classes);

}  // namespace deepemo
