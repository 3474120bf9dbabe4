#include "deepemo/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "deepemo/checkpoint.hpp"
#include "deepemo/error.hpp"
#include "deepemo/kernels.hpp"
#include "deepemo/optim.hpp"
#include "deepemo/preprocess.hpp"
#include "deepemo/rng.hpp"

namespace deepemo {
namespace {

struct KahanSum {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

int class_index(const LabeledExample& ex) { return emotion_code(ex.label) - 1; }

Tensor gather_batch(const std::vector<LabeledExample>& set, const std::vector<size_t>& order,
                    size_t start, size_t end, int input_size, bool imagenet_norm,
                    std::vector<int>& targets) {
  std::vector<const MelSpectrogram*> specs;
  specs.reserve(end - start);
  targets.clear();
  for (size_t i = start; i < end; ++i) {
    const LabeledExample& ex = set[order[i]];
    if (!ex.features) {
      fail(ErrorCode::Internal, "example '" + ex.path + "' has no attached features");
    }
    specs.push_back(&*ex.features);
    targets.push_back(class_index(ex));
  }
  return make_batch(specs, input_size, imagenet_norm);
}

std::vector<size_t> identity_order(size_t n) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  return order;
}

}  // namespace

int64_t ConfusionMatrix::total() const {
  int64_t t = 0;
  for (int64_t c : counts) t += c;
  return t;
}

int64_t ConfusionMatrix::trace() const {
  int64_t t = 0;
  for (int i = 0; i < classes; ++i) t += at(i, i);
  return t;
}

std::vector<EpochMetrics> train(ResNet<float>& model,
                                const std::vector<LabeledExample>& train_set,
                                const std::vector<LabeledExample>& val_set,
                                const TrainConfig& config, const TrainHooks& hooks) {
  if (train_set.empty()) fail(ErrorCode::EmptyTrainSet, "training set is empty");
  if (config.batch_size < 1) fail(ErrorCode::Usage, "batch_size must be >= 1");
  if (config.epochs < 0) fail(ErrorCode::Usage, "epochs must be >= 0");
  if (config.lr <= 0.0) fail(ErrorCode::Usage, "learning rate must be > 0");

  const int input_size = model.arch().input_size;
  const auto save = [&](const std::string& path, int epoch) {
    if (!path.empty()) save_checkpoint(snapshot(model, epoch, config.seed), path);
  };
  save(hooks.checkpoint_last_path, 0);
  save(hooks.checkpoint_best_path, 0);

  Adam<float> optimizer(model.parameters(), AdamConfig{config.lr, 0.9, 0.999, 1e-8},
                        config.freeze_backbone);
  Rng rng(config.seed);
  std::vector<size_t> order = identity_order(train_set.size());
  std::vector<EpochMetrics> metrics;
  double best_val = -1.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    KahanSum loss_sum;
    size_t seen = 0;
    std::vector<int> targets;
    for (size_t start = 0, batch = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size), ++batch) {
      const size_t end = std::min(start + static_cast<size_t>(config.batch_size), order.size());
      Tensor input = gather_batch(train_set, order, start, end, input_size,
                                  config.imagenet_norm, targets);
      Tensor logits = model.forward(input, true);
      auto ce = cross_entropy(logits, targets);
      if (!std::isfinite(ce.loss)) {
        fail(ErrorCode::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch) +
                                           ", batch " + std::to_string(batch));
      }
      loss_sum.add(ce.loss * static_cast<double>(end - start));
      seen += end - start;
      model.zero_grad();
      model.backward(ce.grad_logits);
      optimizer.step();
    }

    EpochMetrics row;
    row.epoch = epoch;
    row.mean_loss = loss_sum.sum / static_cast<double>(seen);
    row.train_accuracy =
        evaluate(model, train_set, config.batch_size, config.imagenet_norm).accuracy;
    row.val_accuracy =
        val_set.empty()
            ? 0.0
            : evaluate(model, val_set, config.batch_size, config.imagenet_norm).accuracy;
    metrics.push_back(row);

    save(hooks.checkpoint_last_path, epoch);
    if (row.val_accuracy >= best_val) {
      best_val = row.val_accuracy;
      save(hooks.checkpoint_best_path, epoch);
    }
    if (hooks.on_epoch) hooks.on_epoch(row);
    if (hooks.should_stop && hooks.should_stop(row)) break;
  }
  return metrics;
}

EvalResult evaluate(ResNet<float>& model, const std::vector<LabeledExample>& examples,
                    int batch_size, bool imagenet_norm) {
  if (examples.empty()) fail(ErrorCode::EmptyEvalSet, "evaluation set is empty");
  if (batch_size < 1) fail(ErrorCode::Usage, "batch_size must be >= 1");

  const int classes = model.num_classes();
  EvalResult result;
  result.confusion = ConfusionMatrix(classes);
  KahanSum loss_sum;
  int64_t correct = 0;

  const std::vector<size_t> order = identity_order(examples.size());
  std::vector<int> targets;
  for (size_t start = 0; start < examples.size(); start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(start + static_cast<size_t>(batch_size), examples.size());
    Tensor input = gather_batch(examples, order, start, end, model.arch().input_size,
                                imagenet_norm, targets);
    Tensor logits = model.forward(input, false);
    auto ce = cross_entropy(logits, targets);
    loss_sum.add(ce.loss * static_cast<double>(end - start));
    for (size_t n = 0; n < end - start; ++n) {
      const float* p = ce.probs.ptr() + n * static_cast<size_t>(classes);
      int pred = 0;
      for (int c = 1; c < classes; ++c) {
        if (p[c] > p[pred]) pred = c;  // strict: ties keep the lowest index
      }
      result.confusion.at(targets[n], pred) += 1;
      if (pred == targets[n]) ++correct;
    }
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
  result.mean_loss = loss_sum.sum / static_cast<double>(examples.size());
  return result;
}

std::string class_label(int index, int num_classes) {
  if (num_classes == kNumEmotions) return emotion_name(emotion_from_code(index + 1));
  return "class_" + std::to_string(index);
}

TopKReport predict_topk(ResNet<float>& model, const AudioClip& clip, int k,
                        const SpectrogramConfig& spectrogram, int sample_rate,
                        bool imagenet_norm, const std::string& input_id,
                        const std::string& render_path) {
  const int classes = model.num_classes();
  if (k < 1 || k > classes) {
    fail(ErrorCode::Usage,
         "k must be between 1 and the model's class count (" + std::to_string(classes) + ")");
  }

  AudioClip canonical = normalize_peak(resample(clip, sample_rate));
  MelSpectrogram spec = mel_spectrogram(canonical, spectrogram);

  TopKReport report;
  report.input_id = input_id;
  if (!render_path.empty()) {
    write_pgm(render_image(spec), render_path);
    report.spectrogram_path = render_path;
  }

  Tensor input = spectrogram_to_input(spec, model.arch().input_size, imagenet_norm);
  Tensor probs = softmax(model.forward(input, false));
  report.full_probs.assign(probs.data.begin(), probs.data.end());

  std::vector<int> ranked(static_cast<size_t>(classes));
  std::iota(ranked.begin(), ranked.end(), 0);
  std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    const double pa = report.full_probs[static_cast<size_t>(a)];
    const double pb = report.full_probs[static_cast<size_t>(b)];
    if (pa != pb) return pa > pb;
    return a < b;
  });
  for (int r = 0; r < k; ++r) {
    const int c = ranked[static_cast<size_t>(r)];
    report.entries.push_back({class_label(c, classes), report.full_probs[static_cast<size_t>(c)]});
  }
  return report;
}

std::string format_metrics_csv(const std::vector<EpochMetrics>& metrics) {
  std::string out = "epoch,train_acc,loss,val_acc\n";
  char line[128];
  for (const auto& m : metrics) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", m.epoch, m.train_accuracy,
                  m.mean_loss, m.val_accuracy);
    out += line;
  }
  return out;
}

std::vector<EpochMetrics> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_acc,loss,val_acc") {
    fail(ErrorCode::MalformedHeader, "metrics CSV header missing or unrecognized");
  }
  std::vector<EpochMetrics> metrics;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochMetrics m;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &m.epoch, &m.train_accuracy, &m.mean_loss,
                    &m.val_accuracy) != 4) {
      fail(ErrorCode::MalformedHeader, "bad metrics CSV row: " + line);
    }
    metrics.push_back(m);
  }
  return metrics;
}

std::string format_topk_report(const TopKReport& report) {
  std::string out = "rank,label,probability\n";
  char line[160];
  for (size_t i = 0; i < report.entries.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%s,%.9f\n", i + 1, report.entries[i].label.c_str(),
                  report.entries[i].probability);
    out += line;
  }
  if (!report.spectrogram_path.empty()) {
    out += "spectrogram," + report.spectrogram_path + "\n";
  }
  return out;
}

std::string format_confusion_csv(const ConfusionMatrix& m, int num_classes) {
  std::string out;
  for (int c = 0; c < num_classes; ++c) out += "," + class_label(c, num_classes);
  out += "\n";
  for (int t = 0; t < num_classes; ++t) {
    out += class_label(t, num_classes);
    for (int p = 0; p < num_classes; ++p) out += "," + std::to_string(m.at(t, p));
    out += "\n";
  }
  return out;
}

}  // namespace deepemo
