// Acceptance gate: ten end-to-end checks, one PASS/FAIL line each.
// Exit status 0 only when every criterion holds. argv[1] is the path to
// the command-line binary, used by the process-level criteria.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "deepemo/checkpoint.hpp"
#include "deepemo/dataset.hpp"
#include "deepemo/dsp.hpp"
#include "deepemo/error.hpp"
#include "deepemo/kernels.hpp"
#include "deepemo/layers.hpp"
#include "deepemo/resnet.hpp"
#include "deepemo/rng.hpp"
#include "deepemo/train.hpp"
#include "helpers.hpp"

using deepemo::ComplexBuffer;
using deepemo::Rng;
using TensorD = deepemo::TensorT<double>;

namespace {

// Pinned tolerances and budgets. These are the contract; do not relax.
constexpr double kFftTol = 1e-9;
constexpr double kFftBudgetSec = 10.0;
constexpr double kParsevalTol = 1e-9;
constexpr double kMelRoundTripTol = 1e-12;
constexpr double kMelAnchorTol = 1e-9;
constexpr double kOpGradTol = 1e-3;
constexpr double kLossGradTol = 1e-5;
constexpr double kGradBudgetSec = 60.0;
constexpr double kUniformCeTol = 1e-6;
constexpr double kOverfitLossTarget = 0.02;
constexpr int kOverfitMaxEpochs = 200;
constexpr double kOverfitBudgetSec = 300.0;
constexpr double kProbSumTol = 1e-6;

int g_failures = 0;
std::string g_cli;

void report(int index, const char* label, bool pass, const std::string& detail) {
  std::printf("%s %d: %s%s%s%s\n", pass ? "PASS" : "FAIL", index, label,
              detail.empty() ? "" : " (", detail.c_str(), detail.empty() ? "" : ")");
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run_criterion(int index, const char* label, const std::function<std::string()>& body) {
  // body returns "+<note>" on success, anything else is a failure description
  try {
    const std::string detail = body();
    const bool pass = !detail.empty() && detail[0] == '+';
    report(index, label, pass, pass ? detail.substr(1) : detail);
  } catch (const std::exception& e) {
    report(index, label, false, e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

ComplexBuffer random_signal(size_t n, uint64_t seed) {
  Rng rng(seed);
  ComplexBuffer buf(n);
  for (auto& v : buf) v = {rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0};
  return buf;
}

int run_cli(const std::string& args, const std::string& capture_path) {
  const std::string cmd = g_cli + " " + args + " > " + capture_path + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// ---- criterion bodies ---------------------------------------------------

std::string check_fft_oracle() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  uint64_t seed = 1;
  for (size_t n = 2; n <= 1024; n *= 2) {
    for (int trial = 0; trial < 20; ++trial) {
      const ComplexBuffer x = random_signal(n, seed++);
      worst = std::max(worst,
                       testutil::spectrum_rel_error(deepemo::fft(x), testutil::naive_dft(x)));
    }
  }
  const double elapsed = seconds_since(start);
  if (worst >= kFftTol) return fmt("max rel err %.3e >= %.0e", worst, kFftTol);
  if (elapsed >= kFftBudgetSec) return fmt("took %.1f s >= %.0f s", elapsed, kFftBudgetSec);
  return fmt("+max rel err %.2e, %.2f s", worst, elapsed);
}

std::string check_parseval() {
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ComplexBuffer x = random_signal(512, 9000 + trial);
    const ComplexBuffer y = deepemo::fft(x);
    double te = 0.0, fe = 0.0;
    for (const auto& v : x) te += std::norm(v);
    for (const auto& v : y) fe += std::norm(v);
    fe /= static_cast<double>(x.size());
    worst = std::max(worst, std::abs(te - fe) / te);
  }
  if (worst >= kParsevalTol) return fmt("max rel err %.3e >= %.0e", worst, kParsevalTol);
  return fmt("+100 signals, max rel err %.2e", worst);
}

std::string check_mel_round_trip() {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double hz = 1.0 + (22050.0 / 2.0 - 1.0) * i / 999.0;
    const double back = deepemo::mel_to_hz(deepemo::hz_to_mel(hz));
    worst = std::max(worst, std::abs(back - hz) / hz);
  }
  if (worst >= kMelRoundTripTol) {
    return fmt("round-trip rel err %.3e >= %.0e", worst, kMelRoundTripTol);
  }
  const double anchor = std::abs(deepemo::hz_to_mel(700.0) - 2595.0 * std::log10(2.0));
  if (anchor >= kMelAnchorTol) return fmt("700 Hz anchor off by %.3e", anchor);
  return fmt("+1000 freqs, worst %.2e; anchor err %.2e", worst, anchor);
}

double grad_rel_err(double analytic, double numeric) {
  const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

double max_grad_error(TensorD& leaf, const TensorD& analytic,
                      const std::function<double()>& loss) {
  const double h = 1e-6;
  double worst = 0.0;
  for (size_t i = 0; i < leaf.data.size(); ++i) {
    const double orig = leaf.data[i];
    leaf.data[i] = orig + h;
    const double hi = loss();
    leaf.data[i] = orig - h;
    const double lo = loss();
    leaf.data[i] = orig;
    worst = std::max(worst, grad_rel_err(analytic.data[i], (hi - lo) / (2.0 * h)));
  }
  return worst;
}

TensorD random_tensor(std::vector<int> shape, uint64_t seed) {
  TensorD t(std::move(shape));
  Rng rng(seed);
  for (auto& v : t.data) v = rng.uniform() * 2.0 - 1.0;
  return t;
}

std::string check_gradients() {
  const auto start = std::chrono::steady_clock::now();
  double worst_op = 0.0;

  {  // conv2d with stride, padding, bias
    TensorD x = random_tensor({2, 2, 6, 6}, 100);
    TensorD w = random_tensor({3, 2, 3, 3}, 101);
    TensorD b = random_tensor({3}, 102);
    const TensorD c = random_tensor({2, 3, 3, 3}, 103);
    auto weighted = [&](const TensorD& y) {
      double acc = 0.0;
      for (size_t i = 0; i < y.data.size(); ++i) acc += c.data[i] * y.data[i];
      return acc;
    };
    auto loss = [&] { return weighted(deepemo::conv2d_forward(x, w, &b, 2, 1)); };
    const auto grads = deepemo::conv2d_backward(x, w, true, 2, 1, c);
    worst_op = std::max({worst_op, max_grad_error(x, grads.input, loss),
                         max_grad_error(w, grads.weight, loss),
                         max_grad_error(b, grads.bias, loss)});
  }

  {  // batchnorm2d in training mode
    TensorD x = random_tensor({3, 2, 4, 4}, 110);
    TensorD gamma = random_tensor({2}, 111);
    for (auto& g : gamma.data) g += 1.5;
    TensorD beta = random_tensor({2}, 112);
    const TensorD c = random_tensor(x.shape, 113);
    auto weighted = [&](const TensorD& y) {
      double acc = 0.0;
      for (size_t i = 0; i < y.data.size(); ++i) acc += c.data[i] * y.data[i];
      return acc;
    };
    deepemo::BatchNormCache<double>* no_cache = nullptr;
    auto loss = [&] {
      TensorD rm({2}), rv({2});
      rv.fill(1.0);
      return weighted(deepemo::batchnorm2d_forward(x, gamma, beta, rm, rv, 1e-5, 0.1,
                                                   deepemo::BatchNormMode::Train, no_cache));
    };
    TensorD rm({2}), rv({2});
    rv.fill(1.0);
    deepemo::BatchNormCache<double> cache;
    deepemo::batchnorm2d_forward(x, gamma, beta, rm, rv, 1e-5, 0.1,
                                 deepemo::BatchNormMode::Train, &cache);
    const auto grads = deepemo::batchnorm2d_backward(gamma, cache, c);
    worst_op = std::max({worst_op, max_grad_error(x, grads.input, loss),
                         max_grad_error(gamma, grads.gamma, loss),
                         max_grad_error(beta, grads.beta, loss)});
  }

  {  // linear
    TensorD x = random_tensor({3, 5}, 120);
    TensorD w = random_tensor({4, 5}, 121);
    TensorD b = random_tensor({4}, 122);
    const TensorD c = random_tensor({3, 4}, 123);
    auto weighted = [&](const TensorD& y) {
      double acc = 0.0;
      for (size_t i = 0; i < y.data.size(); ++i) acc += c.data[i] * y.data[i];
      return acc;
    };
    auto loss = [&] { return weighted(deepemo::linear_forward(x, w, b)); };
    const auto grads = deepemo::linear_backward(x, w, c);
    worst_op = std::max({worst_op, max_grad_error(x, grads.input, loss),
                         max_grad_error(w, grads.weight, loss),
                         max_grad_error(b, grads.bias, loss)});
  }

  {  // maxpool (3x3, stride 2, pad 1)
    TensorD x = random_tensor({2, 2, 7, 7}, 130);
    const auto fwd = deepemo::maxpool2d_forward(x, 3, 2, 1);
    const TensorD c = random_tensor(fwd.output.shape, 131);
    auto weighted = [&](const TensorD& y) {
      double acc = 0.0;
      for (size_t i = 0; i < y.data.size(); ++i) acc += c.data[i] * y.data[i];
      return acc;
    };
    auto loss = [&] { return weighted(deepemo::maxpool2d_forward(x, 3, 2, 1).output); };
    const TensorD gx = deepemo::maxpool2d_backward(x.shape, fwd.argmax, c);
    worst_op = std::max(worst_op, max_grad_error(x, gx, loss));
  }

  {  // residual block with downsample projection
    deepemo::BasicBlock<double> block(2, 4, 2);
    Rng rng(140);
    block.init(rng);
    TensorD x = random_tensor({2, 2, 6, 6}, 141);
    const TensorD c = random_tensor({2, 4, 3, 3}, 142);
    auto weighted = [&](const TensorD& y) {
      double acc = 0.0;
      for (size_t i = 0; i < y.data.size(); ++i) acc += c.data[i] * y.data[i];
      return acc;
    };
    auto loss = [&] { return weighted(block.forward(x, true)); };
    block.conv1.grad_weight.zero();
    block.conv2.grad_weight.zero();
    block.down_conv->grad_weight.zero();
    block.forward(x, true);
    const TensorD gx = block.backward(c);
    worst_op = std::max({worst_op, max_grad_error(x, gx, loss),
                         max_grad_error(block.conv1.weight, block.conv1.grad_weight, loss),
                         max_grad_error(block.conv2.weight, block.conv2.grad_weight, loss),
                         max_grad_error(block.down_conv->weight,
                                        block.down_conv->grad_weight, loss)});
  }

  double worst_loss = 0.0;
  {  // softmax + cross-entropy, checked at the scalar loss
    TensorD z = random_tensor({3, 6}, 150);
    for (auto& v : z.data) v *= 2.0;
    const std::vector<int> targets = {2, 0, 5};
    auto loss = [&] { return deepemo::cross_entropy(z, targets).loss; };
    const auto result = deepemo::cross_entropy(z, targets);
    worst_loss = max_grad_error(z, result.grad_logits, loss);
  }

  const double elapsed = seconds_since(start);
  if (worst_op >= kOpGradTol) return fmt("op-level rel err %.3e >= %.0e", worst_op, kOpGradTol);
  if (worst_loss >= kLossGradTol) {
    return fmt("loss-level rel err %.3e >= %.0e", worst_loss, kLossGradTol);
  }
  if (elapsed >= kGradBudgetSec) return fmt("took %.1f s >= %.0f s", elapsed, kGradBudgetSec);
  return fmt("+op worst %.2e, loss worst %.2e, %.1f s", worst_op, worst_loss, elapsed);
}

std::string check_uniform_cross_entropy() {
  TensorD z({4, 8});
  const double loss = deepemo::cross_entropy(z, {0, 3, 5, 7}).loss;
  const double err = std::abs(loss - std::log(8.0));
  if (err >= kUniformCeTol) return fmt("|loss - ln 8| = %.3e >= %.0e", err, kUniformCeTol);
  return fmt("+|loss - ln 8| = %.2e", err);
}

std::string check_head_replacement() {
  testutil::TempDir dir("accept_transfer");
  const std::string path = dir.file("imagenet_like.demo");
  {
    deepemo::ResNet<float> source(deepemo::ArchSpec::named("resnet18"), 1000, 17);
    deepemo::save_checkpoint(deepemo::snapshot(source, 0, 17), path);
  }

  const deepemo::Checkpoint ckpt = deepemo::load_checkpoint(path);
  if (ckpt.num_classes != 1000) return "checkpoint did not record 1000 classes";
  deepemo::ResNet<float> model(deepemo::ArchSpec::named(ckpt.arch), ckpt.num_classes, 99);
  deepemo::load_into(model, ckpt, false);
  model.replace_final_layer(8, 7);

  auto now = deepemo::snapshot(model, 0, 0);
  const auto& head = now.tensors.at("fc.weight");
  if (head.shape != std::vector<int>{8, 512}) {
    return "head shape is " + head.shape_str() + ", want [8, 512]";
  }
  size_t compared = 0;
  for (const auto& [name, tensor] : ckpt.tensors) {
    if (name.rfind("fc.", 0) == 0) continue;
    if (now.tensors.at(name).data != tensor.data) return "backbone tensor changed: " + name;
    ++compared;
  }
  return fmt("+%zu backbone tensors bit-exact, 512x8 head", compared);
}

std::string check_overfit_fixture() {
  const auto start = std::chrono::steady_clock::now();

  std::vector<deepemo::LabeledExample> examples;
  for (int code = 1; code <= 8; ++code) {
    deepemo::LabeledExample ex;
    ex.label = deepemo::emotion_from_code(code);
    ex.actor_id = 1;
    ex.path = deepemo::format_ravdess_filename(ex.label, 1);
    ex.features = deepemo::mel_spectrogram(testutil::make_tone(code - 1, 0.5),
                                           deepemo::SpectrogramConfig{});
    examples.push_back(std::move(ex));
  }

  std::string epochs_used;
  for (uint64_t seed : {1u, 2u, 3u}) {
    deepemo::ResNet<float> model(deepemo::ArchSpec::named("resnet_tiny"), 8, seed);
    deepemo::TrainConfig cfg;
    cfg.epochs = kOverfitMaxEpochs;
    cfg.batch_size = 8;
    cfg.lr = 1e-3;  // flagged fast rate; the default 3e-5 is for full-scale runs
    cfg.seed = seed;
    deepemo::TrainHooks hooks;
    hooks.should_stop = [](const deepemo::EpochMetrics& m) {
      return m.train_accuracy >= 1.0 && m.mean_loss < kOverfitLossTarget;
    };
    const auto metrics = deepemo::train(model, examples, {}, cfg, hooks);
    if (metrics.empty()) return fmt("seed %llu produced no epochs", (unsigned long long)seed);
    const auto& last = metrics.back();
    if (last.train_accuracy < 1.0 || last.mean_loss >= kOverfitLossTarget) {
      return fmt("seed %llu: acc %.3f loss %.4f after %d epochs",
                 (unsigned long long)seed, last.train_accuracy, last.mean_loss, last.epoch);
    }
    epochs_used += (epochs_used.empty() ? "" : "/") + std::to_string(last.epoch);
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= kOverfitBudgetSec) {
    return fmt("took %.0f s >= %.0f s", elapsed, kOverfitBudgetSec);
  }
  return fmt("+3/3 seeds at acc 1.000, loss < %.2f (lr=1e-3 flagged), epochs %s, %.0f s",
             kOverfitLossTarget, epochs_used.c_str(), elapsed);
}

std::string check_deterministic_training() {
  testutil::TempDir dir("accept_determinism");
  const std::string data = dir.file("data");
  testutil::write_corpus(data, 2);
  const std::string cache = dir.file("cache");

  const std::string common = "--dataset-root " + data + " --cache-dir " + cache +
                             " --arch resnet_tiny --epochs 2 --batch-size 4 --lr 1e-3"
                             " --seed 7 --train-fraction 0.5 --deterministic";
  for (int run = 1; run <= 2; ++run) {
    const std::string out = dir.file("out" + std::to_string(run));
    const int rc = run_cli("train " + common + " --out-dir " + out,
                           dir.file("train" + std::to_string(run) + ".log"));
    if (rc != 0) {
      return fmt("run %d exited %d: %s", run, rc,
                 read_file(dir.file("train" + std::to_string(run) + ".log")).c_str());
    }
  }
  const std::string a = read_file(dir.file("out1") + "/metrics.csv");
  const std::string b = read_file(dir.file("out2") + "/metrics.csv");
  if (a.empty()) return "first run wrote no metrics";
  if (a != b) return "metrics CSVs differ between runs";
  return fmt("+two runs, %zu-byte metrics CSVs identical", a.size());
}

std::string check_filename_parsing() {
  const deepemo::ParsedName p = deepemo::parse_ravdess_filename("03-01-06-01-02-01-12.wav");
  if (p.label != deepemo::Emotion::Fearful) return "expected the fearful label";
  if (p.actor_id != 12) return fmt("expected actor 12, got %d", p.actor_id);

  const char* order[] = {"neutral", "calm",    "happy",   "sad",
                         "angry",   "fearful", "disgust", "surprised"};
  for (int code = 1; code <= 8; ++code) {
    if (std::string(deepemo::emotion_name(deepemo::emotion_from_code(code))) !=
        order[code - 1]) {
      return fmt("label order broken at code %d", code);
    }
  }
  for (const char* bad : {"03-01-00-01-02-01-12.wav", "03-01-09-01-02-01-12.wav"}) {
    try {
      deepemo::parse_ravdess_filename(bad);
      return std::string("accepted out-of-range code in ") + bad;
    } catch (const deepemo::Error& e) {
      if (e.code() != deepemo::ErrorCode::UnknownEmotionCode) {
        return fmt("wrong error for %s: %s", bad, deepemo::error_code_name(e.code()));
      }
    }
  }
  return "+parses (fearful, 12); rejects codes 00 and 09";
}

std::string check_end_to_end() {
  testutil::TempDir dir("accept_smoke");
  const std::string data = dir.file("data");
  const std::vector<std::string> files = testutil::write_corpus(data, 2);
  if (files.size() != 16) return "fixture corpus is not 16 files";
  const std::string cache = dir.file("cache");
  const std::string out = dir.file("out");
  const std::string common = "--dataset-root " + data + " --cache-dir " + cache +
                             " --out-dir " + out +
                             " --arch resnet_tiny --train-fraction 0.5 --seed 3";

  int rc = run_cli("features " + common, dir.file("features.log"));
  if (rc != 0) return fmt("features exited %d", rc);

  rc = run_cli("train " + common + " --epochs 2 --batch-size 4 --lr 1e-3",
               dir.file("train.log"));
  if (rc != 0) return fmt("train exited %d", rc);

  const std::string ckpt = out + "/checkpoint_last.demo";
  rc = run_cli("eval val " + common + " --checkpoint " + ckpt, dir.file("eval.log"));
  if (rc != 0) return fmt("eval exited %d", rc);

  rc = run_cli("predict " + files[0] + " " + common + " --checkpoint " + ckpt + " --k 8",
               dir.file("predict.log"));
  if (rc != 0) return fmt("predict exited %d", rc);

  // sum the probability column of the k=8 report
  std::istringstream in(read_file(dir.file("predict.log")));
  std::string line;
  int rows = 0;
  double sum = 0.0;
  while (std::getline(in, line)) {
    const size_t first = line.find(',');
    if (first == std::string::npos) continue;
    const size_t second = line.find(',', first + 1);
    if (second == std::string::npos) continue;
    const std::string head = line.substr(0, first);
    if (head == "rank" || head == "spectrogram") continue;
    char* end = nullptr;
    const double p = std::strtod(line.c_str() + second + 1, &end);
    if (end == line.c_str() + second + 1) continue;
    ++rows;
    sum += p;
  }
  if (rows != 8) return fmt("expected 8 report rows, saw %d", rows);
  if (std::abs(sum - 1.0) >= kProbSumTol) {
    return fmt("probabilities sum to %.9f (tolerance %.0e)", sum, kProbSumTol);
  }
  return fmt("+features/train/eval/predict all exit 0; 8 probs sum %.9f", sum);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cli>\n");
    return 2;
  }
  g_cli = argv[1];

  run_criterion(1, "fft matches a direct dft", check_fft_oracle);
  run_criterion(2, "fft preserves signal energy", check_parseval);
  run_criterion(3, "mel scale round-trips", check_mel_round_trip);
  run_criterion(4, "finite-difference gradient suite", check_gradients);
  run_criterion(5, "uniform 8-way cross entropy is ln 8", check_uniform_cross_entropy);
  run_criterion(6, "head replacement keeps the backbone", check_head_replacement);
  run_criterion(7, "tiny net overfits the tone fixture", check_overfit_fixture);
  run_criterion(8, "deterministic training metrics", check_deterministic_training);
  run_criterion(9, "dataset filename parsing", check_filename_parsing);
  run_criterion(10, "end-to-end pipeline", check_end_to_end);

  if (g_failures > 0) {
    std::printf("%d of 10 criteria failed\n", g_failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
