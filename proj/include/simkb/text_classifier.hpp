// Copyright 2026 The simkb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Binary simile/literal classifiers.
//
// HashedLinearModel is the bundled classifier: hashed bag-of-words features
// (2^18 buckets, FNV-1a over lowercased whitespace tokens), an averaged
// logistic model trained by fixed-epoch online updates, and a logistic link
// for confidence. ExternalScorer delegates to a child process that answers
// one probability per input line.

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <concepts>
#include <cstdio>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simkb/common.hpp"

namespace simkb {

enum class Label { literal, simile };

inline std::string_view label_name(Label l) { return l == Label::simile ? "simile" : "literal"; }

inline Label parse_label(std::string_view s) {
  if (s == "simile" || s == "1") return Label::simile;
  if (s == "literal" || s == "0") return Label::literal;
  throw Error("unknown label: '" + std::string(s) + "'");
}

struct LabeledExample {
  std::string text;
  Label label = Label::literal;

  bool operator==(const LabeledExample&) const = default;
};

struct Prediction {
  Label label = Label::literal;
  double confidence = 0.5;  // probability of `label`, always >= 0.5
};

// Anything that maps text to P(simile | text).
template <class M>
concept SimileScorer = requires(const M& m, std::string_view text) {
  { m.simile_probability(text) } -> std::convertible_to<double>;
};

template <SimileScorer M>
Prediction predict_proba(const M& model, std::string_view text) {
  const double p = model.simile_probability(text);
  if (p > 0.5) return {Label::simile, p};
  return {Label::literal, 1.0 - p};
}

struct LinearTrainOptions {
  int epochs = 10;
  double learning_rate = 0.5;
};

class HashedLinearModel {
 public:
  static constexpr uint32_t kBuckets = 1u << 18;
  static constexpr std::string_view kMagic = "SIMCLS";
  static constexpr int kVersion = 1;

  HashedLinearModel() : weights_(kBuckets, 0.0) {}

  static HashedLinearModel train(std::span<const LabeledExample> examples, uint64_t seed,
                                 const LinearTrainOptions& opts = {}) {
    bool has_pos = false, has_neg = false;
    for (const auto& ex : examples) (ex.label == Label::simile ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw Error("degenerate training data: both labels are required");

    std::vector<std::vector<std::pair<uint32_t, double>>> feats;
    feats.reserve(examples.size());
    for (const auto& ex : examples) feats.push_back(features(ex.text));

    HashedLinearModel m;
    m.epochs_ = opts.epochs;
    m.learning_rate_ = opts.learning_rate;
    std::vector<double> acc(kBuckets, 0.0);
    double bias = 0.0, acc_bias = 0.0;
    double step = 1.0;
    std::vector<size_t> order(examples.size());
    for (int e = 0; e < opts.epochs; ++e) {
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      deterministic_shuffle(order, derive_seed(seed, "classifier-epoch", static_cast<uint64_t>(e)));
      for (size_t idx : order) {
        const auto& f = feats[idx];
        if (f.empty()) continue;
        double z = bias;
        for (auto [b, c] : f) z += m.weights_[b] * c;
        const double y = examples[idx].label == Label::simile ? 1.0 : 0.0;
        const double g = opts.learning_rate * (y - sigmoid(z));
        for (auto [b, c] : f) {
          m.weights_[b] += g * c;
          acc[b] += step * g * c;
        }
        bias += g;
        acc_bias += step * g;
        step += 1.0;
      }
    }
    for (uint32_t b = 0; b < kBuckets; ++b) m.weights_[b] -= acc[b] / step;
    m.bias_ = bias - acc_bias / step;
    return m;
  }

  double simile_probability(std::string_view text) const {
    auto f = features(text);
    if (f.empty()) throw Error("cannot classify empty text");
    double z = bias_;
    for (auto [b, c] : f) z += weights_[b] * c;
    return sigmoid(z);
  }

  std::string serialize() const {
    std::string out;
    out += std::string(kMagic) + " v" + std::to_string(kVersion) + "\n";
    out += "buckets " + std::to_string(kBuckets) + "\n";
    out += "epochs " + std::to_string(epochs_) + "\n";
    out += "learning_rate " + format_double(learning_rate_) + "\n";
    out += "bias " + format_double(bias_) + "\n";
    size_t nnz = 0;
    for (double w : weights_) nnz += (w != 0.0);
    out += "weights " + std::to_string(nnz) + "\n";
    for (uint32_t b = 0; b < kBuckets; ++b)
      if (weights_[b] != 0.0) out += std::to_string(b) + ' ' + format_double(weights_[b]) + '\n';
    return out;
  }

  static HashedLinearModel deserialize(std::string_view data) {
    auto lines = split(data, '\n');
    size_t pos = 0;
    auto next = [&](std::string_view key) -> std::string_view {
      if (pos >= lines.size()) throw Error("corrupt model file: missing '" + std::string(key) + "'");
      auto line = lines[pos++];
      if (!line.starts_with(key) || line.size() <= key.size() || line[key.size()] != ' ')
        throw Error("corrupt model file: expected '" + std::string(key) + "' on line " + std::to_string(pos));
      return line.substr(key.size() + 1);
    };
    if (lines.empty() || !lines[0].starts_with(kMagic)) throw Error("not a SIMCLS model file");
    const std::string expected = std::string(kMagic) + " v" + std::to_string(kVersion);
    if (lines[0] != expected)
      throw Error("unsupported model version: '" + std::string(lines[0]) + "' (expected '" + expected + "')");
    pos = 1;
    if (parse_int(next("buckets"), "buckets") != kBuckets) throw Error("corrupt model file: bucket count mismatch");
    HashedLinearModel m;
    m.epochs_ = static_cast<int>(parse_int(next("epochs"), "epochs"));
    m.learning_rate_ = parse_double(next("learning_rate"), "learning_rate");
    m.bias_ = parse_double(next("bias"), "bias");
    const long long nnz = parse_int(next("weights"), "weights");
    if (nnz < 0 || static_cast<size_t>(nnz) > kBuckets) throw Error("corrupt model file: bad weight count");
    for (long long i = 0; i < nnz; ++i) {
      if (pos >= lines.size()) throw Error("corrupt model file: truncated weights");
      auto kv = split(lines[pos++], ' ');
      if (kv.size() != 2) throw Error("corrupt model file: bad weight line " + std::to_string(pos));
      const long long b = parse_int(kv[0], "bucket");
      if (b < 0 || b >= static_cast<long long>(kBuckets)) throw Error("corrupt model file: bucket out of range");
      m.weights_[static_cast<size_t>(b)] = parse_double(kv[1], "weight");
    }
    while (pos < lines.size())
      if (!trim(lines[pos++]).empty()) throw Error("corrupt model file: trailing data");
    return m;
  }

  void save(const std::string& path) const { write_file(path, serialize()); }
  static HashedLinearModel load(const std::string& path) { return deserialize(read_file(path)); }

  // Bucket counts sorted by bucket, so summation order ignores token order.
  static std::vector<std::pair<uint32_t, double>> features(std::string_view text) {
    std::map<uint32_t, double> counts;
    for (auto tok : split_ws(text)) counts[fnv1a32(to_lower(tok)) & (kBuckets - 1)] += 1.0;
    return {counts.begin(), counts.end()};
  }

 private:
  static double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }

  std::vector<double> weights_;
  double bias_ = 0.0;
  int epochs_ = 0;
  double learning_rate_ = 0.0;
};

// Line protocol over a child process: one text per line on its stdin, one
// probability in [0,1] per line on its stdout.
class ExternalScorer {
 public:
  explicit ExternalScorer(const std::string& command) {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0) throw Error("pipe() failed");
    if (pipe(from_child) != 0) {
      close(to_child[0]);
      close(to_child[1]);
      throw Error("pipe() failed");
    }
    pid_ = fork();
    if (pid_ < 0) throw Error("fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    to_ = fdopen(to_child[1], "w");
    from_ = fdopen(from_child[0], "r");
    if (!to_ || !from_) throw Error("fdopen() failed");
  }

  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  ~ExternalScorer() {
    if (to_) fclose(to_);
    if (from_) fclose(from_);
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  double simile_probability(std::string_view text) const {
    if (split_ws(text).empty()) throw Error("cannot classify empty text");
    std::string line(text);
    std::replace(line.begin(), line.end(), '\n', ' ');
    std::lock_guard lock(mu_);
    // A dead child would raise SIGPIPE on write; report it as an error instead.
    auto old = signal(SIGPIPE, SIG_IGN);
    const bool wrote = fputs(line.c_str(), to_) >= 0 && fputc('\n', to_) != EOF && fflush(to_) == 0;
    signal(SIGPIPE, old);
    if (!wrote) throw Error("external scorer: write failed");
    std::string reply;
    int ch;
    while ((ch = fgetc(from_)) != EOF && ch != '\n') reply.push_back(static_cast<char>(ch));
    if (ch == EOF && reply.empty()) throw Error("external scorer: process closed its output");
    const double p = parse_double(reply, "external scorer reply");
    if (!(p >= 0.0 && p <= 1.0)) throw Error("external scorer: probability out of range: " + reply);
    return p;
  }

 private:
  pid_t pid_ = -1;
  FILE* to_ = nullptr;
  FILE* from_ = nullptr;
  mutable std::mutex mu_;
};

}  // namespace simkb
