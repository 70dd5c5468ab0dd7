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

// Two-view co-training for simile detection.
//
// Iteration 0 trains both view classifiers on the labeled like-view seed set.
// Every iteration samples a fraction of each unlabeled pool (without
// replacement across iterations), lets each view's classifier label the
// other view's sample, keeps confident positives and all predicted
// negatives, balances negatives down to the positive count, and grows the
// labeled sets. After the last iteration the final classifiers label the
// complete opposite-view pools.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simkb/common.hpp"
#include "simkb/text_classifier.hpp"

namespace simkb {

struct CotrainConfig {
  int iterations = 5;
  double sample_ratio_like = 0.001;
  double sample_ratio_be = 0.0001;
  double threshold_like = 0.9;
  double threshold_be = 0.9;
  uint64_t seed = 0;

  void validate() const {
    if (iterations < 0) throw Error("iterations must be >= 0");
    for (double a : {sample_ratio_like, sample_ratio_be})
      if (!(a > 0.0 && a <= 1.0)) throw Error("sample ratio must lie in (0, 1]");
    for (double t : {threshold_like, threshold_be})
      if (!(t >= 0.5 && t <= 1.0)) throw Error("threshold must lie in [0.5, 1]");
  }
};

enum class CotrainMode {
  cotraining,
  self_training,  // like view only: M_like labels its own samples
};

struct UnlabeledItem {
  std::string id;
  std::string text;
};

// floor(alpha * total) indices drawn without replacement from `remaining`,
// capped at its size. Deterministic in (seed, iteration); returned sorted.
inline std::vector<size_t> sample_unlabeled(std::span<const size_t> remaining, size_t total, double alpha,
                                            uint64_t seed, int iteration) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("sample ratio must lie in (0, 1]");
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  const auto want = static_cast<size_t>(std::floor(alpha * static_cast<double>(total) + 1e-9));
  const size_t count = std::min(want, remaining.size());
  std::vector<size_t> pool(remaining.begin(), remaining.end());
  std::mt19937_64 rng(derive_seed(seed, "sample", static_cast<uint64_t>(iteration)));
  for (size_t i = 0; i < count; ++i) {
    size_t j = i + static_cast<size_t>(bounded(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct PseudoLabel {
  size_t index = 0;  // into the unlabeled pool
  Label label = Label::literal;
  double simile_probability = 0.0;
};

// Confident positives (p > threshold) and predicted negatives (p <= 0.5);
// positives in (0.5, threshold] are dropped.
template <SimileScorer M>
std::vector<PseudoLabel> pseudo_label(const M& model, std::span<const UnlabeledItem> pool,
                                      std::span<const size_t> subset, double threshold, unsigned jobs = 1) {
  auto probs = parallel_map(subset.size(), jobs,
                            [&](size_t i) { return model.simile_probability(pool[subset[i]].text); });
  std::vector<PseudoLabel> out;
  for (size_t i = 0; i < subset.size(); ++i) {
    const double p = probs[i];
    if (p > threshold)
      out.push_back({subset[i], Label::simile, p});
    else if (p <= 0.5)
      out.push_back({subset[i], Label::literal, p});
  }
  return out;
}

struct BalanceResult {
  std::vector<PseudoLabel> items;
  bool negatives_scarce = false;  // fewer negatives than positives; all kept
};

// Down-samples negatives uniformly to the positive count. Input order is
// preserved among the survivors.
inline BalanceResult balance(std::span<const PseudoLabel> labeled, uint64_t seed) {
  std::vector<size_t> neg;
  size_t pos = 0;
  for (size_t i = 0; i < labeled.size(); ++i) {
    if (labeled[i].label == Label::simile)
      ++pos;
    else
      neg.push_back(i);
  }
  BalanceResult r;
  r.negatives_scarce = neg.size() < pos;
  std::vector<bool> keep(labeled.size(), true);
  if (neg.size() > pos) {
    deterministic_shuffle(neg, derive_seed(seed, "balance"));
    for (size_t k = pos; k < neg.size(); ++k) keep[neg[k]] = false;
  }
  for (size_t i = 0; i < labeled.size(); ++i)
    if (keep[i]) r.items.push_back(labeled[i]);
  return r;
}

struct IterationAudit {
  int iteration = 0;
  size_t sampled_like = 0;
  size_t sampled_be = 0;
  size_t pseudo_pos_like = 0, pseudo_neg_like = 0;
  size_t pseudo_pos_be = 0, pseudo_neg_be = 0;
  size_t balanced_like = 0, balanced_be = 0;
  bool negatives_scarce_like = false;
  bool negatives_scarce_be = false;
  bool be_model_carried = false;  // L_be lacked a class; previous M_be kept
  size_t labeled_like = 0;        // |L_like| after the update
  size_t labeled_be = 0;          // |L_be| after the update
};

template <class Model>
struct CotrainResult {
  std::vector<std::string> simile_like;  // ids from U_like labeled simile
  std::vector<std::string> simile_be;    // ids from U_be labeled simile
  Model model_like;
  Model model_be;
  std::vector<IterationAudit> audit;
};

inline bool has_both_labels(std::span<const LabeledExample> xs) {
  bool pos = false, neg = false;
  for (const auto& x : xs) (x.label == Label::simile ? pos : neg) = true;
  return pos && neg;
}

struct DefaultTrainer {
  HashedLinearModel operator()(std::span<const LabeledExample> xs, uint64_t seed) const {
    return HashedLinearModel::train(xs, seed);
  }
};

namespace detail {

inline std::vector<size_t> all_indices(size_t n) {
  std::vector<size_t> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

inline void remove_consumed(std::vector<size_t>& remaining, std::span<const size_t> taken) {
  std::vector<size_t> out;
  std::set_difference(remaining.begin(), remaining.end(), taken.begin(), taken.end(), std::back_inserter(out));
  remaining = std::move(out);
}

template <SimileScorer M>
std::vector<std::string> label_all(const M& model, std::span<const UnlabeledItem> pool, double threshold,
                                   unsigned jobs) {
  auto probs = parallel_map(pool.size(), jobs, [&](size_t i) { return model.simile_probability(pool[i].text); });
  std::vector<std::string> ids;
  for (size_t i = 0; i < pool.size(); ++i)
    if (probs[i] > threshold) ids.push_back(pool[i].id);
  return ids;
}

}  // namespace detail

// Thresholds belong to the labeling model's view: M_like's positives must
// exceed threshold_like, M_be's threshold_be. The final labeling pass uses the
// same rule.
template <class Trainer = DefaultTrainer>
auto run_cotraining(std::span<const LabeledExample> seed_like, std::span<const UnlabeledItem> u_like,
                    std::span<const UnlabeledItem> u_be, const CotrainConfig& cfg, Trainer trainer = {},
                    CotrainMode mode = CotrainMode::cotraining, unsigned jobs = 1) {
  using Model = decltype(trainer(seed_like, uint64_t{}));
  cfg.validate();
  const bool cotrain = mode == CotrainMode::cotraining;
  if (u_like.empty()) throw Error("unlabeled like-view set is empty");
  if (cotrain && u_be.empty()) throw Error("unlabeled be-view set is empty");

  std::vector<LabeledExample> l_like(seed_like.begin(), seed_like.end());
  std::vector<LabeledExample> l_be;
  std::vector<size_t> rem_like = detail::all_indices(u_like.size());
  std::vector<size_t> rem_be = detail::all_indices(u_be.size());

  if (!has_both_labels(l_like))
    throw Error("degenerate training data at iteration 0: labeled set needs both labels");
  std::optional<Model> m_like, m_be;
  std::vector<IterationAudit> audit;

  for (int i = 0; i <= cfg.iterations; ++i) {
    IterationAudit a;
    a.iteration = i;
    if (!has_both_labels(l_like))
      throw Error("degenerate training data at iteration " + std::to_string(i));
    m_like.emplace(trainer(l_like, derive_seed(cfg.seed, "train-like", static_cast<uint64_t>(i))));
    if (cotrain) {
      if (i == 0) {
        m_be.emplace(trainer(l_like, derive_seed(cfg.seed, "train-be", 0)));
      } else if (has_both_labels(l_be)) {
        m_be.emplace(trainer(l_be, derive_seed(cfg.seed, "train-be", static_cast<uint64_t>(i))));
      } else {
        a.be_model_carried = true;
      }
    }
    // The last round only trains; its models are the final ones.
    if (i == cfg.iterations) {
      a.labeled_like = l_like.size();
      a.labeled_be = l_be.size();
      audit.push_back(a);
      break;
    }

    auto s_like = sample_unlabeled(rem_like, u_like.size(), cfg.sample_ratio_like,
                                   derive_seed(cfg.seed, "like"), i);
    detail::remove_consumed(rem_like, s_like);
    a.sampled_like = s_like.size();

    auto append = [&](std::vector<LabeledExample>& dst, std::span<const UnlabeledItem> pool,
                      const std::vector<PseudoLabel>& labels, std::string_view stream, size_t& pos_count,
                      size_t& neg_count, size_t& balanced, bool& scarce) {
      for (const auto& l : labels) (l.label == Label::simile ? pos_count : neg_count) += 1;
      auto b = balance(labels, derive_seed(cfg.seed, stream, static_cast<uint64_t>(i)));
      balanced = b.items.size();
      scarce = b.negatives_scarce;
      for (const auto& l : b.items) dst.push_back({pool[l.index].text, l.label});
    };

    if (cotrain) {
      auto s_be = sample_unlabeled(rem_be, u_be.size(), cfg.sample_ratio_be, derive_seed(cfg.seed, "be"), i);
      detail::remove_consumed(rem_be, s_be);
      a.sampled_be = s_be.size();
      auto lab_be = pseudo_label(*m_like, u_be, s_be, cfg.threshold_like, jobs);
      auto lab_like = pseudo_label(*m_be, u_like, s_like, cfg.threshold_be, jobs);
      append(l_like, u_like, lab_like, "balance-like", a.pseudo_pos_like, a.pseudo_neg_like, a.balanced_like,
             a.negatives_scarce_like);
      append(l_be, u_be, lab_be, "balance-be", a.pseudo_pos_be, a.pseudo_neg_be, a.balanced_be,
             a.negatives_scarce_be);
    } else {
      auto lab_like = pseudo_label(*m_like, u_like, s_like, cfg.threshold_like, jobs);
      append(l_like, u_like, lab_like, "balance-like", a.pseudo_pos_like, a.pseudo_neg_like, a.balanced_like,
             a.negatives_scarce_like);
    }
    a.labeled_like = l_like.size();
    a.labeled_be = l_be.size();
    audit.push_back(a);
  }

  CotrainResult<Model> r{{}, {}, std::move(*m_like), cotrain ? std::move(*m_be) : Model{}, std::move(audit)};
  if (cotrain) {
    r.simile_be = detail::label_all(r.model_like, u_be, cfg.threshold_like, jobs);
    r.simile_like = detail::label_all(r.model_be, u_like, cfg.threshold_be, jobs);
  } else {
    r.simile_like = detail::label_all(r.model_like, u_like, cfg.threshold_like, jobs);
  }
  return r;
}

}  // namespace simkb
