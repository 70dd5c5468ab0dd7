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

// Evaluation metrics and knowledge-base statistics.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "simkb/common.hpp"
#include "simkb/kb_store.hpp"

namespace simkb {

// ---------------------------------------------------------------- ranking

struct RankingCase {
  std::vector<std::string> gold;
  std::vector<std::string> ranking;
  std::optional<double> frequency;  // dataset annotation count, when known
};

// 1-based rank of the first gold answer in the ranking, if any.
inline std::optional<size_t> first_hit(const RankingCase& c) {
  for (size_t i = 0; i < c.ranking.size(); ++i)
    if (std::find(c.gold.begin(), c.gold.end(), c.ranking[i]) != c.gold.end()) return i + 1;
  return std::nullopt;
}

inline double mrr(std::span<const RankingCase> cases) {
  if (cases.empty()) throw Error("MRR over zero cases");
  double s = 0.0;
  for (const auto& c : cases)
    if (auto r = first_hit(c)) s += 1.0 / static_cast<double>(*r);
  return s / static_cast<double>(cases.size());
}

inline double recall_at_k(std::span<const RankingCase> cases, size_t k) {
  if (k < 1) throw Error("recall@k needs k >= 1");
  if (cases.empty()) throw Error("recall@k over zero cases");
  size_t hits = 0;
  for (const auto& c : cases)
    if (auto r = first_hit(c); r && *r <= k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(cases.size());
}

// Keeps cases whose frequency is larger than `min_exclusive`; cases without
// a frequency are kept.
inline std::vector<RankingCase> filter_by_frequency(std::span<const RankingCase> cases, double min_exclusive) {
  std::vector<RankingCase> out;
  for (const auto& c : cases)
    if (!c.frequency || *c.frequency > min_exclusive) out.push_back(c);
  return out;
}

// {"gold": [...], "ranking": [...], "frequency": n?}
inline RankingCase parse_ranking_case(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    RankingCase c;
    c.gold = j.at("gold").get<std::vector<std::string>>();
    c.ranking = j.value("ranking", std::vector<std::string>{});
    if (j.contains("frequency")) c.frequency = j.at("frequency").get<double>();
    if (c.gold.empty()) throw Error("ranking case has no gold answers");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed ranking case: ") + e.what());
  }
}

// ---------------------------------------------------------------- BLEU

struct NgramStats {
  std::array<double, 4> matched{};  // clipped matches per order
  std::array<double, 4> total{};    // candidate n-grams per order
  double cand_len = 0.0;
  double ref_len = 0.0;

  NgramStats& operator+=(const NgramStats& o) {
    for (size_t i = 0; i < 4; ++i) {
      matched[i] += o.matched[i];
      total[i] += o.total[i];
    }
    cand_len += o.cand_len;
    ref_len += o.ref_len;
    return *this;
  }
};

inline NgramStats ngram_stats(std::span<const std::string> cand, std::span<const std::string> ref, int n) {
  NgramStats s;
  s.cand_len = static_cast<double>(cand.size());
  s.ref_len = static_cast<double>(ref.size());
  for (int order = 1; order <= n; ++order) {
    std::map<std::vector<std::string>, int> ref_counts, cand_counts;
    const size_t o = static_cast<size_t>(order);
    for (size_t i = 0; i + o <= ref.size(); ++i) ++ref_counts[{ref.begin() + i, ref.begin() + i + o}];
    for (size_t i = 0; i + o <= cand.size(); ++i) ++cand_counts[{cand.begin() + i, cand.begin() + i + o}];
    for (const auto& [g, c] : cand_counts) {
      auto it = ref_counts.find(g);
      s.matched[o - 1] += std::min(c, it == ref_counts.end() ? 0 : it->second);
      s.total[o - 1] += c;
    }
  }
  return s;
}

// Uniformly weighted geometric mean of modified precisions with brevity
// penalty, no smoothing. Orders for which the candidate has no n-grams at
// all are left out of the mean.
inline double bleu_from_stats(const NgramStats& s, int n) {
  if (s.cand_len == 0.0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int i = 0; i < n; ++i) {
    if (s.total[i] == 0.0) continue;
    if (s.matched[i] == 0.0) return 0.0;
    log_sum += std::log(s.matched[i] / s.total[i]);
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double bp = s.cand_len > s.ref_len ? 1.0 : std::exp(1.0 - s.ref_len / s.cand_len);
  return bp * std::exp(log_sum / orders);
}

inline double bleu_n(std::span<const std::string> candidate, std::span<const std::string> reference, int n) {
  if (n < 1 || n > 4) throw Error("BLEU order must be in 1..4");
  return bleu_from_stats(ngram_stats(candidate, reference, n), n);
}

inline double corpus_bleu(std::span<const std::pair<std::vector<std::string>, std::vector<std::string>>> pairs,
                          int n) {
  if (n < 1 || n > 4) throw Error("BLEU order must be in 1..4");
  NgramStats s;
  for (const auto& [c, r] : pairs) s += ngram_stats(c, r, n);
  return bleu_from_stats(s, n);
}

// ---------------------------------------------------------------- misc

inline double avg_length(std::span<const std::string> vehicles) {
  if (vehicles.empty()) return 0.0;
  double total = 0.0;
  for (const auto& v : vehicles) total += static_cast<double>(word_count(v));
  return total / static_cast<double>(vehicles.size());
}

struct PRF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool zero_division = false;  // some ratio had a zero denominator and was set to 0
};

inline PRF1 prf1(size_t tp, size_t fp, size_t fn) {
  PRF1 r;
  const double t = static_cast<double>(tp);
  if (tp + fp > 0) r.precision = t / static_cast<double>(tp + fp); else r.zero_division = true;
  if (tp + fn > 0) r.recall = t / static_cast<double>(tp + fn); else r.zero_division = true;
  if (r.precision + r.recall > 0.0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  else
    r.zero_division = true;
  return r;
}

// ---------------------------------------------------------------- KB stats

// Histogram: (t,v) pair frequency (sum of N over the pair's triplets) ->
// number of pairs.
inline std::map<size_t, size_t> freq_distribution(const KnowledgeBase& kb) {
  std::map<std::pair<std::string, std::string>, size_t> pairs;
  for (const auto& t : kb.triplets()) pairs[{t.topic, t.vehicle}] += t.frequency();
  std::map<size_t, size_t> hist;
  for (const auto& [_, n] : pairs) ++hist[n];
  return hist;
}

inline std::string histogram_csv(const std::map<size_t, size_t>& hist) {
  std::string out = "frequency,pairs\n";
  for (const auto& [f, c] : hist) out += std::to_string(f) + ',' + std::to_string(c) + '\n';
  return out;
}

inline constexpr std::array<std::string_view, 10> kDomains = {
    "person",           "animal",  "body part", "food",     "natural object",
    "natural phenomenon", "feeling", "artifact",  "location", "action"};

inline bool is_domain(std::string_view s) {
  return std::find(kDomains.begin(), kDomains.end(), s) != kDomains.end();
}

// term -> hypernym paths, in synset priority order.
class Taxonomy {
 public:
  void add(std::string_view term, std::vector<std::string> path) {
    for (auto& h : path) h = normalize_term(h);
    paths_[normalize_term(term)].push_back(std::move(path));
  }

  // `term<TAB>hypernym1>hypernym2>...`, one path per line.
  static Taxonomy load(const std::string& path) {
    Taxonomy t;
    size_t n = 0;
    for (const auto& line : read_lines(path)) {
      ++n;
      if (trim(line).empty() || line.starts_with("#")) continue;
      auto f = split(line, '\t');
      if (f.size() != 2) throw Error(path + ":" + std::to_string(n) + ": expected term<TAB>path");
      std::vector<std::string> hyper;
      for (auto h : split(f[1], '>'))
        if (!trim(h).empty()) hyper.emplace_back(trim(h));
      t.add(f[0], std::move(hyper));
    }
    return t;
  }

  const std::vector<std::vector<std::string>>* paths(std::string_view word) const {
    auto it = paths_.find(std::string(word));
    return it == paths_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> paths_;
};

namespace detail {

inline std::vector<std::string> lookup_forms(const std::string& w) {
  std::vector<std::string> forms{w};
  auto ends = [&](std::string_view s) { return w.size() > s.size() && std::string_view(w).ends_with(s); };
  if (ends("ies")) forms.push_back(w.substr(0, w.size() - 3) + "y");
  if (ends("es")) forms.push_back(w.substr(0, w.size() - 2));
  if (ends("s") && !ends("ss")) forms.push_back(w.substr(0, w.size() - 1));
  return forms;
}

}  // namespace detail

// The rightmost word of the term known to the taxonomy is its head noun; the
// domain is the first of the ten domains met along its paths in order.
inline std::optional<std::string> assign_domain(std::string_view term, const Taxonomy& tax) {
  const std::string norm = normalize_term(term);
  if (is_domain(norm)) return norm;
  auto words = split_ws(norm);
  std::vector<std::string> heads{norm};
  for (auto it = words.rbegin(); it != words.rend(); ++it) heads.emplace_back(*it);
  for (const auto& head : heads) {
    for (const auto& form : detail::lookup_forms(head)) {
      const auto* ps = tax.paths(form);
      if (!ps) continue;
      for (const auto& p : *ps)
        for (const auto& h : p)
          if (is_domain(h)) return h;
      return std::nullopt;  // known word outside the ten domains
    }
  }
  return std::nullopt;
}

struct DomainTable {
  std::map<std::pair<std::string, std::string>, double> cells;  // (topic domain, vehicle domain) -> %
  std::map<std::string, double> topic_share;                    // %
  std::map<std::string, double> vehicle_share;                  // %
  double total_weight = 0.0;
  size_t assigned_triplets = 0;
  std::vector<std::string> warnings;
};

// Frequency-weighted percentages over triplets whose topic and vehicle both
// map to a domain.
inline DomainTable domain_mapping_table(const KnowledgeBase& kb, const Taxonomy& tax) {
  DomainTable d;
  std::map<std::pair<std::string, std::string>, double> w;
  std::map<std::string, double> tw, vw;
  for (const auto& t : kb.triplets()) {
    auto dt = assign_domain(t.topic, tax);
    auto dv = assign_domain(t.vehicle, tax);
    if (!dt || !dv) continue;
    const double n = static_cast<double>(t.frequency());
    w[{*dt, *dv}] += n;
    tw[*dt] += n;
    vw[*dv] += n;
    d.total_weight += n;
    ++d.assigned_triplets;
  }
  if (d.total_weight == 0.0) {
    d.warnings.push_back("no triplet has both topic and vehicle assigned to a domain");
    return d;
  }
  for (const auto& [k, x] : w) d.cells[k] = 100.0 * x / d.total_weight;
  for (const auto& [k, x] : tw) d.topic_share[k] = 100.0 * x / d.total_weight;
  for (const auto& [k, x] : vw) d.vehicle_share[k] = 100.0 * x / d.total_weight;
  return d;
}

inline std::string domain_table_csv(const DomainTable& d) {
  std::string out = "topic_domain,vehicle_domain,percent\n";
  for (const auto& [k, p] : d.cells) out += k.first + ',' + k.second + ',' + format_double(p) + '\n';
  return out;
}

}  // namespace simkb
