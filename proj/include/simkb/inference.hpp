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

// Ranking rules over a finalized knowledge base. The query topic never
// enters a score: every rule sums over all topics t' attested with (p, v).
//
//   interpretation  S_(t,v)(p) = sum_{(t',p,v)} T(p|t',v) * N * P
//   generation      S_(t,p)(v) = sum_{(t',p,v)} T(t',v|p) * N * P
//   polishment      S'_p(v)    = sum_{(t',p,v)} T(t',v|p) * N * P * e^(gamma * l(v))
//
// with l(v) the number of words in v.

#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simkb/common.hpp"
#include "simkb/kb_store.hpp"

namespace simkb {

struct Contribution {
  std::string topic;
  size_t frequency = 0;
  double plausibility = 0.0;
  double typicality = 0.0;
  double term = 0.0;
};

struct RankedAnswer {
  std::string answer;
  double score = 0.0;
  std::vector<Contribution> contributions;
};

namespace detail {

inline void require_finalized(const KnowledgeBase& kb) {
  if (!kb.finalized()) throw Error("knowledge base is not finalized; run 'kb finalize' first");
}

inline double group_sum(const std::vector<const SimileTriplet*>& group, double SimileTriplet::*typ,
                        std::vector<Contribution>* contribs = nullptr) {
  double s = 0.0;
  for (const SimileTriplet* t : group) {
    const double term = t->*typ * t->weight();
    s += term;
    if (contribs) contribs->push_back({t->topic, t->frequency(), t->plausibility, t->*typ, term});
  }
  return s;
}

inline void rank(std::vector<RankedAnswer>& xs, size_t k) {
  std::sort(xs.begin(), xs.end(), [](const RankedAnswer& a, const RankedAnswer& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.answer < b.answer;
  });
  if (xs.size() > k) xs.resize(k);
}

}  // namespace detail

inline double score_property(const KnowledgeBase& kb, std::string_view /*topic*/, std::string_view vehicle,
                             std::string_view property) {
  detail::require_finalized(kb);
  return detail::group_sum(kb.query_pv(property, vehicle), &SimileTriplet::typ_p_given_tv);
}

inline double score_vehicle(const KnowledgeBase& kb, std::string_view /*topic*/, std::string_view property,
                            std::string_view vehicle) {
  detail::require_finalized(kb);
  return detail::group_sum(kb.query_pv(property, vehicle), &SimileTriplet::typ_tv_given_p);
}

// Candidates: every property attested with `vehicle`.
inline std::vector<RankedAnswer> interpret(const KnowledgeBase& kb, std::string_view topic, std::string_view vehicle,
                                           size_t k) {
  detail::require_finalized(kb);
  if (k < 1) throw Error("k must be >= 1");
  (void)topic;
  std::set<std::string> props;
  for (const auto* t : kb.query_v(vehicle)) props.insert(t->property);
  std::vector<RankedAnswer> out;
  for (const auto& p : props) {
    RankedAnswer a{p, 0.0, {}};
    a.score = detail::group_sum(kb.query_pv(p, vehicle), &SimileTriplet::typ_p_given_tv, &a.contributions);
    out.push_back(std::move(a));
  }
  detail::rank(out, k);
  return out;
}

// Candidates: every vehicle attested with `property`.
inline std::vector<RankedAnswer> generate_vehicles(const KnowledgeBase& kb, std::string_view topic,
                                                   std::string_view property, size_t k) {
  detail::require_finalized(kb);
  if (k < 1) throw Error("k must be >= 1");
  (void)topic;
  std::set<std::string> vehicles;
  for (const auto* t : kb.query_p(property)) vehicles.insert(t->vehicle);
  std::vector<RankedAnswer> out;
  for (const auto& v : vehicles) {
    RankedAnswer a{v, 0.0, {}};
    a.score = detail::group_sum(kb.query_pv(property, v), &SimileTriplet::typ_tv_given_p, &a.contributions);
    out.push_back(std::move(a));
  }
  detail::rank(out, k);
  return out;
}

// Per-triplet terms T * N * P * e^(gamma * l(v)), each evaluated as
// exp(log(T*N*P) + gamma*l(v)).
inline std::vector<double> polish_terms(const KnowledgeBase& kb, std::string_view property, std::string_view vehicle,
                                        double gamma) {
  detail::require_finalized(kb);
  if (!std::isfinite(gamma)) throw Error("gamma must be finite");
  const double boost = gamma * static_cast<double>(word_count(normalize_term(vehicle)));
  std::vector<double> terms;
  for (const auto* t : kb.query_pv(property, vehicle)) {
    const double base = t->typ_tv_given_p * t->weight();
    terms.push_back(base > 0.0 ? std::exp(std::log(base) + boost) : 0.0);
  }
  return terms;
}

inline double polish_score(const KnowledgeBase& kb, std::string_view property, std::string_view vehicle,
                           double gamma) {
  double s = 0.0;
  for (double x : polish_terms(kb, property, vehicle, gamma)) s += x;
  return s;
}

// log S'_p(v); -inf when the group is empty. Stays finite where S' overflows.
inline double polish_log_score(const KnowledgeBase& kb, std::string_view property, std::string_view vehicle,
                               double gamma) {
  detail::require_finalized(kb);
  if (!std::isfinite(gamma)) throw Error("gamma must be finite");
  const double base = detail::group_sum(kb.query_pv(property, vehicle), &SimileTriplet::typ_tv_given_p);
  if (!(base > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log(base) + gamma * static_cast<double>(word_count(normalize_term(vehicle)));
}

struct PolishConfig {
  double gamma = 2.0;
  size_t k = 5;
};

struct PolishResult {
  std::string property;
  std::vector<std::string> tokens;
  std::vector<RankedAnswer> alternatives;  // score = log S'_p(v)

  std::string sentence() const { return join(tokens, " "); }
};

inline bool is_punctuation_token(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::ispunct(static_cast<unsigned char>(c)); });
}

// Replaces the final adjective/adverb (trailing punctuation is kept) with
// "like" + the vehicle of highest S'_p(v).
inline PolishResult polish_rewrite(const KnowledgeBase& kb, std::span<const std::string> tokens,
                                   const PolishConfig& cfg = {}, std::optional<size_t> property_index = {}) {
  detail::require_finalized(kb);
  if (cfg.k < 1) throw Error("k must be >= 1");
  size_t idx;
  if (property_index) {
    idx = *property_index;
    if (idx >= tokens.size()) throw Error("property index out of range");
  } else {
    size_t end = tokens.size();
    while (end > 0 && is_punctuation_token(tokens[end - 1])) --end;
    if (end == 0) throw Error("sentence has no property word");
    idx = end - 1;
  }
  PolishResult r;
  r.property = normalize_term(tokens[idx]);
  std::set<std::string> vehicles;
  for (const auto* t : kb.query_p(r.property)) vehicles.insert(t->vehicle);
  for (const auto& v : vehicles) {
    const double s = polish_log_score(kb, r.property, v, cfg.gamma);
    if (s > -std::numeric_limits<double>::infinity()) r.alternatives.push_back({v, s, {}});
  }
  if (r.alternatives.empty()) throw Error("property not covered: '" + r.property + "'");
  detail::rank(r.alternatives, cfg.k);
  r.tokens.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(idx));
  r.tokens.push_back("like");
  for (auto w : split_ws(r.alternatives.front().answer)) r.tokens.emplace_back(w);
  r.tokens.insert(r.tokens.end(), tokens.begin() + static_cast<std::ptrdiff_t>(idx) + 1, tokens.end());
  return r;
}

// A generated simile is coherent when it contains "like" and its vehicle has
// no comma and at most seven words.
inline bool coherence_check(std::string_view sentence, std::string_view vehicle) {
  bool has_like = false;
  for (auto w : split_ws(sentence)) has_like |= to_lower(w) == "like";
  return has_like && vehicle.find(',') == std::string_view::npos && word_count(vehicle) <= 7;
}

// Text after the last "like", without trailing punctuation tokens.
inline std::string vehicle_after_like(std::string_view sentence) {
  auto words = split_ws(sentence);
  size_t at = words.size();
  for (size_t i = 0; i < words.size(); ++i)
    if (to_lower(words[i]) == "like") at = i;
  if (at == words.size()) return {};
  size_t end = words.size();
  while (end > at + 1 && is_punctuation_token(words[end - 1])) --end;
  return join(std::vector<std::string_view>(words.begin() + static_cast<std::ptrdiff_t>(at) + 1,
                                            words.begin() + static_cast<std::ptrdiff_t>(end)),
              " ");
}

// Combined polishment: keep an externally generated simile when coherent,
// else fall back to the rule-based rewrite.
inline std::string combine_polish(std::string_view generated, std::string_view rule_based) {
  return coherence_check(generated, vehicle_after_like(generated)) ? std::string(generated)
                                                                   : std::string(rule_based);
}

}  // namespace simkb
