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

// Probabilistic simile knowledge base.
//
// Instances (t, p, v, score) aggregate into triplets. Each triplet keeps its
// instance scores, so frequency and plausibility can be recomputed and
// shards merged exactly:
//
//   N(t,p,v)   = number of supporting instances
//   P(t,p,v)   = 1 - prod_i (1 - S_i)                      (noisy-or)
//   T(p|t,v)   = N*P / sum_{(t,p',v) in G(t,v)} N'*P'
//   T(t,v|p)   = N*P / sum_{(t',p,v') in G(p)}  N'*P'

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "simkb/common.hpp"
#include "simkb/property_scoring.hpp"

namespace simkb {

// Products of up to this many factors are taken directly; longer lists are
// accumulated in log space.
inline constexpr size_t kDirectProductLimit = 64;

inline double plausibility(std::span<const double> scores) {
  if (scores.empty()) throw Error("plausibility of an empty score list");
  for (double s : scores)
    if (!(s >= 0.0 && s <= 1.0)) throw Error("instance score out of [0,1]: " + format_double(s));
  if (scores.size() <= kDirectProductLimit) {
    double q = 1.0;
    for (double s : scores) q *= 1.0 - s;
    return 1.0 - q;
  }
  double log_q = 0.0;
  for (double s : scores) {
    if (s == 1.0) return 1.0;
    log_q += std::log1p(-s);
  }
  return -std::expm1(log_q);
}

struct SimileTriplet {
  std::string topic;
  std::string property;
  std::string vehicle;
  std::vector<double> instance_scores;  // ascending
  double plausibility = 0.0;
  double typ_p_given_tv = 0.0;
  double typ_tv_given_p = 0.0;

  size_t frequency() const { return instance_scores.size(); }
  double weight() const { return static_cast<double>(frequency()) * plausibility; }

  bool operator==(const SimileTriplet&) const = default;
};

class KnowledgeBase {
 public:
  static constexpr std::string_view kFormat = "simkb";
  static constexpr int kVersion = 1;

  KnowledgeBase() = default;

  // Takes ownership of triplets, merging duplicates by normalized key.
  explicit KnowledgeBase(std::vector<SimileTriplet> triplets) {
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> acc;
    for (auto& t : triplets) {
      auto& s = acc[{normalize_term(t.topic), normalize_term(t.property), normalize_term(t.vehicle)}];
      s.insert(s.end(), t.instance_scores.begin(), t.instance_scores.end());
    }
    for (auto& [key, scores] : acc) {
      SimileTriplet t;
      std::tie(t.topic, t.property, t.vehicle) = key;
      t.instance_scores = std::move(scores);
      std::sort(t.instance_scores.begin(), t.instance_scores.end());
      t.plausibility = simkb::plausibility(t.instance_scores);
      triplets_.push_back(std::move(t));
    }
    build_indexes();
  }

  static KnowledgeBase aggregate(std::span<const SimileInstance> instances) {
    std::vector<SimileTriplet> ts;
    ts.reserve(instances.size());
    for (const auto& i : instances) ts.push_back({i.topic, i.property, i.vehicle, {i.score}});
    return KnowledgeBase(std::move(ts));
  }

  // Associative merge of two unfinalized shards.
  static KnowledgeBase merge(const KnowledgeBase& a, const KnowledgeBase& b) {
    std::vector<SimileTriplet> ts(a.triplets_);
    ts.insert(ts.end(), b.triplets_.begin(), b.triplets_.end());
    for (auto& t : ts) t.typ_p_given_tv = t.typ_tv_given_p = 0.0;
    KnowledgeBase kb(std::move(ts));
    kb.config_hash_ = a.config_hash_;
    return kb;
  }

  // Computes both typicalities. Groups whose N*P mass is zero get typicality
  // 0 and a warning; warnings come back sorted.
  std::vector<std::string> finalize() {
    std::vector<std::string> warnings;
    auto normalize_groups = [&](const auto& index, double SimileTriplet::*field, std::string_view what) {
      for (const auto& [key, members] : index) {
        double total = 0.0;
        for (size_t i : members) total += triplets_[i].weight();
        if (!(total > 0.0)) {
          warnings.push_back("degenerate " + std::string(what) + " group '" + printable(key) + "'");
          for (size_t i : members) triplets_[i].*field = 0.0;
          continue;
        }
        for (size_t i : members) triplets_[i].*field = triplets_[i].weight() / total;
      }
    };
    normalize_groups(by_tv_, &SimileTriplet::typ_p_given_tv, "(t,v)");
    normalize_groups(by_p_, &SimileTriplet::typ_tv_given_p, "p");
    finalized_ = true;
    std::sort(warnings.begin(), warnings.end());
    return warnings;
  }

  bool finalized() const { return finalized_; }
  std::span<const SimileTriplet> triplets() const { return triplets_; }
  size_t size() const { return triplets_.size(); }
  size_t instance_count() const {
    size_t n = 0;
    for (const auto& t : triplets_) n += t.frequency();
    return n;
  }

  const std::string& config_hash() const { return config_hash_; }
  void set_config_hash(std::string h) { config_hash_ = std::move(h); }

  std::vector<const SimileTriplet*> query_tv(std::string_view t, std::string_view v) const {
    return lookup(by_tv_, key2(normalize_term(t), normalize_term(v)));
  }
  std::vector<const SimileTriplet*> query_p(std::string_view p) const { return lookup(by_p_, normalize_term(p)); }
  std::vector<const SimileTriplet*> query_pv(std::string_view p, std::string_view v) const {
    return lookup(by_pv_, key2(normalize_term(p), normalize_term(v)));
  }
  // All triplets with vehicle v, or with property p.
  std::vector<const SimileTriplet*> query_v(std::string_view v) const { return lookup(by_v_, normalize_term(v)); }

  const SimileTriplet* find(std::string_view t, std::string_view p, std::string_view v) const {
    const std::string nt = normalize_term(t), np = normalize_term(p), nv = normalize_term(v);
    auto it = std::lower_bound(triplets_.begin(), triplets_.end(), std::tie(nt, np, nv),
                               [](const SimileTriplet& a, const auto& key) {
                                 return std::tie(a.topic, a.property, a.vehicle) < key;
                               });
    if (it == triplets_.end() || it->topic != nt || it->property != np || it->vehicle != nv) return nullptr;
    return &*it;
  }

  std::string serialize() const {
    std::string out;
    nlohmann::ordered_json header = {{"format", kFormat},
                                     {"version", kVersion},
                                     {"finalized", finalized_},
                                     {"triplets", triplets_.size()},
                                     {"instances", instance_count()},
                                     {"config_hash", config_hash_}};
    out += header.dump() + '\n';
    for (const auto& t : triplets_) {
      nlohmann::ordered_json j = {{"t", t.topic},
                                  {"p", t.property},
                                  {"v", t.vehicle},
                                  {"n", t.frequency()},
                                  {"scores", t.instance_scores},
                                  {"plausibility", t.plausibility},
                                  {"typ_p_given_tv", t.typ_p_given_tv},
                                  {"typ_tv_given_p", t.typ_tv_given_p}};
      out += j.dump() + '\n';
    }
    return out;
  }

  static KnowledgeBase deserialize(std::string_view data) {
    auto lines = split(data, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw Error("corrupt KB file: missing header");
    KnowledgeBase kb;
    try {
      auto h = nlohmann::json::parse(lines[0]);
      if (!h.is_object() || h.value("format", "") != kFormat) throw Error("not a simkb KB file");
      if (h.at("version").get<int>() != kVersion)
        throw Error("unsupported KB version " + h.at("version").dump() + " (expected " + std::to_string(kVersion) +
                    ")");
      kb.finalized_ = h.at("finalized").get<bool>();
      kb.config_hash_ = h.value("config_hash", "");
      const size_t expected = h.at("triplets").get<size_t>();
      if (expected != lines.size() - 1)
        throw Error("corrupt KB file: header announces " + std::to_string(expected) + " triplets, found " +
                    std::to_string(lines.size() - 1));
      for (size_t i = 1; i < lines.size(); ++i) {
        auto j = nlohmann::json::parse(lines[i]);
        SimileTriplet t;
        t.topic = j.at("t").get<std::string>();
        t.property = j.at("p").get<std::string>();
        t.vehicle = j.at("v").get<std::string>();
        t.instance_scores = j.at("scores").get<std::vector<double>>();
        if (j.at("n").get<size_t>() != t.instance_scores.size())
          throw Error("corrupt KB file: frequency does not match score count on line " + std::to_string(i + 1));
        t.plausibility = j.at("plausibility").get<double>();
        t.typ_p_given_tv = j.at("typ_p_given_tv").get<double>();
        t.typ_tv_given_p = j.at("typ_tv_given_p").get<double>();
        if (!kb.triplets_.empty() && std::tie(kb.triplets_.back().topic, kb.triplets_.back().property,
                                              kb.triplets_.back().vehicle) >= std::tie(t.topic, t.property, t.vehicle))
          throw Error("corrupt KB file: records not sorted at line " + std::to_string(i + 1));
        kb.triplets_.push_back(std::move(t));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("corrupt KB file: ") + e.what());
    }
    kb.build_indexes();
    return kb;
  }

  void save(const std::string& path) const { write_file(path, serialize()); }
  static KnowledgeBase load(const std::string& path) { return deserialize(read_file(path)); }

 private:
  using Index = std::unordered_map<std::string, std::vector<size_t>>;

  static std::string key2(const std::string& a, const std::string& b) { return a + '\x1f' + b; }
  static std::string printable(std::string s) {
    std::replace(s.begin(), s.end(), '\x1f', '|');
    return s;
  }

  std::vector<const SimileTriplet*> lookup(const Index& idx, const std::string& key) const {
    std::vector<const SimileTriplet*> out;
    auto it = idx.find(key);
    if (it == idx.end()) return out;
    for (size_t i : it->second) out.push_back(&triplets_[i]);
    return out;
  }

  void build_indexes() {
    by_tv_.clear();
    by_p_.clear();
    by_pv_.clear();
    by_v_.clear();
    for (size_t i = 0; i < triplets_.size(); ++i) {
      const auto& t = triplets_[i];
      by_tv_[key2(t.topic, t.vehicle)].push_back(i);
      by_p_[t.property].push_back(i);
      by_pv_[key2(t.property, t.vehicle)].push_back(i);
      by_v_[t.vehicle].push_back(i);
    }
  }

  std::vector<SimileTriplet> triplets_;  // sorted by (t, p, v)
  Index by_tv_, by_p_, by_pv_, by_v_;
  bool finalized_ = false;
  std::string config_hash_;
};

}  // namespace simkb
