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

// Property generation for extracted similes.
//
// Two providers answer per sentence: a knowledge provider queried with the
// vehicle and a context provider queried with the sentence rewritten as
// "... as [MASK] as ...". Each returns at most ten (property, raw score)
// pairs; raw scores are compressed into [0, 0.5] and a property survives
// when it clears its perspective's threshold in at least one perspective.
// The instance score is the sum of both normalized components.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "simkb/common.hpp"
#include "simkb/component_extract.hpp"

namespace simkb {

enum class Perspective { knowledge, context };

inline std::string_view perspective_name(Perspective p) {
  return p == Perspective::knowledge ? "knowledge" : "context";
}

struct ScoredProperty {
  std::string property;
  double score = 0.0;

  bool operator==(const ScoredProperty&) const = default;
};

inline constexpr size_t kMaxProviderCandidates = 10;

// Sorts by score descending, property ascending; keeps the first ten.
inline void rank_candidates(std::vector<ScoredProperty>& xs) {
  std::stable_sort(xs.begin(), xs.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.property < b.property;
  });
  if (xs.size() > kMaxProviderCandidates) xs.resize(kMaxProviderCandidates);
}

class PropertyProvider {
 public:
  virtual ~PropertyProvider() = default;
  virtual Perspective kind() const = 0;
  // Ranked, at most ten entries, raw scores in [0,1].
  virtual std::vector<ScoredProperty> query(std::string_view input) const = 0;
};

inline std::string mask_sentence(std::span<const std::string> tokens, size_t like_index) {
  if (like_index >= tokens.size()) throw Error("like index out of range");
  if (to_lower(tokens[like_index]) != "like")
    throw Error("token at like index is '" + tokens[like_index] + "', not 'like'");
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += i == like_index ? std::string("as [MASK] as") : tokens[i];
  }
  return out;
}

inline std::string masked_sentence_key(std::string_view masked) { return hex64(fnv1a64(masked)); }

// Lookup-table provider. Knowledge tables are keyed by the normalized
// vehicle; context tables by masked_sentence_key() of the masked sentence.
// Line format: `key<TAB>property<TAB>score`.
class TableProvider final : public PropertyProvider {
 public:
  explicit TableProvider(Perspective kind) : kind_(kind) {}

  static TableProvider load(const std::string& path, Perspective kind) {
    TableProvider p(kind);
    size_t n = 0;
    for (const auto& line : read_lines(path)) {
      ++n;
      if (trim(line).empty()) continue;
      auto f = split(line, '\t');
      if (f.size() != 3) throw Error(path + ":" + std::to_string(n) + ": expected key<TAB>property<TAB>score");
      p.add(f[0], std::string(trim(f[1])), parse_double(f[2], "provider score"));
    }
    return p;
  }

  void add(std::string_view key, std::string property, double score) {
    table_[lookup_key(key)].push_back({std::move(property), score});
  }

  Perspective kind() const override { return kind_; }

  std::vector<ScoredProperty> query(std::string_view input) const override {
    auto it = table_.find(lookup_key(input));
    if (it == table_.end()) return {};
    auto out = it->second;
    rank_candidates(out);
    return out;
  }

 private:
  std::string lookup_key(std::string_view s) const {
    if (kind_ == Perspective::context) {
      // Accept either the precomputed hash or the masked sentence itself.
      const std::string t(trim(s));
      bool is_hash = t.size() == 16 && t.find_first_not_of("0123456789abcdef") == std::string::npos;
      return is_hash ? t : masked_sentence_key(t);
    }
    return normalize_term(s);
  }

  Perspective kind_;
  std::unordered_map<std::string, std::vector<ScoredProperty>> table_;
};

// POSTs {"kind": ..., "input": ...} and expects
// {"candidates": [{"property": ..., "score": ...}, ...]}.
class HttpProvider final : public PropertyProvider {
 public:
  HttpProvider(Perspective kind, std::string base_url, std::string path = "/properties")
      : kind_(kind), base_url_(std::move(base_url)), path_(std::move(path)) {}

  Perspective kind() const override { return kind_; }

  std::vector<ScoredProperty> query(std::string_view input) const override {
    httplib::Client cli(base_url_);
    cli.set_connection_timeout(5);
    cli.set_read_timeout(30);
    nlohmann::json body = {{"kind", perspective_name(kind_)}, {"input", input}};
    auto res = cli.Post(path_, body.dump(), "application/json");
    if (!res) throw Error("property provider unreachable: " + base_url_ + path_);
    if (res->status != 200) throw Error("property provider returned HTTP " + std::to_string(res->status));
    std::vector<ScoredProperty> out;
    try {
      auto j = nlohmann::json::parse(res->body);
      for (const auto& c : j.at("candidates"))
        out.push_back({c.at("property").get<std::string>(), c.at("score").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("malformed provider response: ") + e.what());
    }
    rank_candidates(out);
    return out;
  }

 private:
  Perspective kind_;
  std::string base_url_;
  std::string path_;
};

inline constexpr double kNormalizedMax = 0.5;

// raw * 0.5: order preserving and comparable across sentences.
inline std::vector<ScoredProperty> normalize_scores(std::span<const ScoredProperty> raw) {
  if (raw.size() > kMaxProviderCandidates) throw Error("more than ten provider candidates");
  std::vector<ScoredProperty> out;
  for (const auto& r : raw) {
    if (!(r.score >= 0.0 && r.score <= 1.0))
      throw Error("raw score out of [0,1] for property '" + r.property + "': " + format_double(r.score));
    out.push_back({r.property, r.score * kNormalizedMax});
  }
  return out;
}

struct SelectedProperty {
  std::string property;
  double score = 0.0;  // knowledge + context
  double knowledge = 0.0;
  double context = 0.0;

  bool operator==(const SelectedProperty&) const = default;
};

struct PropertyThresholds {
  double knowledge = 0.3;
  double context = 0.0;
};

// Sorted by property. A property survives if either perspective's normalized
// score is strictly above that perspective's threshold; once it survives,
// both components are summed.
inline std::vector<SelectedProperty> select_properties(std::span<const ScoredProperty> knowledge,
                                                       std::span<const ScoredProperty> context,
                                                       const PropertyThresholds& th = {}) {
  struct Acc {
    double k = 0.0, c = 0.0;
    bool pass = false;
  };
  std::map<std::string, Acc> acc;
  // Duplicates within one list keep their best score.
  for (const auto& k : knowledge) {
    auto& a = acc[k.property];
    a.k = std::max(a.k, k.score);
    a.pass |= k.score > th.knowledge;
  }
  for (const auto& c : context) {
    auto& a = acc[c.property];
    a.c = std::max(a.c, c.score);
    a.pass |= c.score > th.context;
  }
  std::vector<SelectedProperty> out;
  for (const auto& [p, a] : acc)
    if (a.pass && a.k + a.c > 0.0) out.push_back({p, a.k + a.c, a.k, a.c});
  return out;
}

struct SimileInstance {
  std::string sentence_id;
  std::string topic;
  std::string property;
  std::string vehicle;
  double score = 0.0;
  double knowledge = 0.0;
  double context = 0.0;

  bool operator==(const SimileInstance&) const = default;
};

inline std::string format_instance(const SimileInstance& s) {
  return s.sentence_id + '\t' + s.topic + '\t' + s.property + '\t' + s.vehicle + '\t' + format_double(s.score) +
         '\t' + format_double(s.knowledge) + '\t' + format_double(s.context);
}

inline SimileInstance parse_instance(std::string_view line) {
  auto f = split(line, '\t');
  if (f.size() != 7) throw Error("instance record needs 7 fields");
  SimileInstance s{std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]),
                   parse_double(f[4], "score"), parse_double(f[5], "knowledge"), parse_double(f[6], "context")};
  if (!(s.score >= 0.0 && s.score <= 1.0)) throw Error("instance score out of [0,1]");
  return s;
}

// One extracted simile ready for property generation.
struct PropertyQuery {
  std::string sentence_id;
  std::string topic;
  std::string vehicle;
  std::vector<std::string> tokens;
  size_t like_index = 0;
};

struct InstanceBuild {
  std::vector<SimileInstance> instances;
  std::vector<std::string> diagnostics;  // skipped records
};

inline InstanceBuild build_instances(std::span<const PropertyQuery> queries, const PropertyProvider& knowledge,
                                     const PropertyProvider& context, const PropertyThresholds& th = {},
                                     unsigned jobs = 1) {
  struct One {
    std::vector<SimileInstance> inst;
    std::string error;
  };
  auto per = parallel_map(queries.size(), jobs, [&](size_t i) {
    One o;
    const auto& q = queries[i];
    try {
      auto k = normalize_scores(knowledge.query(q.vehicle));
      auto c = normalize_scores(context.query(mask_sentence(q.tokens, q.like_index)));
      for (auto& s : select_properties(k, c, th))
        o.inst.push_back({q.sentence_id, q.topic, s.property, q.vehicle, s.score, s.knowledge, s.context});
    } catch (const Error& e) {
      o.error = q.sentence_id + ": " + e.what();
    }
    return o;
  });
  InstanceBuild b;
  for (auto& o : per) {
    if (!o.error.empty()) b.diagnostics.push_back(std::move(o.error));
    for (auto& s : o.inst) b.instances.push_back(std::move(s));
  }
  std::stable_sort(b.instances.begin(), b.instances.end(), [](const auto& a, const auto& b) {
    return std::tie(a.sentence_id, a.property) < std::tie(b.sentence_id, b.property);
  });
  return b;
}

}  // namespace simkb
