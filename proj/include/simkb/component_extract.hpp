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

// Topic/vehicle extraction from like-view simile parse trees.
//
// For every leaf "like" (the anchor), the vehicle is searched in the
// anchor's right siblings and the topic in the subtree of an ancestor chosen
// while climbing from the anchor. Rules are tried at each ancestor in this
// priority order:
//   (a) ascending labels [S, SBAR, NP] starting here (the anchor sits in a
//       relative clause): topic from that NP, skipping the clause;
//   (b) ascending labels [VP, VP, VP] starting here, the middle VP begins
//       with "to", and no S/NP was passed yet: topic from the third VP;
//   (c) this node is S or NP: topic from it.
// The child on the path to the anchor is excluded from the topic search.
// The chosen subtree goes through GETCOMP; when GETCOMP finds nothing (a
// plain NP over pre-leaves never qualifies) the first NP child is used.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "simkb/common.hpp"
#include "simkb/pattern_extract.hpp"
#include "simkb/treebank.hpp"

namespace simkb {

// ---------------------------------------------------------------- GETCOMP

inline bool children_all_np_pp(const Tree& t, NodeId id) {
  const auto& ch = t.node(id).children;
  bool has_np = false;
  for (NodeId c : ch) {
    const auto& l = t.node(c).label;
    if (l != "NP" && l != "PP") return false;
    has_np |= l == "NP";
  }
  return has_np;
}

// First node in pre-order under `n` (inclusive) whose children are all NP
// or PP with at least one NP.
inline std::optional<NodeId> find_component(const Tree& t, NodeId n) {
  for (NodeId id : t.preorder(n))
    if (children_all_np_pp(t, id)) return id;
  return std::nullopt;
}

inline std::optional<std::string> get_comp(const Tree& t, NodeId n) {
  if (auto id = find_component(t, n)) return t.leaf_text(*id);
  return std::nullopt;
}

// ---------------------------------------------------------------- types

struct Component {
  std::string text;
  std::vector<Token> tokens;
  size_t span_begin = 0;
  size_t span_end = 0;
};

enum class ExtractStatus { ok, no_anchor, no_vehicle, no_topic, filtered };

enum class FilterReason { none, gerund, noun_overlap, non_personal_pronoun };

enum class TopicRule { none, relative_clause, to_infinitive, nearest_s_np };

inline std::string_view filter_reason_name(FilterReason r) {
  switch (r) {
    case FilterReason::gerund: return "gerund";
    case FilterReason::noun_overlap: return "noun_overlap";
    case FilterReason::non_personal_pronoun: return "non_personal_pronoun";
    case FilterReason::none: break;
  }
  return "none";
}

inline std::string status_name(ExtractStatus s, FilterReason r) {
  switch (s) {
    case ExtractStatus::ok: return "ok";
    case ExtractStatus::no_anchor: return "no_anchor";
    case ExtractStatus::no_vehicle: return "no_vehicle";
    case ExtractStatus::no_topic: return "no_topic";
    case ExtractStatus::filtered: return "filtered:" + std::string(filter_reason_name(r));
  }
  return "unknown";
}

struct ExtractionResult {
  std::string sentence_id;
  std::optional<Component> topic;
  std::optional<Component> vehicle;
  size_t anchor_index = 0;
  ExtractStatus status = ExtractStatus::no_anchor;
  FilterReason reason = FilterReason::none;
  TopicRule rule = TopicRule::none;
  std::optional<std::string> resolved_pronoun;  // original pronoun if coref replaced it

  std::string status_string() const { return status_name(status, reason); }
};

// ---------------------------------------------------------------- coref

struct CorefContext {
  std::string_view sentence_id;
  const Tree* tree = nullptr;
};

class CorefResolver {
 public:
  virtual ~CorefResolver() = default;
  virtual std::optional<std::string> resolve(std::string_view pronoun, const CorefContext& ctx) const = 0;
};

// Leaves every pronoun as is.
class IdentityResolver final : public CorefResolver {
 public:
  std::optional<std::string> resolve(std::string_view, const CorefContext&) const override {
    return std::nullopt;
  }
};

// Precomputed referents, one `id<TAB>pronoun<TAB>referent` per line.
class TableResolver final : public CorefResolver {
 public:
  void add(std::string id, std::string_view pronoun, std::string referent) {
    table_[{std::move(id), to_lower(pronoun)}] = std::move(referent);
  }

  static TableResolver load(const std::string& path) {
    TableResolver r;
    size_t n = 0;
    for (const auto& line : read_lines(path)) {
      ++n;
      if (trim(line).empty()) continue;
      auto f = split(line, '\t');
      if (f.size() != 3) throw Error(path + ":" + std::to_string(n) + ": expected id<TAB>pronoun<TAB>referent");
      r.add(std::string(f[0]), f[1], std::string(trim(f[2])));
    }
    return r;
  }

  std::optional<std::string> resolve(std::string_view pronoun, const CorefContext& ctx) const override {
    auto it = table_.find({std::string(ctx.sentence_id), to_lower(pronoun)});
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::pair<std::string, std::string>, std::string> table_;
};

// ---------------------------------------------------------------- filters

inline bool is_non_personal_pronoun(std::string_view w) {
  static constexpr std::array<std::string_view, 10> kSet = {"it",   "that",      "this",     "these",      "those",
                                                            "something", "anything", "everything", "nothing", "one"};
  const std::string l = to_lower(w);
  return std::find(kSet.begin(), kSet.end(), l) != kSet.end();
}

inline bool is_personal_pronoun(std::string_view w) {
  static constexpr std::array<std::string_view, 11> kSet = {"i",  "you", "he",  "she", "we", "they",
                                                            "me", "him", "her", "us",  "them"};
  const std::string l = to_lower(w);
  return std::find(kSet.begin(), kSet.end(), l) != kSet.end();
}

// Last verb-tagged token, else the last token.
inline const Token* component_head(const Component& c) {
  if (c.tokens.empty()) return nullptr;
  for (auto it = c.tokens.rbegin(); it != c.tokens.rend(); ++it)
    if (is_verb_tag(it->pos)) return &*it;
  return &c.tokens.back();
}

// Lowercase surface; plural noun tags lose their regular plural suffix.
inline std::string noun_lemma(const Token& t) {
  std::string w = to_lower(t.surface);
  if (t.pos != "NNS" && t.pos != "NNPS") return w;
  auto ends = [&](std::string_view s) { return w.size() > s.size() && std::string_view(w).ends_with(s); };
  if (ends("ies")) return w.substr(0, w.size() - 3) + "y";
  if (ends("ses") || ends("xes") || ends("ches") || ends("shes")) return w.substr(0, w.size() - 2);
  if (ends("s") && !ends("ss")) return w.substr(0, w.size() - 1);
  return w;
}

inline std::set<std::string> noun_lemmas(const Component& c) {
  std::set<std::string> out;
  for (const auto& t : c.tokens)
    if (is_noun_tag(t.pos)) out.insert(noun_lemma(t));
  return out;
}

inline FilterReason apply_filters(const Component& topic, const Component& vehicle) {
  for (const Component* c : {&topic, &vehicle}) {
    const Token* h = component_head(*c);
    if (h && h->pos == "VBG") return FilterReason::gerund;
  }
  auto a = noun_lemmas(topic), b = noun_lemmas(vehicle);
  for (const auto& n : a)
    if (b.count(n)) return FilterReason::noun_overlap;
  if (topic.tokens.size() == 1 && is_non_personal_pronoun(topic.tokens[0].surface))
    return FilterReason::non_personal_pronoun;
  return FilterReason::none;
}

// ---------------------------------------------------------------- extraction

namespace detail {

inline Component make_component(const Tree& t, NodeId id) {
  Component c;
  for (NodeId leaf : t.leaves(id)) c.tokens.push_back({*t.node(leaf).token, std::string(t.tag_of_leaf(leaf))});
  c.text = t.leaf_text(id);
  c.span_begin = t.node(id).span_begin;
  c.span_end = t.node(id).span_end;
  return c;
}

inline Component make_component(const Tree& t, std::span<const NodeId> ids) {
  Component c;
  c.span_begin = t.node(ids.front()).span_begin;
  c.span_end = t.node(ids.back()).span_end;
  for (NodeId id : ids) {
    auto part = make_component(t, id);
    if (!c.text.empty()) c.text += ' ';
    c.text += part.text;
    c.tokens.insert(c.tokens.end(), part.tokens.begin(), part.tokens.end());
  }
  return c;
}

inline bool is_punct_tag(std::string_view l) {
  return l == "." || l == "," || l == ":" || l == "``" || l == "''" || l == "-LRB-" || l == "-RRB-";
}

// Children of `parent` after `after`, without trailing punctuation.
inline std::vector<NodeId> right_siblings(const Tree& t, NodeId parent, NodeId after) {
  const auto& ch = t.node(parent).children;
  auto it = std::find(ch.begin(), ch.end(), after);
  std::vector<NodeId> out(it == ch.end() ? ch.end() : it + 1, ch.end());
  while (!out.empty() && is_punct_tag(t.node(out.back()).label)) out.pop_back();
  return out;
}

inline std::optional<Component> find_vehicle(const Tree& t, NodeId anchor_pre) {
  const NodeId parent = t.node(anchor_pre).parent;
  if (parent == kNoNode) return std::nullopt;
  auto sibs = right_siblings(t, parent, anchor_pre);
  for (NodeId s : sibs)
    if (auto id = find_component(t, s)) return make_component(t, *id);
  for (NodeId s : sibs)
    if (!t.is_preleaf(s)) return make_component(t, s);
  if (!sibs.empty()) return make_component(t, sibs);
  return std::nullopt;
}

// Topic inside `target`, ignoring `excluded` (the child on the anchor path).
// When `target` is the anchor's own parent, everything from the anchor on is
// ignored as well.
inline std::optional<Component> find_topic(const Tree& t, NodeId target, NodeId excluded, bool cut_at_excluded) {
  std::vector<NodeId> allowed;
  for (NodeId c : t.node(target).children) {
    if (c == excluded) {
      if (cut_at_excluded) break;
      continue;
    }
    allowed.push_back(c);
  }
  for (NodeId c : allowed)
    if (auto id = find_component(t, c)) return make_component(t, *id);
  for (NodeId c : allowed)
    if (t.node(c).label == "NP") return make_component(t, c);
  for (NodeId c : allowed)
    if (!t.is_preleaf(c) && !is_punct_tag(t.node(c).label)) return make_component(t, c);
  return std::nullopt;
}

inline std::string first_leaf_lower(const Tree& t, NodeId id) {
  auto l = t.leaves(id);
  return l.empty() ? std::string() : to_lower(*t.node(l.front()).token);
}

inline bool is_pronoun_component(const Component& c) {
  if (c.tokens.size() != 1) return false;
  const auto& tok = c.tokens[0];
  return tok.pos == "PRP" || is_personal_pronoun(tok.surface) || is_non_personal_pronoun(tok.surface);
}

// Re-tags a coreference referent from the sentence when it occurs there;
// otherwise its words are treated as nouns.
inline Component referent_component(const Tree& t, const std::string& referent) {
  Component c;
  c.text = referent;
  auto words = split_ws(referent);
  std::vector<NodeId> leaves = t.leaves();
  for (size_t i = 0; i + words.size() <= leaves.size() && !words.empty(); ++i) {
    bool match = true;
    for (size_t k = 0; k < words.size() && match; ++k)
      match = to_lower(*t.node(leaves[i + k]).token) == to_lower(words[k]);
    if (match) {
      for (size_t k = 0; k < words.size(); ++k)
        c.tokens.push_back({*t.node(leaves[i + k]).token, std::string(t.tag_of_leaf(leaves[i + k]))});
      c.span_begin = i;
      c.span_end = i + words.size();
      return c;
    }
  }
  for (auto w : words) c.tokens.push_back({std::string(w), "NN"});
  return c;
}

}  // namespace detail

inline std::vector<ExtractionResult> extract_components(const Tree& t, std::string_view sentence_id = {},
                                                        const CorefResolver* resolver = nullptr) {
  static const IdentityResolver kIdentity;
  if (!resolver) resolver = &kIdentity;
  std::vector<ExtractionResult> out;

  for (NodeId leaf : t.leaves()) {
    if (to_lower(*t.node(leaf).token) != "like") continue;
    ExtractionResult r;
    r.sentence_id = std::string(sentence_id);
    r.anchor_index = t.node(leaf).span_begin;
    const NodeId anchor = t.node(leaf).parent;  // pre-leaf over "like"

    r.vehicle = detail::find_vehicle(t, anchor);

    // Ancestors of the anchor, nearest first.
    std::vector<NodeId> chain = t.parent_chain(t.node(anchor).parent);
    if (t.node(anchor).parent == kNoNode) chain.clear();
    auto label = [&](size_t k) -> std::string_view { return t.node(chain[k]).label; };
    bool passed_s_np = false;
    for (size_t k = 0; k < chain.size() && !r.topic; ++k) {
      const NodeId below = k == 0 ? anchor : chain[k - 1];
      const bool three = k + 2 < chain.size();
      // Anchor inside a relative clause: the topic is the modified NP, never
      // the clause's own subject.
      if (three && label(k) == "S" && label(k + 1) == "SBAR" && label(k + 2) == "NP") {
        r.topic = detail::find_topic(t, chain[k + 2], chain[k + 1], false);
        if (r.topic) r.rule = TopicRule::relative_clause;
      } else if (three && !passed_s_np && label(k) == "VP" && label(k + 1) == "VP" && label(k + 2) == "VP" &&
                 detail::first_leaf_lower(t, chain[k + 1]) == "to") {
        r.topic = detail::find_topic(t, chain[k + 2], chain[k + 1], false);
        if (r.topic) r.rule = TopicRule::to_infinitive;
      } else if (label(k) == "S" || label(k) == "NP") {
        r.topic = detail::find_topic(t, chain[k], below, k == 0);
        if (r.topic) r.rule = TopicRule::nearest_s_np;
      }
      if (label(k) == "S" || label(k) == "NP") passed_s_np = true;
    }

    if (r.topic && detail::is_pronoun_component(*r.topic)) {
      if (auto ref = resolver->resolve(r.topic->text, {sentence_id, &t})) {
        r.resolved_pronoun = r.topic->text;
        r.topic = detail::referent_component(t, *ref);
      }
    }

    if (!r.vehicle) {
      r.status = ExtractStatus::no_vehicle;
    } else if (!r.topic) {
      r.status = ExtractStatus::no_topic;
    } else if (auto reason = apply_filters(*r.topic, *r.vehicle); reason != FilterReason::none) {
      r.status = ExtractStatus::filtered;
      r.reason = reason;
    } else {
      r.status = ExtractStatus::ok;
    }
    out.push_back(std::move(r));
  }

  if (out.empty()) {
    ExtractionResult r;
    r.sentence_id = std::string(sentence_id);
    r.status = ExtractStatus::no_anchor;
    out.push_back(std::move(r));
  }
  return out;
}

struct ExtractionSummary {
  std::map<std::string, size_t> by_status;  // status string -> count
  size_t total = 0;

  void add(const ExtractionResult& r) {
    ++by_status[r.status_string()];
    ++total;
  }
  ExtractionSummary& operator+=(const ExtractionSummary& o) {
    for (const auto& [k, v] : o.by_status) by_status[k] += v;
    total += o.total;
    return *this;
  }
};

struct ExtractionBatch {
  std::vector<ExtractionResult> results;
  ExtractionSummary summary;
};

// Extracts from the trees of `ids` (in that order). Every id must have a
// tree; trees without an id are ignored.
inline ExtractionBatch extract_batch(const std::unordered_map<std::string, Tree>& trees,
                                     std::span<const std::string> ids, const CorefResolver* resolver = nullptr,
                                     unsigned jobs = 1) {
  for (const auto& id : ids)
    if (!trees.count(id)) throw Error("id mismatch: no tree for sentence '" + id + "'");
  auto per = parallel_map(ids.size(), jobs,
                          [&](size_t i) { return extract_components(trees.at(ids[i]), ids[i], resolver); });
  ExtractionBatch b;
  for (auto& rs : per)
    for (auto& r : rs) {
      b.summary.add(r);
      b.results.push_back(std::move(r));
    }
  return b;
}

inline std::string format_extraction(const ExtractionResult& r) {
  return r.sentence_id + '\t' + (r.topic ? r.topic->text : "") + '\t' + (r.vehicle ? r.vehicle->text : "") + '\t' +
         r.status_string() + '\t' + std::to_string(r.anchor_index);
}

struct ExtractionRecord {
  std::string sentence_id;
  std::string topic;
  std::string vehicle;
  std::string status;
  size_t anchor_index = 0;
};

inline ExtractionRecord parse_extraction(std::string_view line) {
  auto f = split(line, '\t');
  if (f.size() != 5) throw Error("extraction record needs 5 fields");
  return {std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]),
          static_cast<size_t>(parse_int(f[4], "anchor_index"))};
}

}  // namespace simkb
