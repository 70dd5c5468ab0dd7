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

// Simile candidate extraction from POS-tagged sentences.
//
//   like pattern:  Noun1 ... BE/VB like ... Noun2
//   be pattern:    Noun1 ... BE ... Noun2
//
// Gaps are bounded: Noun1 is the nearest noun at most kNounWindow tokens
// left of the verb, Noun2 the nearest noun at most kNounWindow tokens right
// of the anchor. Adverbs (RB*) may sit between the verb and "like".

#include <array>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simkb/common.hpp"

namespace simkb {

struct Token {
  std::string surface;
  std::string pos;

  bool operator==(const Token&) const = default;
};

struct TaggedSentence {
  std::string id;
  std::string source;
  std::vector<Token> tokens;

  std::string text() const {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) out += ' ';
      out += tokens[i].surface;
    }
    return out;
  }
};

enum class View { like, be };

inline std::string_view view_name(View v) { return v == View::like ? "like" : "be"; }

inline View parse_view(std::string_view s) {
  if (s == "like") return View::like;
  if (s == "be") return View::be;
  throw Error("unknown view: '" + std::string(s) + "'");
}

struct SimileCandidate {
  std::string sentence_id;
  View view = View::like;
  size_t anchor_index = 0;
  size_t noun1_index = 0;
  size_t noun2_index = 0;

  bool operator==(const SimileCandidate&) const = default;
};

inline constexpr size_t kNounWindow = 10;

inline bool is_noun_tag(std::string_view pos) {
  return pos == "NN" || pos == "NNS" || pos == "NNP" || pos == "NNPS";
}

inline bool is_verb_tag(std::string_view pos) { return pos.starts_with("VB"); }

inline bool is_adverb_tag(std::string_view pos) { return pos.starts_with("RB"); }

inline bool is_be_form(std::string_view surface) {
  static constexpr std::array<std::string_view, 8> kBe = {"am", "is", "are", "was",
                                                          "were", "be", "been", "being"};
  const std::string lower = to_lower(surface);
  return std::find(kBe.begin(), kBe.end(), lower) != kBe.end();
}

// Parses `id<TAB>source<TAB>tok_POS tok_POS ...`. Token and tag are split on
// the last underscore.
inline TaggedSentence parse_tagged_line(std::string_view line) {
  auto fields = split(line, '\t');
  if (fields.size() != 3) throw Error("expected 3 tab-separated fields, got " + std::to_string(fields.size()));
  TaggedSentence s;
  s.id = std::string(trim(fields[0]));
  s.source = std::string(trim(fields[1]));
  if (s.id.empty()) throw Error("empty sentence id");
  for (auto piece : split_ws(fields[2])) {
    size_t us = piece.rfind('_');
    if (us == std::string_view::npos || us == 0 || us + 1 == piece.size())
      throw Error("token/tag arity mismatch at '" + std::string(piece) + "'");
    s.tokens.push_back({std::string(piece.substr(0, us)), std::string(piece.substr(us + 1))});
  }
  if (s.tokens.empty()) throw Error("sentence has no tokens");
  return s;
}

inline std::string format_tagged_line(const TaggedSentence& s) {
  std::string out = s.id + '\t' + s.source + '\t';
  for (size_t i = 0; i < s.tokens.size(); ++i) {
    if (i) out += ' ';
    out += s.tokens[i].surface + '_' + s.tokens[i].pos;
  }
  return out;
}

namespace detail {

inline std::optional<size_t> nearest_noun_left(const std::vector<Token>& toks, size_t before) {
  for (size_t d = 1; d <= kNounWindow && d <= before; ++d)
    if (is_noun_tag(toks[before - d].pos)) return before - d;
  return std::nullopt;
}

inline std::optional<size_t> nearest_noun_right(const std::vector<Token>& toks, size_t after) {
  for (size_t d = 1; d <= kNounWindow && after + d < toks.size(); ++d)
    if (is_noun_tag(toks[after + d].pos)) return after + d;
  return std::nullopt;
}

// Index of the verb governing "like" at `like_index`, skipping adverbs.
inline std::optional<size_t> like_verb(const std::vector<Token>& toks, size_t like_index) {
  size_t i = like_index;
  while (i > 0) {
    --i;
    const Token& t = toks[i];
    if (is_adverb_tag(t.pos)) continue;
    if (is_be_form(t.surface) || is_verb_tag(t.pos)) return i;
    return std::nullopt;
  }
  return std::nullopt;
}

struct LikeMatch {
  SimileCandidate candidate;
  size_t verb_index;
};

inline std::vector<LikeMatch> like_matches(const TaggedSentence& s) {
  std::vector<LikeMatch> out;
  const auto& toks = s.tokens;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (to_lower(toks[i].surface) != "like") continue;
    auto verb = like_verb(toks, i);
    if (!verb) continue;
    auto n1 = nearest_noun_left(toks, *verb);
    auto n2 = nearest_noun_right(toks, i);
    if (!n1 || !n2) continue;
    out.push_back({{s.id, View::like, i, *n1, *n2}, *verb});
  }
  return out;
}

}  // namespace detail

inline std::vector<SimileCandidate> match_like_pattern(const TaggedSentence& s) {
  std::vector<SimileCandidate> out;
  for (auto& m : detail::like_matches(s)) out.push_back(std::move(m.candidate));
  return out;
}

inline std::vector<SimileCandidate> match_be_pattern(const TaggedSentence& s) {
  std::vector<SimileCandidate> out;
  const auto& toks = s.tokens;
  std::vector<bool> used(toks.size(), false);
  for (const auto& m : detail::like_matches(s)) used[m.verb_index] = true;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (used[i] || !is_be_form(toks[i].surface) || !is_verb_tag(toks[i].pos)) continue;
    auto n1 = detail::nearest_noun_left(toks, i);
    auto n2 = detail::nearest_noun_right(toks, i);
    if (!n1 || !n2) continue;
    out.push_back({s.id, View::be, i, *n1, *n2});
  }
  return out;
}

// Re-validates the structural invariants of a candidate against its sentence.
inline bool candidate_is_valid(const SimileCandidate& c, const TaggedSentence& s) {
  const auto& t = s.tokens;
  if (c.sentence_id != s.id) return false;
  if (!(c.noun1_index < c.anchor_index && c.anchor_index < c.noun2_index && c.noun2_index < t.size()))
    return false;
  if (!is_noun_tag(t[c.noun1_index].pos) || !is_noun_tag(t[c.noun2_index].pos)) return false;
  const bool anchor_is_like = to_lower(t[c.anchor_index].surface) == "like";
  return c.view == View::like ? anchor_is_like : !anchor_is_like;
}

struct ViewCounts {
  size_t like = 0;
  size_t be = 0;

  ViewCounts& operator+=(const ViewCounts& o) {
    like += o.like;
    be += o.be;
    return *this;
  }
  bool operator==(const ViewCounts&) const = default;
};

struct LineDiagnostic {
  size_t line = 0;
  std::string message;
};

struct CorpusReadResult {
  std::vector<TaggedSentence> sentences;
  std::vector<LineDiagnostic> diagnostics;
};

// Reads a tagged corpus; malformed lines are reported and skipped. Blank
// lines are ignored silently.
inline CorpusReadResult read_corpus(std::istream& in) {
  CorpusReadResult r;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    try {
      r.sentences.push_back(parse_tagged_line(line));
    } catch (const Error& e) {
      r.diagnostics.push_back({lineno, e.what()});
    }
  }
  return r;
}

struct ScanResult {
  std::vector<SimileCandidate> candidates;
  ViewCounts counts;
  std::vector<LineDiagnostic> diagnostics;
};

// Per sentence: like-view candidates first, then be-view, in anchor order.
inline ScanResult scan_sentences(std::span<const TaggedSentence> sentences, unsigned jobs = 1) {
  auto per = parallel_map(sentences.size(), jobs, [&](size_t i) {
    auto c = match_like_pattern(sentences[i]);
    auto b = match_be_pattern(sentences[i]);
    c.insert(c.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
    return c;
  });
  ScanResult r;
  for (auto& cands : per) {
    for (auto& c : cands) {
      (c.view == View::like ? r.counts.like : r.counts.be) += 1;
      r.candidates.push_back(std::move(c));
    }
  }
  return r;
}

inline ScanResult scan_corpus(std::istream& in, unsigned jobs = 1) {
  auto corpus = read_corpus(in);
  auto r = scan_sentences(corpus.sentences, jobs);
  r.diagnostics = std::move(corpus.diagnostics);
  return r;
}

inline std::string format_candidate(const SimileCandidate& c) {
  return c.sentence_id + '\t' + std::string(view_name(c.view)) + '\t' + std::to_string(c.anchor_index) + '\t' +
         std::to_string(c.noun1_index) + '\t' + std::to_string(c.noun2_index);
}

inline SimileCandidate parse_candidate(std::string_view line) {
  auto f = split(line, '\t');
  if (f.size() != 5) throw Error("candidate record needs 5 fields");
  SimileCandidate c;
  c.sentence_id = std::string(f[0]);
  c.view = parse_view(f[1]);
  c.anchor_index = static_cast<size_t>(parse_int(f[2], "anchor_index"));
  c.noun1_index = static_cast<size_t>(parse_int(f[3], "noun1_index"));
  c.noun2_index = static_cast<size_t>(parse_int(f[4], "noun2_index"));
  return c;
}

}  // namespace simkb
