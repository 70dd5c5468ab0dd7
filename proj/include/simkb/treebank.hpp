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

// Penn-Treebank bracketed constituency trees.
//
// A Tree owns its nodes in a flat array; nodes refer to each other by index.
// Leaves carry a token and no label; pre-leaves carry the POS tag and exactly
// one leaf child. Labels are normalized on parse: functional suffixes are
// stripped (NP-SBJ -> NP, NP=2 -> NP) and -NONE- subtrees are removed.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simkb/common.hpp"

namespace simkb {

using NodeId = uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct ParseNode {
  std::string label;                 // empty for leaves
  std::optional<std::string> token;  // leaves only
  std::vector<NodeId> children;
  NodeId parent = kNoNode;
  size_t span_begin = 0;  // token indices, half-open
  size_t span_end = 0;

  bool is_leaf() const { return token.has_value(); }
};

class TreeParseError : public Error {
 public:
  TreeParseError(const std::string& msg, size_t offset)
      : Error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

class Tree {
 public:
  NodeId root() const { return root_; }
  const ParseNode& node(NodeId id) const { return nodes_.at(id); }
  size_t size() const { return nodes_.size(); }

  bool is_preleaf(NodeId id) const {
    const auto& n = nodes_[id];
    return n.children.size() == 1 && nodes_[n.children[0]].is_leaf();
  }

  // Pre-order: node before its children, children left to right.
  std::vector<NodeId> preorder(NodeId from) const {
    std::vector<NodeId> out, stack{from};
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      out.push_back(n);
      const auto& ch = nodes_[n].children;
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }
  std::vector<NodeId> preorder() const { return preorder(root_); }

  std::vector<NodeId> leaves(NodeId from) const {
    std::vector<NodeId> out;
    for (NodeId n : preorder(from))
      if (nodes_[n].is_leaf()) out.push_back(n);
    return out;
  }
  std::vector<NodeId> leaves() const { return leaves(root_); }

  std::string leaf_text(NodeId from) const {
    std::string out;
    for (NodeId n : leaves(from)) {
      if (!out.empty()) out += ' ';
      out += *nodes_[n].token;
    }
    return out;
  }
  std::string leaf_text() const { return leaf_text(root_); }

  // From `from` (inclusive) up to the root (inclusive).
  std::vector<NodeId> parent_chain(NodeId from) const {
    std::vector<NodeId> out;
    for (NodeId n = from; n != kNoNode; n = nodes_[n].parent) out.push_back(n);
    return out;
  }

  // POS tag of a leaf (the label of its pre-leaf parent).
  std::string_view tag_of_leaf(NodeId leaf) const {
    NodeId p = nodes_[leaf].parent;
    return p == kNoNode ? std::string_view{} : std::string_view(nodes_[p].label);
  }

  std::string serialize(NodeId from) const {
    std::string out;
    serialize_into(from, out);
    return out;
  }
  std::string serialize() const { return serialize(root_); }

  friend Tree parse_bracketed(std::string_view text);

 private:
  void serialize_into(NodeId id, std::string& out) const {
    const auto& n = nodes_[id];
    if (n.is_leaf()) {
      out += *n.token;
      return;
    }
    out += '(';
    out += n.label;
    for (NodeId c : n.children) {
      out += ' ';
      serialize_into(c, out);
    }
    out += ')';
  }

  std::vector<ParseNode> nodes_;
  NodeId root_ = kNoNode;
};

inline std::string normalize_label(std::string_view label) {
  // Labels such as -NONE-, -LRB- start with '-' and are kept whole.
  if (label.empty() || label.front() == '-') return std::string(label);
  size_t cut = label.find_first_of("-=");
  return std::string(label.substr(0, cut));
}

namespace detail {

struct RawNode {
  std::string label;
  std::optional<std::string> token;
  std::vector<RawNode> children;
};

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : s_(text) {}

  RawNode parse() {
    skip_ws();
    if (pos_ >= s_.size()) throw TreeParseError("empty input", pos_);
    if (s_[pos_] != '(') throw TreeParseError("bare token at top level", pos_);
    RawNode root = parse_constituent();
    skip_ws();
    if (pos_ < s_.size()) throw TreeParseError("trailing characters after tree", pos_);
    return root;
  }

 private:
  // Precondition: s_[pos_] == '('.
  RawNode parse_constituent() {
    const size_t open = pos_;
    ++pos_;
    skip_ws();
    RawNode n;
    const size_t label_at = pos_;
    if (pos_ < s_.size() && s_[pos_] != '(' && s_[pos_] != ')') n.label = read_atom();
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size()) {
        // Report where the innermost unclosed constituent's label begins.
        throw TreeParseError("unbalanced brackets: constituent never closed", label_at);
      }
      const char c = s_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        n.children.push_back(parse_constituent());
      } else {
        const size_t at = pos_;
        std::string atom = read_atom();
        if (!n.children.empty() || n.token)
          throw TreeParseError("token mixed with constituents", at);
        n.token = std::move(atom);
      }
    }
    if (n.label.empty() && n.children.empty() && !n.token) throw TreeParseError("empty constituent", open);
    if (n.token && n.label.empty()) throw TreeParseError("token without a tag", open);
    return n;
  }

  std::string read_atom() {
    size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != '(' && s_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string_view s_;
  size_t pos_ = 0;
};

// Drops -NONE- subtrees and constituents left empty; returns false if `n`
// itself should be dropped.
inline bool prune(RawNode& n) {
  if (n.label == "-NONE-") return false;
  if (n.token) return true;
  std::vector<RawNode> kept;
  for (auto& c : n.children)
    if (prune(c)) kept.push_back(std::move(c));
  n.children = std::move(kept);
  return !n.children.empty();
}

}  // namespace detail

inline Tree parse_bracketed(std::string_view text) {
  detail::RawNode raw = detail::BracketParser(text).parse();
  // Unlabeled wrapper "( (S ...) )" around a single constituent.
  while (raw.label.empty() && !raw.token && raw.children.size() == 1) {
    detail::RawNode inner = std::move(raw.children[0]);
    raw = std::move(inner);
  }
  if (raw.label.empty()) throw TreeParseError("root constituent has no label", 0);
  if (!detail::prune(raw)) throw TreeParseError("tree is empty after removing traces", 0);

  Tree t;
  size_t next_token = 0;
  auto build = [&](auto& self, const detail::RawNode& r, NodeId parent) -> NodeId {
    const NodeId id = static_cast<NodeId>(t.nodes_.size());
    t.nodes_.push_back({});
    t.nodes_[id].label = normalize_label(r.label);
    t.nodes_[id].parent = parent;
    t.nodes_[id].span_begin = next_token;
    if (r.token) {
      // Pre-leaf: label node with one leaf child holding the token.
      const NodeId leaf = static_cast<NodeId>(t.nodes_.size());
      t.nodes_.push_back({});
      t.nodes_[leaf].token = *r.token;
      t.nodes_[leaf].parent = id;
      t.nodes_[leaf].span_begin = next_token;
      t.nodes_[leaf].span_end = ++next_token;
      t.nodes_[id].children.push_back(leaf);
    } else {
      for (const auto& c : r.children) {
        NodeId cid = self(self, c, id);
        t.nodes_[id].children.push_back(cid);
      }
    }
    t.nodes_[id].span_end = next_token;
    return id;
  };
  t.root_ = build(build, raw, kNoNode);
  return t;
}

struct TreeRecord {
  std::string id;
  Tree tree;
};

// `id<TAB>bracketing` per line.
inline TreeRecord parse_tree_line(std::string_view line) {
  size_t tab = line.find('\t');
  if (tab == std::string_view::npos) throw Error("tree line needs 'id<TAB>bracketing'");
  return {std::string(trim(line.substr(0, tab))), parse_bracketed(line.substr(tab + 1))};
}

}  // namespace simkb
