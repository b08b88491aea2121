#include "relex/types.hpp"

#include <algorithm>
#include <set>

#include "relex/errors.hpp"

namespace relex {

std::string Document::span_surface(const Span& span) const {
  std::string out;
  for (int i = span.start; i < span.end; ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[static_cast<std::size_t>(i)].surface;
  }
  return out;
}

int Document::sentence_of(const Span& span) const {
  return tokens.at(static_cast<std::size_t>(span.start)).sentence_index;
}

std::vector<RelationTriple> Document::deduplicated_relations() const {
  std::vector<RelationTriple> out;
  std::set<RelationTriple> seen;
  for (const RelationTriple& rel : gold_relations) {
    if (seen.insert(rel).second) out.push_back(rel);
  }
  return out;
}

void validate_document(const Document& doc) {
  const auto fail = [&](const std::string& what) {
    throw DataError("document '" + doc.doc_id + "': " + what);
  };
  const int n = doc.num_tokens();
  for (int i = 0; i < n; ++i) {
    if (doc.tokens[static_cast<std::size_t>(i)].index != i) {
      fail("token indices not strictly increasing from 0");
    }
  }
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const Sentence& sent = doc.sentences[s];
    const int expected_start = s == 0 ? 0 : doc.sentences[s - 1].end;
    if (sent.start != expected_start || sent.end < sent.start) {
      fail("sentence boundaries not contiguous");
    }
    for (int i = sent.start; i < sent.end; ++i) {
      if (doc.tokens[static_cast<std::size_t>(i)].sentence_index !=
          static_cast<int>(s)) {
        fail("token assigned to wrong sentence");
      }
    }
  }
  if (!doc.sentences.empty() && doc.sentences.back().end != n) {
    fail("sentences do not cover all tokens");
  }
  for (std::size_t m = 0; m < doc.gold_mentions.size(); ++m) {
    const Span& span = doc.gold_mentions[m].span;
    if (span.start < 0 || span.start >= span.end || span.end > n) {
      fail("mention " + std::to_string(m) + " span out of bounds");
    }
    const int first = doc.tokens[static_cast<std::size_t>(span.start)].sentence_index;
    const int last = doc.tokens[static_cast<std::size_t>(span.end - 1)].sentence_index;
    if (first != last) {
      fail("mention " + std::to_string(m) + " crosses sentence boundary");
    }
  }
  std::vector<int> owner(doc.gold_mentions.size(), -1);
  for (std::size_t c = 0; c < doc.gold_clusters.size(); ++c) {
    const EntityCluster& cluster = doc.gold_clusters[c];
    if (cluster.mentions.empty()) {
      fail("cluster " + std::to_string(c) + " is empty");
    }
    for (int m : cluster.mentions) {
      if (m < 0 || m >= static_cast<int>(doc.gold_mentions.size())) {
        fail("cluster " + std::to_string(c) + " references missing mention");
      }
      if (owner[static_cast<std::size_t>(m)] != -1) {
        fail("mention " + std::to_string(m) + " appears in two clusters");
      }
      owner[static_cast<std::size_t>(m)] = static_cast<int>(c);
    }
  }
  for (std::size_t m = 0; m < owner.size(); ++m) {
    if (owner[m] == -1) {
      fail("mention " + std::to_string(m) + " belongs to no cluster");
    }
  }
  const int num_clusters = static_cast<int>(doc.gold_clusters.size());
  for (std::size_t r = 0; r < doc.gold_relations.size(); ++r) {
    const RelationTriple& rel = doc.gold_relations[r];
    if (rel.head < 0 || rel.head >= num_clusters || rel.tail < 0 ||
        rel.tail >= num_clusters) {
      fail("relation " + std::to_string(r) + " references missing cluster");
    }
    if (rel.head == rel.tail) {
      fail("relation " + std::to_string(r) + " is reflexive");
    }
  }
}

}  // namespace relex
