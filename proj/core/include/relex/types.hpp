#pragma once

#include <compare>
#include <string>
#include <vector>

namespace relex {

// Half-open token range [start, end) in document-level token indices.
struct Span {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

struct Token {
  int index = 0;           // document-level position, 0-based
  int sentence_index = 0;  // owning sentence
  std::string surface;
};

// Token range of one sentence, [start, end).
struct Sentence {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
};

struct Mention {
  Span span;
  std::string entity_type;  // set on gold mentions; empty on raw predictions

  bool operator==(const Mention&) const = default;
};

// Mention indices refer into the owning document's (or prediction's) mention list.
struct EntityCluster {
  std::vector<int> mentions;
  std::string entity_type;
};

// Directed relation between two entity clusters, identified by cluster index.
struct RelationTriple {
  int head = 0;
  int tail = 0;
  std::string relation_type;

  bool operator==(const RelationTriple&) const = default;
  auto operator<=>(const RelationTriple&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<Token> tokens;
  std::vector<Sentence> sentences;
  std::vector<Mention> gold_mentions;
  std::vector<EntityCluster> gold_clusters;
  // Stored verbatim, duplicates included; the evaluator works on the
  // deduplicated view.
  std::vector<RelationTriple> gold_relations;

  int num_tokens() const { return static_cast<int>(tokens.size()); }

  // Space-joined surfaces of the span's tokens, case preserved.
  std::string span_surface(const Span& span) const;

  // Sentence containing the span. Gold mentions are sentence-local by
  // corpus invariant; for arbitrary spans the sentence of the first token
  // is returned.
  int sentence_of(const Span& span) const;

  std::vector<RelationTriple> deduplicated_relations() const;
};

// Checks the structural invariants established at ingestion: token indexing,
// sentence locality of gold mentions, cluster membership and relation
// referential integrity. Throws DataError naming the offending piece.
void validate_document(const Document& doc);

}  // namespace relex
