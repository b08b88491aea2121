#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "relex/types.hpp"

namespace relex {

// Deterministic subword vocabulary: whole surfaces seen often enough in the
// build corpus become single pieces; anything else falls back to greedy
// longest-match over the known pieces, ultimately single bytes. Piece ids are
// stable under save/load.
class SubwordVocab {
 public:
  static constexpr int kUnkId = 0;

  SubwordVocab() = default;

  static SubwordVocab build(const std::vector<Document>& docs, int max_words,
                            int min_freq);

  // At least one piece per non-empty surface; unknown bytes map to kUnkId.
  std::vector<int> tokenize(const std::string& surface) const;

  int size() const { return static_cast<int>(pieces_.size()); }
  const std::string& piece(int id) const { return pieces_.at(static_cast<std::size_t>(id)); }

  void save(std::ostream& out) const;
  static SubwordVocab load(std::istream& in);

 private:
  void index_pieces();

  std::vector<std::string> pieces_;  // pieces_[0] is the [UNK] sentinel
  std::unordered_map<std::string, int> piece_ids_;
  std::size_t max_piece_len_ = 1;
};

}  // namespace relex
