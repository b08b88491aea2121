#pragma once

#include <string>

#include "relex/types.hpp"

namespace relex {

// Deterministic plain-text preprocessing for the extract command:
// sentences end at . ! ? (the terminator stays with its sentence); tokens
// are maximal runs of letters/digits (plus embedded ' - .), any other
// non-space character is a single token.
Document tokenize_plain_text(const std::string& text, const std::string& doc_id);

}  // namespace relex
