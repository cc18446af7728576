#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privshard/entity_types.h"

namespace privshard::text {

// A whitespace-delimited slice of the source. Offsets are UTF-8 byte
// offsets: source.substr(start, end - start) == text.
struct Token {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

// A token with edge punctuation removed. Stripped counts are in bytes so
// the cleaned region maps straight back into the source.
struct CleanToken {
  Token original;
  std::string cleaned;
  std::size_t leading_stripped = 0;
  std::size_t trailing_stripped = 0;

  // All-punctuation tokens clean to "" and take no part in labeling.
  bool dropped() const { return cleaned.empty(); }
  std::size_t cleaned_start() const {
    return original.start + leading_stripped;
  }
  std::size_t cleaned_end() const { return original.end - trailing_stripped; }
};

enum class IobTag { kOutside, kBegin, kInside };

struct IobLabel {
  IobTag tag = IobTag::kOutside;
  std::optional<EntityKind> kind;

  static IobLabel Outside() { return {}; }
  static IobLabel Begin(EntityKind k) { return {IobTag::kBegin, k}; }
  static IobLabel Inside(EntityKind k) { return {IobTag::kInside, k}; }

  // "O", "B-EMAIL", "I-SSN", ...
  std::string ToString() const;

  bool operator==(const IobLabel&) const = default;
};

// True for code points stripped from token edges: Unicode P* categories.
// Symbols such as '$' and '+' are kept.
bool IsEdgePunctuation(char32_t cp);

std::vector<Token> Tokenize(std::string_view text);

CleanToken Clean(const Token& token);

// Convenience for callers that only need the cleaned string.
std::string CleanText(std::string_view word);

// Tokenize + Clean, keeping dropped tokens so offsets stay reconstructible.
std::vector<CleanToken> TokenizeAndClean(std::string_view text);

// Token labeling with a running active entity: first matching pattern in
// catalog order wins; a match continues the span (I-) only when the
// previous token matched the same kind, otherwise it starts one (B-).
std::vector<IobLabel> LabelTokens(std::span<const std::string> tokens,
                                  std::span<const EntityPattern> patterns);

// Every I- label is immediately preceded by B-/I- of the same kind.
bool IsWellFormed(std::span<const IobLabel> labels);

// Simple per-code-point lowercase mapping.
std::string ToLower(std::string_view utf8);

// Well-formed UTF-8 check.
bool IsValidUtf8(std::string_view s);

// Any alphabetic code point present.
bool HasAlphabetic(std::string_view utf8);

}  // namespace privshard::text
