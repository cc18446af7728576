#include "privshard/text_pipeline.h"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cstdint>

namespace privshard::text {
namespace {

// Decodes the code point at byte offset i and advances i. Ill-formed bytes
// come back as U_SENTINEL (< 0), consuming one byte.
UChar32 NextCodePoint(std::string_view s, std::size_t& i) {
  UChar32 c = 0;
  int32_t pos = static_cast<int32_t>(i);
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), pos,
          static_cast<int32_t>(s.size()), c);
  i = static_cast<std::size_t>(pos);
  return c;
}

UChar32 PrevCodePoint(std::string_view s, std::size_t& i) {
  UChar32 c = 0;
  int32_t pos = static_cast<int32_t>(i);
  U8_PREV(reinterpret_cast<const uint8_t*>(s.data()), 0, pos, c);
  i = static_cast<std::size_t>(pos);
  return c;
}

bool IsSpace(UChar32 c) { return c >= 0 && u_isUWhiteSpace(c); }

}  // namespace

std::string IobLabel::ToString() const {
  switch (tag) {
    case IobTag::kOutside:
      return "O";
    case IobTag::kBegin:
      return "B-" + std::string(KindName(*kind));
    case IobTag::kInside:
      return "I-" + std::string(KindName(*kind));
  }
  return "O";
}

bool IsEdgePunctuation(char32_t cp) {
  return u_ispunct(static_cast<UChar32>(cp));
}

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  std::size_t token_start = 0;
  bool in_token = false;
  while (i < text.size()) {
    std::size_t at = i;
    UChar32 c = NextCodePoint(text, i);
    if (IsSpace(c)) {
      if (in_token) {
        tokens.push_back({std::string(text.substr(token_start, at - token_start)),
                          token_start, at});
        in_token = false;
      }
    } else if (!in_token) {
      token_start = at;
      in_token = true;
    }
  }
  if (in_token) {
    tokens.push_back({std::string(text.substr(token_start)), token_start,
                      text.size()});
  }
  return tokens;
}

CleanToken Clean(const Token& token) {
  std::string_view s = token.text;
  std::size_t lo = 0;
  while (lo < s.size()) {
    std::size_t next = lo;
    UChar32 c = NextCodePoint(s, next);
    if (c < 0 || !u_ispunct(c)) break;
    lo = next;
  }
  std::size_t hi = s.size();
  while (hi > lo) {
    std::size_t prev = hi;
    UChar32 c = PrevCodePoint(s, prev);
    if (c < 0 || !u_ispunct(c) || prev < lo) break;
    hi = prev;
  }
  CleanToken out;
  out.original = token;
  out.cleaned = std::string(s.substr(lo, hi - lo));
  out.leading_stripped = lo;
  out.trailing_stripped = s.size() - hi;
  return out;
}

std::string CleanText(std::string_view word) {
  return Clean(Token{std::string(word), 0, word.size()}).cleaned;
}

std::vector<CleanToken> TokenizeAndClean(std::string_view text) {
  std::vector<CleanToken> out;
  for (const Token& t : Tokenize(text)) out.push_back(Clean(t));
  return out;
}

std::vector<IobLabel> LabelTokens(std::span<const std::string> tokens,
                                  std::span<const EntityPattern> patterns) {
  std::vector<IobLabel> labels(tokens.size());
  std::optional<EntityKind> active_entity;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    bool entity_found = false;
    for (const EntityPattern& p : patterns) {
      if (!p.Matches(tokens[i])) continue;
      if (active_entity != p.kind()) {
        labels[i] = IobLabel::Begin(p.kind());
        active_entity = p.kind();
      } else {
        labels[i] = IobLabel::Inside(p.kind());
      }
      entity_found = true;
      break;
    }
    if (!entity_found) active_entity.reset();
  }
  return labels;
}

bool IsWellFormed(std::span<const IobLabel> labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const IobLabel& l = labels[i];
    if (l.tag != IobTag::kOutside && !l.kind) return false;
    if (l.tag == IobTag::kOutside && l.kind) return false;
    if (l.tag != IobTag::kInside) continue;
    if (i == 0) return false;
    const IobLabel& prev = labels[i - 1];
    if (prev.tag == IobTag::kOutside || prev.kind != l.kind) return false;
  }
  return true;
}

std::string ToLower(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  while (i < utf8.size()) {
    std::size_t at = i;
    UChar32 c = NextCodePoint(utf8, i);
    if (c < 0) {
      out.append(utf8.substr(at, i - at));
      continue;
    }
    UChar32 lower = u_tolower(c);
    uint8_t buf[U8_MAX_LENGTH];
    int32_t len = 0;
    U8_APPEND_UNSAFE(buf, len, lower);
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
  }
  return out;
}

bool IsValidUtf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (NextCodePoint(s, i) < 0) return false;
  }
  return true;
}

bool HasAlphabetic(std::string_view utf8) {
  std::size_t i = 0;
  while (i < utf8.size()) {
    UChar32 c = NextCodePoint(utf8, i);
    if (c >= 0 && u_isalpha(c)) return true;
  }
  return false;
}

}  // namespace privshard::text
