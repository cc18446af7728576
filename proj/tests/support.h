#pragma once

// Shared helpers for the test binaries: scratch directories, random input
// generators and an independent detection oracle.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <random>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "privshard/entity_types.h"

namespace privshard::testing {

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("privshard-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Random UTF-8 string mixing ASCII letters, digits, punctuation, spaces and
// multi-byte code points (including punctuation outside ASCII).
inline std::string RandomUnicode(std::mt19937_64& rng, std::size_t max_cps) {
  static const std::vector<std::string> kPool = {
      "a", "Z", "7", "@", ".", ",", "(", ")", "-", "$", "+", "_", "'",
      "\"", " ", " ", "\t", "\n", "é", "ß", "Ω", "中", "文", "«", "»",
      "—", "“", "”", "…", "¡", "¿", "€", "😀", " ", " ", "、"};
  std::uniform_int_distribution<std::size_t> len(0, max_cps);
  std::uniform_int_distribution<std::size_t> pick(0, kPool.size() - 1);
  std::string out;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) out += kPool[pick(rng)];
  return out;
}

inline std::string RandomBytes(std::mt19937_64& rng, std::size_t min_len,
                               std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> byte(0, 255);
  std::string out(len(rng), '\0');
  for (auto& c : out) c = static_cast<char>(byte(rng));
  return out;
}

// ---------------------------------------------------------------------------
// Detection oracle. ASCII-only re-implementation of the pipeline with
// std::regex: split on ASCII whitespace, strip ASCII punctuation (not
// symbols) from both edges, match each cleaned token against each pattern in
// catalog order.

struct OracleSpan {
  EntityKind kind;
  std::string value;
  std::size_t token_index;
  std::size_t start;
  std::size_t end;

  bool operator==(const OracleSpan&) const = default;
};

inline bool OracleIsPunct(char c) {
  static constexpr std::string_view kPunct = "!\"#%&'()*,-./:;?@[\\]_{}";
  return kPunct.find(c) != std::string_view::npos;
}

struct OracleToken {
  std::size_t start;
  std::size_t end;
  std::string cleaned;
};

inline std::vector<OracleToken> OracleTokens(std::string_view text) {
  std::vector<OracleToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    std::size_t s = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i == s) break;
    std::size_t a = s, b = i;
    while (a < b && OracleIsPunct(text[a])) ++a;
    while (b > a && OracleIsPunct(text[b - 1])) --b;
    out.push_back({a, b, std::string(text.substr(a, b - a))});
  }
  return out;
}

using OraclePatterns = std::vector<std::pair<EntityKind, std::regex>>;

inline OraclePatterns CompileOracle(
    const std::vector<std::pair<EntityKind, std::string>>& entries) {
  OraclePatterns out;
  for (const auto& [kind, pattern] : entries) {
    out.emplace_back(kind, std::regex(pattern, std::regex::ECMAScript));
  }
  return out;
}

// The default catalog written out independently of the library.
inline const OraclePatterns& DefaultOracle() {
  static const OraclePatterns patterns = CompileOracle({
      {EntityKind::kSsn, R"(\d{3}-\d{2}-\d{4})"},
      {EntityKind::kMoney, R"(\$\d{1,3}(?:,\d{3})*(?:\.\d{2})?)"},
      {EntityKind::kUrl, R"(https?://[^\s]+)"},
      {EntityKind::kEmail, R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})"},
      {EntityKind::kCreditCard, R"(\d{13,16})"},
      {EntityKind::kPhone, R"(\+\d{6,15})"},
  });
  return patterns;
}

// Labels as "O" / "B-KIND" / "I-KIND" strings over the non-dropped tokens.
inline std::vector<std::string> OracleLabels(
    const std::vector<std::string>& tokens, const OraclePatterns& patterns) {
  std::vector<std::string> out;
  std::string active;
  for (const auto& t : tokens) {
    std::string hit;
    for (const auto& [kind, re] : patterns) {
      if (std::regex_match(t, re)) {
        hit = std::string(KindName(kind));
        break;
      }
    }
    if (hit.empty()) {
      out.push_back("O");
      active.clear();
    } else {
      out.push_back((hit == active ? "I-" : "B-") + hit);
      active = hit;
    }
  }
  return out;
}

// Spans indexed by position in the full token list.
inline std::vector<OracleSpan> OracleDetect(std::string_view text,
                                            const OraclePatterns& patterns) {
  std::vector<OracleSpan> out;
  auto tokens = OracleTokens(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.cleaned.empty()) continue;
    for (const auto& [kind, re] : patterns) {
      if (std::regex_match(t.cleaned, re)) {
        out.push_back({kind, t.cleaned, i, t.start, t.end});
        break;
      }
    }
  }
  return out;
}

// Leakage check for serialized bytes. Values with a letter or symbol are
// searched as plain substrings. Purely numeric values (digits and '.') only
// count when they stand alone, since base64 fields, hex digests and printed
// doubles contain arbitrary digit runs.
inline bool ContainsValue(std::string_view bytes, std::string_view value) {
  if (value.empty()) return false;
  bool numeric = true;
  for (char c : value) {
    numeric &= std::isdigit(static_cast<unsigned char>(c)) || c == '.';
  }
  if (!numeric) return bytes.find(value) != std::string_view::npos;
  auto glued = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '+' ||
           c == '/';
  };
  for (std::size_t pos = bytes.find(value); pos != std::string_view::npos;
       pos = bytes.find(value, pos + 1)) {
    std::size_t end = pos + value.size();
    bool left_ok = pos == 0 || !glued(bytes[pos - 1]);
    bool right_ok = end == bytes.size() || !glued(bytes[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

}  // namespace privshard::testing
