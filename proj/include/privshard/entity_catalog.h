#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "privshard/entity_types.h"
#include "privshard/text_pipeline.h"

namespace privshard {

// One detected sensitive value. Offsets cover the cleaned region of the
// token in the source text (UTF-8 bytes).
struct EntitySpan {
  EntityKind kind;
  std::string value;
  std::size_t token_index = 0;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  bool operator==(const EntitySpan&) const = default;
};

// Ordered pattern list. Evaluation order is list order; the first match
// for a token wins.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(const std::vector<std::pair<EntityKind, std::string>>& entries);

  // SSN, MONEY, URL, EMAIL, CREDIT_CARD, PHONE.
  static Catalog Default();

  // Override format: one `KIND<TAB>regex` per line, order = line order.
  // Blank lines are ignored. Throws Error(kConfig) with the line number.
  static Catalog Parse(std::string_view text);
  static Catalog LoadFile(const std::filesystem::path& path);

  // Appends a pattern at the end of the evaluation order.
  void Add(EntityKind kind, std::string pattern);
  // Replaces every pattern of `kind` with a single one at the position of
  // the first; appends when the kind had none.
  void Replace(EntityKind kind, std::string pattern);

  const std::vector<EntityPattern>& patterns() const { return patterns_; }
  bool empty() const { return patterns_.empty(); }

  // Canonical text in the override format; stable input for hashing.
  std::string Serialize() const;

 private:
  void Renumber();

  std::vector<EntityPattern> patterns_;
};

// Builds one span per labeled token. `labels` lines up with the non-dropped
// entries of `tokens`. Throws Error(kInternal) on a length mismatch or an
// ill-formed label sequence.
std::vector<EntitySpan> SpansFromLabels(std::span<const text::CleanToken> tokens,
                                        std::span<const text::IobLabel> labels);

// Detection contract. The regex detector is the default; a trained
// sequence tagger can implement the same interface.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::vector<EntitySpan> Detect(std::string_view text) const = 0;
};

class RegexDetector final : public Detector {
 public:
  explicit RegexDetector(Catalog catalog) : catalog_(std::move(catalog)) {}

  std::vector<EntitySpan> Detect(std::string_view text) const override;

  const Catalog& catalog() const { return catalog_; }

 private:
  Catalog catalog_;
};

// tokenize -> clean -> label -> spans.
std::vector<EntitySpan> Detect(std::string_view text, const Catalog& catalog);

}  // namespace privshard
