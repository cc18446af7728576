#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "privshard/entity_types.h"
#include "privshard/text_pipeline.h"

namespace privshard::vec {

inline constexpr std::string_view kIdfFormulaTag = "ln((1+N)/(1+df))+1";
inline constexpr std::string_view kTfFormulaTag = "count/token_count";

// Redaction marker written in place of a sensitive value: [[KIND#n]].
std::string MakePlaceholder(EntityKind kind, std::size_t ordinal);

// True when the token is a redaction marker, possibly with edge
// punctuation outside the brackets ("[[EMAIL#0]],").
bool IsPlaceholderToken(const text::CleanToken& token);

// Index terms of a text: lowercased cleaned tokens, skipping dropped tokens
// and placeholders. Repeats are kept.
std::vector<std::string> Terms(std::string_view text);

using TermId = uint32_t;

class Vocabulary {
 public:
  struct Entry {
    std::string term;
    TermId id;
    uint32_t df;
  };

  // Throws Error(kArgument) on an empty corpus. Ids follow the sorted term
  // order.
  static Vocabulary Fit(std::span<const std::string> corpus);

  // Rebuilds from persisted entries. Throws Error(kConfig) when ids are not
  // contiguous from 0 or a df is outside [1, doc_count].
  static Vocabulary FromEntries(std::vector<Entry> entries,
                                std::size_t doc_count);

  std::optional<TermId> Id(std::string_view term) const;
  const std::string& term(TermId id) const { return entries_[id].term; }
  uint32_t df(TermId id) const { return entries_[id].df; }
  double idf(TermId id) const { return idf_[id]; }
  std::size_t size() const { return entries_.size(); }
  std::size_t doc_count() const { return doc_count_; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  void Index();

  std::vector<Entry> entries_;
  std::vector<double> idf_;
  std::unordered_map<std::string, TermId> ids_;
  std::size_t doc_count_ = 0;
};

// Sparse non-negative weights sorted by term id, with the L2 norm cached.
class TfIdfVector {
 public:
  using Entry = std::pair<TermId, double>;

  TfIdfVector() = default;
  // Sorts and validates entries. Throws Error(kArgument) on a negative or
  // non-finite weight or a duplicate id.
  explicit TfIdfVector(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  double norm() const { return norm_; }
  bool empty() const { return entries_.empty(); }
  double RecomputeNorm() const;

  double Dot(const TfIdfVector& other) const;
  TfIdfVector Scaled(double factor) const;

  bool operator==(const TfIdfVector&) const = default;

 private:
  std::vector<Entry> entries_;
  double norm_ = 0.0;
};

// tf = count / token_count, idf smoothed, out-of-vocabulary terms ignored.
TfIdfVector Vectorize(std::string_view doc, const Vocabulary& vocab);

// (q . d) / (|q| |d|); 0 when either norm is 0.
double CosineSimilarity(const TfIdfVector& q, const TfIdfVector& d);

}  // namespace privshard::vec
