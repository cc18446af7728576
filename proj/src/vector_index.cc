#include "privshard/vector_index.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "privshard/error.h"

namespace privshard::vec {

namespace {

bool IsPlaceholderBody(std::string_view s) {
  // KIND#digits
  std::size_t hash = s.find('#');
  if (hash == std::string_view::npos || hash == 0 || hash + 1 == s.size()) {
    return false;
  }
  for (std::size_t i = 0; i < hash; ++i) {
    if (!((s[i] >= 'A' && s[i] <= 'Z') || s[i] == '_')) return false;
  }
  for (std::size_t i = hash + 1; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

}  // namespace

std::string MakePlaceholder(EntityKind kind, std::size_t ordinal) {
  return "[[" + std::string(KindName(kind)) + "#" + std::to_string(ordinal) +
         "]]";
}

bool IsPlaceholderToken(const text::CleanToken& token) {
  const std::string& raw = token.original.text;
  std::size_t open = raw.find("[[");
  if (open == std::string::npos) return false;
  std::size_t close = raw.find("]]", open + 2);
  if (close == std::string::npos) return false;
  if (!IsPlaceholderBody(std::string_view(raw).substr(open + 2, close - open - 2))) {
    return false;
  }
  // Only edge punctuation may surround the marker.
  return text::CleanText(raw.substr(0, open)).empty() &&
         text::CleanText(raw.substr(close + 2)).empty();
}

std::vector<std::string> Terms(std::string_view text) {
  std::vector<std::string> out;
  for (const text::CleanToken& t : text::TokenizeAndClean(text)) {
    if (t.dropped() || IsPlaceholderToken(t)) continue;
    out.push_back(text::ToLower(t.cleaned));
  }
  return out;
}

Vocabulary Vocabulary::Fit(std::span<const std::string> corpus) {
  PRIVSHARD_ENFORCE(!corpus.empty(), ErrorCode::kArgument,
                    "cannot fit a vocabulary on an empty corpus");
  std::map<std::string, uint32_t> df;
  for (const std::string& doc : corpus) {
    std::vector<std::string> terms = Terms(doc);
    std::set<std::string> unique(terms.begin(), terms.end());
    for (const std::string& t : unique) ++df[t];
  }
  Vocabulary v;
  v.doc_count_ = corpus.size();
  v.entries_.reserve(df.size());
  for (auto& [term, count] : df) {
    v.entries_.push_back({term, static_cast<TermId>(v.entries_.size()), count});
  }
  v.Index();
  return v;
}

Vocabulary Vocabulary::FromEntries(std::vector<Entry> entries,
                                   std::size_t doc_count) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    PRIVSHARD_ENFORCE(entries[i].id == i, ErrorCode::kConfig,
                      "vocabulary ids are not contiguous from 0");
    PRIVSHARD_ENFORCE(entries[i].df >= 1 && entries[i].df <= doc_count,
                      ErrorCode::kConfig,
                      "document frequency out of range for term `" +
                          entries[i].term + "`");
  }
  Vocabulary v;
  v.entries_ = std::move(entries);
  v.doc_count_ = doc_count;
  v.Index();
  PRIVSHARD_ENFORCE(v.ids_.size() == v.entries_.size(), ErrorCode::kConfig,
                    "duplicate vocabulary term");
  return v;
}

void Vocabulary::Index() {
  ids_.clear();
  idf_.clear();
  ids_.reserve(entries_.size());
  idf_.reserve(entries_.size());
  const double n = static_cast<double>(doc_count_);
  for (const Entry& e : entries_) {
    ids_.emplace(e.term, e.id);
    idf_.push_back(std::log((1.0 + n) / (1.0 + e.df)) + 1.0);
  }
}

std::optional<TermId> Vocabulary::Id(std::string_view term) const {
  auto it = ids_.find(std::string(term));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TfIdfVector::TfIdfVector(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    PRIVSHARD_ENFORCE(std::isfinite(entries_[i].second) &&
                          entries_[i].second >= 0.0,
                      ErrorCode::kArgument, "invalid TF-IDF weight");
    PRIVSHARD_ENFORCE(i == 0 || entries_[i - 1].first != entries_[i].first,
                      ErrorCode::kArgument, "duplicate term id in vector");
  }
  norm_ = RecomputeNorm();
}

double TfIdfVector::RecomputeNorm() const {
  double sum = 0.0;
  for (const auto& [id, w] : entries_) sum += w * w;
  return std::sqrt(sum);
}

double TfIdfVector::Dot(const TfIdfVector& other) const {
  double sum = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      sum += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return sum;
}

TfIdfVector TfIdfVector::Scaled(double factor) const {
  std::vector<Entry> scaled = entries_;
  for (auto& e : scaled) e.second *= factor;
  return TfIdfVector(std::move(scaled));
}

TfIdfVector Vectorize(std::string_view doc, const Vocabulary& vocab) {
  std::vector<std::string> terms = Terms(doc);
  if (terms.empty()) return {};
  std::map<TermId, uint32_t> counts;
  for (const std::string& t : terms) {
    if (auto id = vocab.Id(t)) ++counts[*id];
  }
  const double total = static_cast<double>(terms.size());
  std::vector<TfIdfVector::Entry> entries;
  entries.reserve(counts.size());
  for (auto [id, count] : counts) {
    entries.emplace_back(id, (count / total) * vocab.idf(id));
  }
  return TfIdfVector(std::move(entries));
}

double CosineSimilarity(const TfIdfVector& q, const TfIdfVector& d) {
  if (q.norm() == 0.0 || d.norm() == 0.0) return 0.0;
  double score = q.Dot(d) / (q.norm() * d.norm());
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace privshard::vec
