#include "privshard/entity_catalog.h"

#include <boost/regex.hpp>

#include <fstream>
#include <sstream>

#include "privshard/error.h"

namespace privshard {

namespace {

constexpr std::string_view kDefaultEmail =
    R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})";

}  // namespace

std::string_view KindName(EntityKind kind) {
  switch (kind) {
    case EntityKind::kEmail:
      return "EMAIL";
    case EntityKind::kPhone:
      return "PHONE";
    case EntityKind::kSsn:
      return "SSN";
    case EntityKind::kMoney:
      return "MONEY";
    case EntityKind::kCreditCard:
      return "CREDIT_CARD";
    case EntityKind::kUrl:
      return "URL";
    case EntityKind::kPassport:
      return "PASSPORT";
  }
  return "UNKNOWN";
}

std::optional<EntityKind> ParseKind(std::string_view name) {
  for (EntityKind k : kAllEntityKinds) {
    if (KindName(k) == name) return k;
  }
  return std::nullopt;
}

struct EntityPattern::Compiled {
  boost::regex re;
};

EntityPattern::EntityPattern(EntityKind kind, std::string pattern,
                             std::size_t order)
    : kind_(kind), pattern_(std::move(pattern)), order_(order) {
  PRIVSHARD_ENFORCE(!pattern_.empty(), ErrorCode::kConfig,
                    "empty pattern for " + std::string(KindName(kind_)));
  try {
    compiled_ = std::make_shared<const Compiled>(
        Compiled{boost::regex(pattern_, boost::regex::perl)});
  } catch (const boost::regex_error& e) {
    throw Error(ErrorCode::kConfig, "malformed pattern for " +
                                        std::string(KindName(kind_)) + " `" +
                                        pattern_ + "`: " + e.what());
  }
}

bool EntityPattern::Matches(std::string_view token) const {
  return boost::regex_match(token.begin(), token.end(), compiled_->re);
}

Catalog::Catalog(
    const std::vector<std::pair<EntityKind, std::string>>& entries) {
  for (const auto& [kind, pattern] : entries) Add(kind, pattern);
}

Catalog Catalog::Default() {
  return Catalog({
      {EntityKind::kSsn, R"(\d{3}-\d{2}-\d{4})"},
      {EntityKind::kMoney, R"(\$\d{1,3}(?:,\d{3})*(?:\.\d{2})?)"},
      {EntityKind::kUrl, R"(https?://[^\s]+)"},
      {EntityKind::kEmail, std::string(kDefaultEmail)},
      {EntityKind::kCreditCard, R"(\d{13,16})"},
      {EntityKind::kPhone, R"(\+\d{6,15})"},
  });
}

Catalog Catalog::Parse(std::string_view text) {
  Catalog catalog;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    PRIVSHARD_ENFORCE(tab != std::string_view::npos, ErrorCode::kConfig,
                      "catalog line " + std::to_string(line_no) +
                          ": expected KIND<TAB>regex");
    auto kind = ParseKind(line.substr(0, tab));
    PRIVSHARD_ENFORCE(kind.has_value(), ErrorCode::kConfig,
                      "catalog line " + std::to_string(line_no) +
                          ": unknown kind `" +
                          std::string(line.substr(0, tab)) + "`");
    try {
      catalog.Add(*kind, std::string(line.substr(tab + 1)));
    } catch (const Error& e) {
      throw Error(e.code(),
                  "catalog line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return catalog;
}

Catalog Catalog::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  PRIVSHARD_ENFORCE(in.good(), ErrorCode::kConfig,
                    "cannot read catalog file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

void Catalog::Add(EntityKind kind, std::string pattern) {
  patterns_.emplace_back(kind, std::move(pattern), patterns_.size());
}

void Catalog::Replace(EntityKind kind, std::string pattern) {
  std::vector<EntityPattern> next;
  bool placed = false;
  for (const EntityPattern& p : patterns_) {
    if (p.kind() != kind) {
      next.push_back(p);
    } else if (!placed) {
      next.emplace_back(kind, pattern, 0);
      placed = true;
    }
  }
  if (!placed) next.emplace_back(kind, std::move(pattern), 0);
  patterns_ = std::move(next);
  Renumber();
}

void Catalog::Renumber() {
  std::vector<EntityPattern> renumbered;
  renumbered.reserve(patterns_.size());
  for (const EntityPattern& p : patterns_) {
    renumbered.emplace_back(p.kind(), p.pattern(), renumbered.size());
  }
  patterns_ = std::move(renumbered);
}

std::string Catalog::Serialize() const {
  std::string out;
  for (const EntityPattern& p : patterns_) {
    out += KindName(p.kind());
    out += '\t';
    out += p.pattern();
    out += '\n';
  }
  return out;
}

std::vector<EntitySpan> SpansFromLabels(std::span<const text::CleanToken> tokens,
                                        std::span<const text::IobLabel> labels) {
  PRIVSHARD_ENFORCE(text::IsWellFormed(labels), ErrorCode::kInternal,
                    "ill-formed IOB label sequence");
  std::vector<EntitySpan> spans;
  std::size_t li = 0;
  for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
    const text::CleanToken& t = tokens[ti];
    if (t.dropped()) continue;
    PRIVSHARD_ENFORCE(li < labels.size(), ErrorCode::kInternal,
                      "fewer labels than labelable tokens");
    const text::IobLabel& label = labels[li++];
    if (label.tag == text::IobTag::kOutside) continue;
    spans.push_back({*label.kind, t.cleaned, ti, t.cleaned_start(),
                     t.cleaned_end()});
  }
  PRIVSHARD_ENFORCE(li == labels.size(), ErrorCode::kInternal,
                    "more labels than labelable tokens");
  return spans;
}

std::vector<EntitySpan> RegexDetector::Detect(std::string_view text) const {
  return privshard::Detect(text, catalog_);
}

std::vector<EntitySpan> Detect(std::string_view text, const Catalog& catalog) {
  std::vector<text::CleanToken> tokens = text::TokenizeAndClean(text);
  std::vector<std::string> labelable;
  labelable.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!t.dropped()) labelable.push_back(t.cleaned);
  }
  std::vector<text::IobLabel> labels =
      text::LabelTokens(labelable, catalog.patterns());
  return SpansFromLabels(tokens, labels);
}

}  // namespace privshard
