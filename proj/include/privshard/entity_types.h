#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace privshard {

// Sensitive-value taxonomy. Closed set; PASSPORT ships without a default
// pattern.
enum class EntityKind {
  kEmail,
  kPhone,
  kSsn,
  kMoney,
  kCreditCard,
  kUrl,
  kPassport,
};

inline constexpr std::array<EntityKind, 7> kAllEntityKinds = {
    EntityKind::kEmail, EntityKind::kPhone,      EntityKind::kSsn,
    EntityKind::kMoney, EntityKind::kCreditCard, EntityKind::kUrl,
    EntityKind::kPassport};

// Upper-case wire name ("EMAIL", "CREDIT_CARD", ...).
std::string_view KindName(EntityKind kind);
std::optional<EntityKind> ParseKind(std::string_view name);

// One catalog entry. The regex is compiled on construction and always
// matched against the whole token.
class EntityPattern {
 public:
  // Throws Error(kConfig) naming the pattern when it does not compile.
  EntityPattern(EntityKind kind, std::string pattern, std::size_t order);

  EntityKind kind() const { return kind_; }
  const std::string& pattern() const { return pattern_; }
  std::size_t order() const { return order_; }

  bool Matches(std::string_view token) const;

 private:
  struct Compiled;

  EntityKind kind_;
  std::string pattern_;
  std::size_t order_;
  std::shared_ptr<const Compiled> compiled_;
};

}  // namespace privshard
