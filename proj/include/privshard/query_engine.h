#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "privshard/entity_catalog.h"
#include "privshard/secure_store.h"

namespace privshard::query {

enum class Mode { kExact, kRanked, kHybrid };

std::string_view ModeName(Mode mode);

// EXACT: only sensitive terms and nothing alphabetic left over.
// RANKED: no sensitive terms. HYBRID: both.
struct QueryPlan {
  std::vector<EntitySpan> sensitive_terms;
  std::string residual_text;
  Mode mode = Mode::kRanked;
};

QueryPlan PlanQuery(std::string_view text, const Catalog& catalog);

struct ResultEntry {
  store::DocId doc_id = 0;
  double score = 0.0;
  bool exact_hit = false;
  bool ranked_hit = false;

  bool operator==(const ResultEntry&) const = default;
};

// Exact hits first (score 1.0, ascending id), then ranked hits not already
// present. Doc ids are unique.
struct ResultSet {
  Mode mode = Mode::kRanked;
  std::vector<ResultEntry> results;
  uint64_t exact_ns = 0;
  uint64_t ranked_ns = 0;
};

struct ExecuteOptions {
  std::size_t top_n = 10;
  std::size_t probe = 1;
  // Run the exact and ranked paths of a HYBRID plan concurrently.
  bool concurrent = false;
};

// `keys` may be null for RANKED plans; any other plan without keys throws
// Error(kAuthorization).
ResultSet Execute(const QueryPlan& plan, const crypto::KeyBundle* keys,
                  const store::SecureStore& store,
                  const ExecuteOptions& options = {});

}  // namespace privshard::query
