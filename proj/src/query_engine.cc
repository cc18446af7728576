#include "privshard/query_engine.h"

#include <algorithm>
#include <chrono>
#include <future>
#include <set>

#include "privshard/error.h"

namespace privshard::query {
namespace {

using Clock = std::chrono::steady_clock;

uint64_t ElapsedNs(Clock::time_point since) {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since)
          .count());
}

}  // namespace

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kExact:
      return "EXACT";
    case Mode::kRanked:
      return "RANKED";
    case Mode::kHybrid:
      return "HYBRID";
  }
  return "RANKED";
}

QueryPlan PlanQuery(std::string_view text, const Catalog& catalog) {
  QueryPlan plan;
  plan.sensitive_terms = Detect(text, catalog);

  std::string residual(text);
  for (auto it = plan.sensitive_terms.rbegin();
       it != plan.sensitive_terms.rend(); ++it) {
    residual.replace(it->char_start, it->char_end - it->char_start, " ");
  }
  plan.residual_text = std::move(residual);

  if (plan.sensitive_terms.empty()) {
    plan.mode = Mode::kRanked;
  } else {
    bool has_words = false;
    for (const auto& t : text::Tokenize(plan.residual_text)) {
      if (text::HasAlphabetic(t.text)) {
        has_words = true;
        break;
      }
    }
    plan.mode = has_words ? Mode::kHybrid : Mode::kExact;
  }
  return plan;
}

ResultSet Execute(const QueryPlan& plan, const crypto::KeyBundle* keys,
                  const store::SecureStore& store,
                  const ExecuteOptions& options) {
  const bool want_exact = plan.mode != Mode::kRanked;
  const bool want_ranked = plan.mode != Mode::kExact;
  PRIVSHARD_ENFORCE(!want_exact || keys != nullptr, ErrorCode::kAuthorization,
                    "query contains sensitive terms; a key bundle is required");

  ResultSet out;
  out.mode = plan.mode;

  auto run_exact = [&]() {
    auto t = Clock::now();
    std::set<store::DocId> ids;
    for (const EntitySpan& term : plan.sensitive_terms) {
      for (store::DocId id : store.LookupSensitive(term.kind, term.value, *keys)) {
        ids.insert(id);
      }
    }
    out.exact_ns = ElapsedNs(t);
    return ids;
  };
  auto run_ranked = [&]() {
    auto t = Clock::now();
    auto hits = store.SearchNonSensitive(plan.residual_text, options.top_n,
                                         options.probe);
    out.ranked_ns = ElapsedNs(t);
    return hits;
  };

  std::set<store::DocId> exact;
  std::vector<cluster::Hit> ranked;
  if (want_exact && want_ranked && options.concurrent) {
    auto ranked_future = std::async(std::launch::async, run_ranked);
    exact = run_exact();
    ranked = ranked_future.get();
  } else {
    if (want_exact) exact = run_exact();
    if (want_ranked) ranked = run_ranked();
  }

  for (store::DocId id : exact) {
    out.results.push_back({id, 1.0, true, false});
  }
  for (const cluster::Hit& h : ranked) {
    if (exact.count(h.doc_id)) {
      auto it = std::find_if(out.results.begin(), out.results.end(),
                             [&](const ResultEntry& e) { return e.doc_id == h.doc_id; });
      it->ranked_hit = true;
      continue;
    }
    out.results.push_back({h.doc_id, h.score, false, true});
  }
  return out;
}

}  // namespace privshard::query
