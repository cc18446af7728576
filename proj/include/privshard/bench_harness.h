#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "privshard/entity_types.h"
#include "privshard/secure_store.h"

namespace privshard::bench {

inline constexpr std::size_t kTopicCount = 10;
inline constexpr std::string_view kCsvSchemaLine = "# privshard-bench schema=1";
inline constexpr std::string_view kCsvHeader =
    "experiment,n,phase,median_ns,p90_ns,agreement";

const std::vector<std::string>& TopicVocabulary(std::size_t topic);
const std::vector<std::string>& CommonWords();

// A value planted in a synthetic document. `value` is the cleaned token the
// detector is expected to return; the raw token may carry extra edge
// punctuation.
struct InjectedValue {
  EntityKind kind;
  std::string value;
  std::size_t token_index = 0;
};

struct SyntheticDoc {
  std::string text;
  std::size_t topic = 0;
  std::vector<InjectedValue> truth;
};

struct CorpusOptions {
  // Probability that a prose word comes from the document's own topic
  // rather than a random other topic. 1.0 gives disjoint topic vocabularies.
  double separability = 1.0;
  std::size_t min_words = 12;
  std::size_t max_words = 24;
  std::size_t min_values = 1;
  std::size_t max_values = 3;
};

// Deterministic for a given (n, seed, options).
std::vector<SyntheticDoc> GenCorpus(std::size_t n, uint64_t seed,
                                    const CorpusOptions& options = {});

// A random value of `kind` drawn from the generator's value space.
std::string GenValue(EntityKind kind, std::mt19937_64& rng);

struct TopicQuery {
  std::size_t topic = 0;
  std::string text;
};

// Short prose queries, each from one topic's vocabulary.
std::vector<TopicQuery> GenTopicQueries(std::size_t count, uint64_t seed);

struct BenchConfig {
  std::vector<std::size_t> sizes;
  uint64_t seed = 42;
  std::size_t repetitions = 3;
  std::size_t k = 10;
  std::size_t queries = 20;
  double separability = 1.0;
  // Per-document estimate against which sizes are checked before running.
  std::size_t memory_budget_bytes = std::size_t{4} << 30;
  // Extra reader threads replaying the search workload while measuring.
  std::size_t concurrent_readers = 0;

  // Throws Error(kArgument) for unsorted sizes, repetitions < 3, or sizes
  // beyond the memory budget.
  void Validate() const;
};

struct BenchRow {
  std::string experiment;
  std::size_t n = 0;
  std::string phase;
  uint64_t median_ns = 0;
  uint64_t p90_ns = 0;
  double mean_ns = 0.0;
  std::optional<double> agreement;
};

struct SampleStats {
  uint64_t median = 0;
  uint64_t p90 = 0;
  double mean = 0.0;
};

// Nearest-rank median and 90th percentile.
SampleStats Summarize(std::vector<uint64_t> samples);

// Ingest timing split into AES, MAC and whole-document phases. Samples are
// totals over n documents, one per repetition.
std::vector<BenchRow> BenchBuild(const BenchConfig& config);

// Plaintext linear scan vs blind-index lookup for present and absent
// values. Samples are per query.
std::vector<BenchRow> BenchLookup(const BenchConfig& config);

// Full-corpus cosine scan vs cluster-routed search; the clustered row's
// agreement is the top-1 agreement with the full scan.
std::vector<BenchRow> BenchSearch(const BenchConfig& config);

// Sorts by (experiment, n, phase) and writes schema line, header, rows.
void WriteCsv(std::vector<BenchRow> rows, std::ostream& out);

// Ground-truth entry for the direct scan.
struct PlainEntry {
  store::DocId doc_id;
  EntityKind kind;
  std::string canonical;
};

std::vector<PlainEntry> FlattenTruth(std::span<const SyntheticDoc> docs);

// Linear scan over plaintext ground truth; ascending unique doc ids.
std::vector<store::DocId> DirectScan(std::span<const PlainEntry> truth,
                                     EntityKind kind, std::string_view value);

}  // namespace privshard::bench
