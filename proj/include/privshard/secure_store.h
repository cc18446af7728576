#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "privshard/cluster_engine.h"
#include "privshard/crypto_vault.h"
#include "privshard/entity_catalog.h"
#include "privshard/vector_index.h"

namespace privshard::store {

using cluster::ClusterId;
using cluster::DocId;

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kRecordsFile = "store.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";

struct EntityEntry {
  EntityKind kind;
  uint32_t ordinal = 0;
  crypto::Ciphertext ciphertext;
  crypto::BlindIndex index;
};

// Stored document. Its TF-IDF vector lives at SecureStore::vectors()[id].
struct SecureRecord {
  DocId id = 0;
  std::string redacted_text;
  std::vector<EntityEntry> entities;
  std::optional<ClusterId> cluster;  // set by Finalize
};

struct StoreManifest {
  int version = kFormatVersion;
  std::size_t record_count = 0;
  std::string key_fingerprint;
  bool finalized = false;
  std::size_t k = 0;
  uint64_t seed = 0;
  std::size_t max_iter = 0;
  std::size_t iterations_run = 0;
  double final_sse = 0.0;
  std::string catalog_hash;
};

// Per-phase wall-clock accumulators for ingestion, in nanoseconds.
struct PhaseTimers {
  uint64_t detect_ns = 0;
  uint64_t encrypt_ns = 0;
  uint64_t index_ns = 0;
  uint64_t total_ns = 0;
  uint64_t values = 0;
};

// Ingest-then-finalize document store. While building, a single writer
// appends records; after Finalize the store is read-only and safe for any
// number of concurrent readers.
class SecureStore {
 public:
  SecureStore(const crypto::KeyBundle& keys, Catalog catalog);

  const StoreManifest& manifest() const { return manifest_; }
  const Catalog& catalog() const { return catalog_; }
  bool finalized() const { return manifest_.finalized; }
  std::size_t size() const { return records_.size(); }

  const std::vector<SecureRecord>& records() const { return records_; }
  const SecureRecord& record(DocId id) const;
  const std::vector<vec::TfIdfVector>& vectors() const { return vectors_; }
  const vec::Vocabulary& vocabulary() const;
  const cluster::ClusterModel& model() const;

  // detect -> encrypt -> blind-index -> redact. All-or-nothing: a failure
  // leaves the store unchanged. Throws Error(kState) once finalized and
  // Error(kAuthorization) for keys that did not open the store.
  DocId Ingest(std::string_view text, const crypto::KeyBundle& keys,
               PhaseTimers* timers = nullptr);

  // Fits the vocabulary, vectorizes every record and clusters. May be
  // repeated; the same (k, seed, max_iter) reproduces the same model.
  const StoreManifest& Finalize(std::size_t k, uint64_t seed,
                                std::size_t max_iter = 100);

  // Exact-match search over the blind index. Returns ascending unique doc
  // ids and never decrypts.
  std::vector<DocId> LookupSensitive(EntityKind kind, std::string_view value,
                                     const crypto::KeyBundle& keys) const;

  // TF-IDF + cluster-routed cosine ranking over redacted text.
  std::vector<cluster::Hit> SearchNonSensitive(
      std::string_view query, std::size_t top_n, std::size_t probe = 1,
      cluster::SearchStats* stats = nullptr) const;

  // Same ranking over every record; reference path for routed search.
  std::vector<cluster::Hit> SearchFullScan(
      std::string_view query, std::size_t top_n,
      cluster::SearchStats* stats = nullptr) const;

  // Decrypts one entity. Throws Error(kNotFound) for an unknown id or
  // ordinal and Error(kAuthentication) for a wrong key or tampered entry.
  std::string Reveal(DocId id, std::size_t ordinal,
                     const crypto::KeyBundle& keys) const;

  // Number of blind-index map probes served; instrumentation only.
  uint64_t blind_index_probes() const { return counters_->probes.load(); }

  std::string SerializeRecords() const;
  std::string SerializeManifest() const;
  // Writes store.jsonl and manifest.json into `dir` (created if missing).
  void Save(const std::filesystem::path& dir) const;
  static SecureStore Load(const std::filesystem::path& dir);
  static SecureStore Parse(std::string_view manifest_json,
                           std::string_view records_jsonl);

 private:
  struct Counters {
    std::atomic<uint64_t> probes{0};
  };
  struct Posting {
    DocId doc_id;
    uint32_t ordinal;
  };

  SecureStore() = default;

  void CheckKeys(const crypto::KeyBundle& keys) const;
  void RequireFinalized(const char* op) const;
  void AddPostings(const SecureRecord& rec);

  StoreManifest manifest_;
  Catalog catalog_;
  std::vector<SecureRecord> records_;
  std::vector<vec::TfIdfVector> vectors_;
  std::optional<vec::Vocabulary> vocab_;
  std::optional<cluster::ClusterModel> model_;
  std::unordered_map<crypto::BlindIndex, std::vector<Posting>,
                     crypto::BlindIndexHash>
      blind_index_;
  std::shared_ptr<Counters> counters_ = std::make_shared<Counters>();
};

// AAD binding a ciphertext to its slot in the store.
std::string EntityAad(DocId id, uint32_t ordinal, EntityKind kind);

}  // namespace privshard::store
