#include "privshard/secure_store.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "privshard/encoding.h"
#include "privshard/error.h"

namespace privshard::store {
namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

uint64_t ElapsedNs(Clock::time_point since) {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since)
          .count());
}

std::string CatalogHash(const Catalog& catalog) {
  std::string text = catalog.Serialize();
  return HexEncode(crypto::Sha256(AsBytes(text)));
}

std::size_t CountPlaceholders(std::string_view text) {
  std::size_t n = 0;
  for (const auto& t : text::TokenizeAndClean(text)) {
    if (vec::IsPlaceholderToken(t)) ++n;
  }
  return n;
}

template <std::size_t N>
std::array<uint8_t, N> DecodeFixed(const json& j, const char* field) {
  auto raw = Base64Decode(j.at(field).get<std::string>());
  PRIVSHARD_ENFORCE(raw && raw->size() == N, ErrorCode::kConfig,
                    std::string("malformed record field ") + field);
  std::array<uint8_t, N> out{};
  std::copy(raw->begin(), raw->end(), out.begin());
  return out;
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    PRIVSHARD_ENFORCE(out.good(), ErrorCode::kIo,
                      "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    PRIVSHARD_ENFORCE(out.good(), ErrorCode::kIo,
                      "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  PRIVSHARD_ENFORCE(in.good(), ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string EntityAad(DocId id, uint32_t ordinal, EntityKind kind) {
  return "privshard/v1|doc=" + std::to_string(id) +
         "|ord=" + std::to_string(ordinal) + "|kind=" + std::string(KindName(kind));
}

SecureStore::SecureStore(const crypto::KeyBundle& keys, Catalog catalog)
    : catalog_(std::move(catalog)) {
  manifest_.key_fingerprint = keys.FingerprintHex();
  manifest_.catalog_hash = CatalogHash(catalog_);
}

const SecureRecord& SecureStore::record(DocId id) const {
  PRIVSHARD_ENFORCE(id < records_.size(), ErrorCode::kNotFound,
                    "no record with id " + std::to_string(id));
  return records_[id];
}

const vec::Vocabulary& SecureStore::vocabulary() const {
  RequireFinalized("vocabulary");
  return *vocab_;
}

const cluster::ClusterModel& SecureStore::model() const {
  RequireFinalized("model");
  return *model_;
}

void SecureStore::CheckKeys(const crypto::KeyBundle& keys) const {
  PRIVSHARD_ENFORCE(keys.FingerprintHex() == manifest_.key_fingerprint,
                    ErrorCode::kAuthorization,
                    "key fingerprint does not match this store");
}

void SecureStore::RequireFinalized(const char* op) const {
  PRIVSHARD_ENFORCE(manifest_.finalized, ErrorCode::kState,
                    std::string(op) + " requires a finalized store");
}

void SecureStore::AddPostings(const SecureRecord& rec) {
  for (const EntityEntry& e : rec.entities) {
    blind_index_[e.index].push_back({rec.id, e.ordinal});
  }
}

DocId SecureStore::Ingest(std::string_view text, const crypto::KeyBundle& keys,
                          PhaseTimers* timers) {
  PRIVSHARD_ENFORCE(!manifest_.finalized, ErrorCode::kState,
                    "store is finalized and read-only");
  CheckKeys(keys);
  PRIVSHARD_ENFORCE(text::IsValidUtf8(text), ErrorCode::kArgument,
                    "document is not valid UTF-8");
  const auto start = Clock::now();

  SecureRecord rec;
  rec.id = records_.size();

  auto t = Clock::now();
  std::vector<EntitySpan> spans = Detect(text, catalog_);
  if (timers) timers->detect_ns += ElapsedNs(t);

  rec.entities.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const EntitySpan& span = spans[i];
    EntityEntry entry;
    entry.kind = span.kind;
    entry.ordinal = static_cast<uint32_t>(i);

    std::string aad = EntityAad(rec.id, entry.ordinal, span.kind);
    t = Clock::now();
    entry.ciphertext = crypto::EncryptValue(span.value, keys, AsBytes(aad));
    if (timers) timers->encrypt_ns += ElapsedNs(t);

    t = Clock::now();
    entry.index = crypto::ComputeBlindIndex(span.value, span.kind, keys);
    if (timers) timers->index_ns += ElapsedNs(t);

    rec.entities.push_back(std::move(entry));
  }

  // Spans are ordered left to right; splice from the back so earlier
  // offsets stay valid.
  rec.redacted_text = std::string(text);
  for (std::size_t i = spans.size(); i-- > 0;) {
    const EntitySpan& span = spans[i];
    rec.redacted_text.replace(span.char_start, span.char_end - span.char_start,
                              vec::MakePlaceholder(span.kind, i));
  }

  AddPostings(rec);
  records_.push_back(std::move(rec));
  manifest_.record_count = records_.size();
  if (timers) {
    timers->values += spans.size();
    timers->total_ns += ElapsedNs(start);
  }
  return records_.back().id;
}

const StoreManifest& SecureStore::Finalize(std::size_t k, uint64_t seed,
                                           std::size_t max_iter) {
  PRIVSHARD_ENFORCE(!records_.empty(), ErrorCode::kArgument,
                    "cannot finalize an empty store");
  PRIVSHARD_ENFORCE(k >= 1 && k <= records_.size(), ErrorCode::kArgument,
                    "k (" + std::to_string(k) + ") must be in [1, " +
                        std::to_string(records_.size()) + "]");
  std::vector<std::string> corpus;
  corpus.reserve(records_.size());
  for (const auto& r : records_) corpus.push_back(r.redacted_text);

  vec::Vocabulary vocab = vec::Vocabulary::Fit(corpus);
  std::vector<vec::TfIdfVector> vectors;
  vectors.reserve(corpus.size());
  for (const auto& doc : corpus) vectors.push_back(vec::Vectorize(doc, vocab));

  cluster::ClusterModel model =
      cluster::KMeansFit(vectors, vocab.size(), k, max_iter, seed);

  for (auto& r : records_) r.cluster = model.assignment[r.id];
  vocab_ = std::move(vocab);
  vectors_ = std::move(vectors);
  manifest_.finalized = true;
  manifest_.k = k;
  manifest_.seed = seed;
  manifest_.max_iter = max_iter;
  manifest_.iterations_run = model.iterations_run;
  manifest_.final_sse = model.final_sse;
  model_ = std::move(model);
  return manifest_;
}

std::vector<DocId> SecureStore::LookupSensitive(
    EntityKind kind, std::string_view value,
    const crypto::KeyBundle& keys) const {
  CheckKeys(keys);
  RequireFinalized("lookup");
  crypto::BlindIndex ix = crypto::ComputeBlindIndex(value, kind, keys);
  counters_->probes.fetch_add(1, std::memory_order_relaxed);
  auto it = blind_index_.find(ix);
  if (it == blind_index_.end()) return {};
  std::vector<DocId> ids;
  ids.reserve(it->second.size());
  for (const Posting& p : it->second) ids.push_back(p.doc_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<cluster::Hit> SecureStore::SearchNonSensitive(
    std::string_view query, std::size_t top_n, std::size_t probe,
    cluster::SearchStats* stats) const {
  RequireFinalized("search");
  vec::TfIdfVector q = vec::Vectorize(query, *vocab_);
  return cluster::RankedSearch(q, *model_, vectors_, top_n, probe, stats);
}

std::vector<cluster::Hit> SecureStore::SearchFullScan(
    std::string_view query, std::size_t top_n,
    cluster::SearchStats* stats) const {
  RequireFinalized("search");
  vec::TfIdfVector q = vec::Vectorize(query, *vocab_);
  return cluster::FullScanSearch(q, vectors_, top_n, stats);
}

std::string SecureStore::Reveal(DocId id, std::size_t ordinal,
                                const crypto::KeyBundle& keys) const {
  // No fingerprint precheck: a wrong key fails GCM authentication.
  const SecureRecord& rec = record(id);
  PRIVSHARD_ENFORCE(ordinal < rec.entities.size(), ErrorCode::kNotFound,
                    "record " + std::to_string(id) + " has no entity #" +
                        std::to_string(ordinal));
  const EntityEntry& e = rec.entities[ordinal];
  std::string aad = EntityAad(id, e.ordinal, e.kind);
  return crypto::DecryptValue(e.ciphertext, keys, AsBytes(aad));
}

std::string SecureStore::SerializeRecords() const {
  std::string out;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const SecureRecord& r = records_[i];
    json ents = json::array();
    for (const EntityEntry& e : r.entities) {
      ents.push_back({{"kind", KindName(e.kind)},
                      {"ord", e.ordinal},
                      {"n64", Base64Encode(e.ciphertext.nonce)},
                      {"c64", Base64Encode(e.ciphertext.body)},
                      {"t64", Base64Encode(e.ciphertext.tag)},
                      {"ix", e.index.Hex()}});
    }
    json vec = json::object();
    if (manifest_.finalized) {
      for (const auto& [id, w] : vectors_[i].entries()) {
        vec[std::to_string(id)] = w;
      }
    }
    json line = {{"id", r.id},
                 {"text", r.redacted_text},
                 {"ents", std::move(ents)},
                 {"vec", std::move(vec)},
                 {"cl", r.cluster ? json(*r.cluster) : json(nullptr)}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string SecureStore::SerializeManifest() const {
  json catalog = json::array();
  for (const EntityPattern& p : catalog_.patterns()) {
    catalog.push_back({{"kind", KindName(p.kind())}, {"pattern", p.pattern()}});
  }
  json m = {{"version", manifest_.version},
            {"record_count", manifest_.record_count},
            {"key_fingerprint", manifest_.key_fingerprint},
            {"cipher", crypto::kCipherName},
            {"mac", crypto::kMacName},
            {"catalog_hash", manifest_.catalog_hash},
            {"catalog", std::move(catalog)},
            {"finalized", manifest_.finalized}};
  if (manifest_.finalized) {
    json vocab = json::array();
    for (const auto& e : vocab_->entries()) {
      vocab.push_back(json::array({e.term, e.id, e.df}));
    }
    m["tf_formula"] = vec::kTfFormulaTag;
    m["idf_formula"] = vec::kIdfFormulaTag;
    m["cluster_distance"] = "euclidean";
    m["ranking"] = "cosine";
    m["init"] = "greedy-kmeans++";
    m["k"] = manifest_.k;
    m["seed"] = manifest_.seed;
    m["max_iter"] = manifest_.max_iter;
    m["iterations_run"] = manifest_.iterations_run;
    m["final_sse"] = manifest_.final_sse;
    m["sse_history"] = model_->sse_history;
    m["doc_count"] = vocab_->doc_count();
    m["vocabulary"] = std::move(vocab);
    m["centroids"] = model_->centroids;
  }
  return m.dump(2) + "\n";
}

void SecureStore::Save(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  PRIVSHARD_ENFORCE(!ec, ErrorCode::kIo,
                    "cannot create store directory " + dir.string());
  WriteFileAtomic(dir / kRecordsFile, SerializeRecords());
  WriteFileAtomic(dir / kManifestFile, SerializeManifest());
}

SecureStore SecureStore::Load(const std::filesystem::path& dir) {
  PRIVSHARD_ENFORCE(std::filesystem::exists(dir / kManifestFile),
                    ErrorCode::kConfig,
                    "no store manifest in " + dir.string());
  return Parse(ReadFile(dir / kManifestFile), ReadFile(dir / kRecordsFile));
}

SecureStore SecureStore::Parse(std::string_view manifest_json,
                               std::string_view records_jsonl) {
  SecureStore s;
  try {
    json m = json::parse(manifest_json);
    PRIVSHARD_ENFORCE(m.at("version").get<int>() == kFormatVersion,
                      ErrorCode::kConfig, "unsupported store format version");
    s.manifest_.record_count = m.at("record_count").get<std::size_t>();
    s.manifest_.key_fingerprint = m.at("key_fingerprint").get<std::string>();
    s.manifest_.finalized = m.at("finalized").get<bool>();

    std::vector<std::pair<EntityKind, std::string>> patterns;
    for (const auto& p : m.at("catalog")) {
      auto kind = ParseKind(p.at("kind").get<std::string>());
      PRIVSHARD_ENFORCE(kind.has_value(), ErrorCode::kConfig,
                        "unknown kind in manifest catalog");
      patterns.emplace_back(*kind, p.at("pattern").get<std::string>());
    }
    s.catalog_ = Catalog(patterns);
    s.manifest_.catalog_hash = CatalogHash(s.catalog_);
    PRIVSHARD_ENFORCE(
        s.manifest_.catalog_hash == m.at("catalog_hash").get<std::string>(),
        ErrorCode::kConfig, "catalog hash mismatch");

    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::vector<std::vector<vec::TfIdfVector::Entry>> raw_vectors;
    while (pos < records_jsonl.size()) {
      std::size_t eol = records_jsonl.find('\n', pos);
      if (eol == std::string_view::npos) eol = records_jsonl.size();
      std::string_view line = records_jsonl.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      if (line.empty()) continue;
      json j = json::parse(line);
      SecureRecord r;
      r.id = j.at("id").get<DocId>();
      PRIVSHARD_ENFORCE(r.id == s.records_.size(), ErrorCode::kConfig,
                        "record ids are not sequential at line " +
                            std::to_string(line_no));
      r.redacted_text = j.at("text").get<std::string>();
      for (const auto& e : j.at("ents")) {
        EntityEntry entry;
        auto kind = ParseKind(e.at("kind").get<std::string>());
        PRIVSHARD_ENFORCE(kind.has_value(), ErrorCode::kConfig,
                          "unknown entity kind at line " +
                              std::to_string(line_no));
        entry.kind = *kind;
        entry.ordinal = e.at("ord").get<uint32_t>();
        PRIVSHARD_ENFORCE(entry.ordinal == r.entities.size(), ErrorCode::kConfig,
                          "entity ordinals out of order at line " +
                              std::to_string(line_no));
        entry.ciphertext.nonce = DecodeFixed<crypto::kNonceSize>(e, "n64");
        entry.ciphertext.tag = DecodeFixed<crypto::kTagSize>(e, "t64");
        auto body = Base64Decode(e.at("c64").get<std::string>());
        PRIVSHARD_ENFORCE(body.has_value(), ErrorCode::kConfig,
                          "malformed record field c64");
        entry.ciphertext.body = std::move(*body);
        auto ix = crypto::BlindIndex::FromHex(e.at("ix").get<std::string>());
        PRIVSHARD_ENFORCE(ix.has_value(), ErrorCode::kConfig,
                          "malformed blind index at line " +
                              std::to_string(line_no));
        entry.index = *ix;
        r.entities.push_back(std::move(entry));
      }
      PRIVSHARD_ENFORCE(CountPlaceholders(r.redacted_text) == r.entities.size(),
                        ErrorCode::kConfig,
                        "placeholder count does not match entities at line " +
                            std::to_string(line_no));
      std::vector<vec::TfIdfVector::Entry> weights;
      for (const auto& [key, w] : j.at("vec").items()) {
        weights.emplace_back(static_cast<vec::TermId>(std::stoul(key)),
                             w.get<double>());
      }
      raw_vectors.push_back(std::move(weights));
      if (!j.at("cl").is_null()) r.cluster = j.at("cl").get<ClusterId>();
      s.AddPostings(r);
      s.records_.push_back(std::move(r));
    }
    PRIVSHARD_ENFORCE(s.records_.size() == s.manifest_.record_count,
                      ErrorCode::kConfig,
                      "record count does not match the manifest");

    if (s.manifest_.finalized) {
      s.manifest_.k = m.at("k").get<std::size_t>();
      s.manifest_.seed = m.at("seed").get<uint64_t>();
      s.manifest_.max_iter = m.at("max_iter").get<std::size_t>();
      s.manifest_.iterations_run = m.at("iterations_run").get<std::size_t>();
      s.manifest_.final_sse = m.at("final_sse").get<double>();
      PRIVSHARD_ENFORCE(
          m.at("idf_formula").get<std::string>() == vec::kIdfFormulaTag,
          ErrorCode::kConfig, "store was built with a different idf formula");

      std::vector<vec::Vocabulary::Entry> entries;
      for (const auto& t : m.at("vocabulary")) {
        entries.push_back({t.at(0).get<std::string>(), t.at(1).get<vec::TermId>(),
                           t.at(2).get<uint32_t>()});
      }
      s.vocab_ = vec::Vocabulary::FromEntries(std::move(entries),
                                              m.at("doc_count").get<std::size_t>());

      cluster::ClusterModel model;
      model.k = s.manifest_.k;
      model.dim = s.vocab_->size();
      model.seed = s.manifest_.seed;
      model.iterations_run = s.manifest_.iterations_run;
      model.final_sse = s.manifest_.final_sse;
      model.sse_history = m.at("sse_history").get<std::vector<double>>();
      model.centroids = m.at("centroids").get<std::vector<std::vector<double>>>();
      PRIVSHARD_ENFORCE(model.centroids.size() == model.k, ErrorCode::kConfig,
                        "centroid count does not match k");
      for (const auto& c : model.centroids) {
        PRIVSHARD_ENFORCE(c.size() == model.dim, ErrorCode::kConfig,
                          "centroid dimension does not match the vocabulary");
      }
      for (std::size_t i = 0; i < s.records_.size(); ++i) {
        const auto& r = s.records_[i];
        PRIVSHARD_ENFORCE(r.cluster.has_value() && *r.cluster < model.k,
                          ErrorCode::kConfig,
                          "record " + std::to_string(r.id) +
                              " lacks a valid cluster id");
        model.assignment.push_back(*r.cluster);
        vec::TfIdfVector v(std::move(raw_vectors[i]));
        PRIVSHARD_ENFORCE(v.empty() || v.entries().back().first < model.dim,
                          ErrorCode::kConfig,
                          "record " + std::to_string(r.id) +
                              " has a term id outside the vocabulary");
        s.vectors_.push_back(std::move(v));
      }
      model.RebuildMembers();
      s.model_ = std::move(model);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed store: ") + e.what());
  }
  return s;
}

}  // namespace privshard::store
