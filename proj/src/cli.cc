#include "privshard/cli.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "privshard/bench_harness.h"
#include "privshard/crypto_vault.h"
#include "privshard/entity_catalog.h"
#include "privshard/error.h"
#include "privshard/query_engine.h"
#include "privshard/secure_store.h"

namespace privshard::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string out_path;
  bool force = false;

  std::string keys_path;
  std::string store_path;
  std::string input_path;
  std::string catalog_path;
  std::string format = "lines";

  std::size_t k = 10;
  uint64_t seed = 42;
  std::size_t max_iter = 100;

  std::string text;
  std::size_t top_n = 10;
  std::size_t probe = 1;
  bool concurrent = false;

  std::string experiment;
  std::string sizes;
  std::size_t reps = 3;
  std::size_t queries = 20;
  double separability = 1.0;
  std::size_t readers = 0;
  std::size_t memory_budget_mb = 4096;

  uint64_t id = 0;
};

std::optional<std::string> KeysPath(const Options& o) {
  if (!o.keys_path.empty()) return o.keys_path;
  if (const char* env = std::getenv(kKeysEnv); env != nullptr && *env != '\0') {
    return std::string(env);
  }
  return std::nullopt;
}

crypto::KeyBundle RequireKeys(const Options& o) {
  auto path = KeysPath(o);
  PRIVSHARD_ENFORCE(path.has_value(), ErrorCode::kAuthorization,
                    std::string("a key file is required (--keys or ") +
                        kKeysEnv + ")");
  return crypto::KeyBundle::Load(*path);
}

std::optional<crypto::KeyBundle> OptionalKeys(const Options& o) {
  if (auto path = KeysPath(o)) return crypto::KeyBundle::Load(*path);
  return std::nullopt;
}

int CmdKeygen(const Options& o, std::ostream& out) {
  crypto::KeyBundle keys = crypto::GenerateKeys();
  keys.Save(o.out_path, o.force);
  out << "wrote " << crypto::kKeyFileSize << "-byte key file " << o.out_path
      << "\nfingerprint\t" << keys.FingerprintHex() << '\n';
  return kExitOk;
}

std::vector<std::string> ReadDocuments(const Options& o) {
  std::ifstream in(o.input_path, std::ios::binary);
  PRIVSHARD_ENFORCE(in.good(), ErrorCode::kConfig,
                    "cannot read input " + o.input_path);
  std::vector<std::string> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (o.format == "jsonl") {
      try {
        docs.push_back(nlohmann::json::parse(line).at("text").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kConfig,
                    std::string("malformed jsonl record: ") + e.what());
      }
    } else {
      docs.push_back(line);
    }
  }
  PRIVSHARD_ENFORCE(!docs.empty(), ErrorCode::kArgument,
                    "no documents in " + o.input_path);
  return docs;
}

int CmdIngest(const Options& o, std::ostream& out) {
  crypto::KeyBundle keys = RequireKeys(o);
  std::vector<std::string> docs = ReadDocuments(o);
  const fs::path dir = o.store_path;

  std::optional<store::SecureStore> s;
  if (fs::exists(dir / store::kManifestFile)) {
    s = store::SecureStore::Load(dir);
    PRIVSHARD_ENFORCE(!s->finalized(), ErrorCode::kState,
                      "store is finalized and read-only");
    if (!o.catalog_path.empty()) {
      PRIVSHARD_ENFORCE(
          Catalog::LoadFile(o.catalog_path).Serialize() == s->catalog().Serialize(),
          ErrorCode::kConfig, "catalog differs from the one the store was built with");
    }
  } else {
    Catalog catalog = o.catalog_path.empty() ? Catalog::Default()
                                             : Catalog::LoadFile(o.catalog_path);
    s.emplace(keys, std::move(catalog));
  }

  std::vector<std::pair<store::DocId, std::size_t>> counts;
  for (const std::string& doc : docs) {
    store::DocId id = s->Ingest(doc, keys);
    counts.emplace_back(id, s->record(id).entities.size());
  }
  s->Save(dir);
  for (const auto& [id, n] : counts) {
    out << "doc " << id << '\t' << n << " entities\n";
  }
  out << "ingested " << counts.size() << " documents\n";
  return kExitOk;
}

int CmdFinalize(const Options& o, std::ostream& out) {
  const fs::path dir = o.store_path;
  store::SecureStore s = store::SecureStore::Load(dir);
  const store::StoreManifest& m = s.Finalize(o.k, o.seed, o.max_iter);
  s.Save(dir);
  out << "k\t" << m.k << "\niterations\t" << m.iterations_run << "\nsse\t"
      << std::setprecision(10) << m.final_sse << '\n';
  return kExitOk;
}

int CmdQuery(const Options& o, std::ostream& out) {
  store::SecureStore s = store::SecureStore::Load(o.store_path);
  query::QueryPlan plan = query::PlanQuery(o.text, s.catalog());
  std::optional<crypto::KeyBundle> keys;
  if (plan.mode != query::Mode::kRanked) {
    keys = RequireKeys(o);
  }
  query::ExecuteOptions opts;
  opts.top_n = o.top_n;
  opts.probe = o.probe;
  opts.concurrent = o.concurrent;
  query::ResultSet rs =
      query::Execute(plan, keys ? &*keys : nullptr, s, opts);
  out << "mode\t" << query::ModeName(rs.mode) << '\n';
  for (const auto& r : rs.results) {
    std::string flags;
    if (r.exact_hit) flags = "exact";
    if (r.ranked_hit) flags += flags.empty() ? "ranked" : ",ranked";
    out << r.doc_id << '\t' << std::fixed << std::setprecision(6) << r.score
        << std::defaultfloat << '\t' << flags << '\n';
  }
  return rs.results.empty() ? kExitNothingFound : kExitOk;
}

std::vector<std::size_t> ParseSizes(const std::string& csv) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      unsigned long long v = std::stoull(item, &used);
      PRIVSHARD_ENFORCE(used == item.size(), ErrorCode::kArgument,
                        "bad size `" + item + "`");
      sizes.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kArgument, "bad size `" + item + "`");
    }
  }
  return sizes;
}

int CmdBench(const Options& o, std::ostream& out) {
  bench::BenchConfig config;
  config.sizes = ParseSizes(o.sizes);
  config.seed = o.seed;
  config.repetitions = o.reps;
  config.k = o.k;
  config.queries = o.queries;
  config.separability = o.separability;
  config.concurrent_readers = o.readers;
  config.memory_budget_bytes = o.memory_budget_mb << 20;
  config.Validate();

  std::ofstream file(o.out_path, std::ios::trunc);
  PRIVSHARD_ENFORCE(file.good(), ErrorCode::kIo, "cannot write " + o.out_path);

  std::vector<bench::BenchRow> rows;
  if (o.experiment == "build") {
    rows = bench::BenchBuild(config);
  } else if (o.experiment == "lookup") {
    rows = bench::BenchLookup(config);
  } else {
    rows = bench::BenchSearch(config);
  }
  bench::WriteCsv(rows, file);
  out << "wrote " << rows.size() << " rows to " << o.out_path << '\n';
  return kExitOk;
}

int CmdInspect(const Options& o, std::ostream& out) {
  store::SecureStore s = store::SecureStore::Load(o.store_path);
  std::optional<crypto::KeyBundle> keys = OptionalKeys(o);
  const store::SecureRecord& r = s.record(o.id);
  out << "id\t" << r.id << '\n';
  if (r.cluster) out << "cluster\t" << *r.cluster << '\n';
  out << "text\t" << r.redacted_text << '\n';
  for (const auto& e : r.entities) {
    out << "entity\t" << e.ordinal << '\t' << KindName(e.kind);
    if (keys) out << '\t' << s.Reveal(r.id, e.ordinal, *keys);
    out << '\n';
  }
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"privshard: encrypted, blind-indexed document store with "
               "clustered TF-IDF search"};
  app.require_subcommand(1);
  Options o;

  auto* keygen = app.add_subcommand("keygen", "Write a new 48-byte key file");
  keygen->add_option("--out", o.out_path, "Key file path")->required();
  keygen->add_flag("--force", o.force, "Overwrite an existing key file");

  auto* ingest = app.add_subcommand("ingest", "Ingest one document per line");
  ingest->add_option("--keys", o.keys_path, "Key file");
  ingest->add_option("--store", o.store_path, "Store directory")->required();
  ingest->add_option("--input", o.input_path, "Input file")->required();
  ingest->add_option("--catalog", o.catalog_path, "Pattern override file");
  ingest->add_option("--format", o.format, "lines | jsonl")
      ->check(CLI::IsMember({"lines", "jsonl"}));

  auto* finalize = app.add_subcommand("finalize", "Vectorize and cluster");
  finalize->add_option("--store", o.store_path, "Store directory")->required();
  finalize->add_option("--k", o.k, "Cluster count")->check(CLI::PositiveNumber);
  finalize->add_option("--seed", o.seed, "Clustering seed");
  finalize->add_option("--max-iter", o.max_iter, "Lloyd iteration cap")
      ->check(CLI::PositiveNumber);

  auto* query = app.add_subcommand("query", "Search the store");
  query->add_option("--keys", o.keys_path, "Key file (sensitive queries)");
  query->add_option("--store", o.store_path, "Store directory")->required();
  query->add_option("--text", o.text, "Query text")->required();
  query->add_option("--top", o.top_n, "Ranked results to return")
      ->check(CLI::PositiveNumber);
  query->add_option("--probe", o.probe, "Clusters to search")
      ->check(CLI::PositiveNumber);
  query->add_flag("--concurrent", o.concurrent,
                  "Run exact and ranked paths concurrently");

  auto* bench = app.add_subcommand("bench", "Run a benchmark, write CSV");
  bench->add_option("experiment", o.experiment, "build | lookup | search")
      ->required()
      ->check(CLI::IsMember({"build", "lookup", "search"}));
  bench->add_option("--sizes", o.sizes, "Comma-separated corpus sizes")
      ->required();
  bench->add_option("--out", o.out_path, "CSV output path")->required();
  bench->add_option("--seed", o.seed, "Corpus seed");
  bench->add_option("--reps", o.reps, "Repetitions per point (>= 3)");
  bench->add_option("--k", o.k, "Cluster count for search")
      ->check(CLI::PositiveNumber);
  bench->add_option("--queries", o.queries, "Queries per trial")
      ->check(CLI::PositiveNumber);
  bench->add_option("--separability", o.separability,
                    "Topic purity of generated prose, in [0, 1]")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--readers", o.readers,
                    "Concurrent reader threads during search timing");
  bench->add_option("--memory-budget-mb", o.memory_budget_mb,
                    "Refuse sizes beyond this estimated footprint");

  auto* inspect = app.add_subcommand("inspect", "Show one stored record");
  inspect->add_option("--store", o.store_path, "Store directory")->required();
  inspect->add_option("--id", o.id, "Record id")->required();
  inspect->add_option("--keys", o.keys_path, "Key file (reveals values)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (keygen->parsed()) return CmdKeygen(o, out);
    if (ingest->parsed()) return CmdIngest(o, out);
    if (finalize->parsed()) return CmdFinalize(o, out);
    if (query->parsed()) return CmdQuery(o, out);
    if (bench->parsed()) return CmdBench(o, out);
    if (inspect->parsed()) return CmdInspect(o, out);
  } catch (const Error& e) {
    err << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace privshard::cli
