#include "privshard/bench_harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <thread>
#include <tuple>

#include "privshard/crypto_vault.h"
#include "privshard/entity_catalog.h"
#include "privshard/error.h"

namespace privshard::bench {
namespace {

using Clock = std::chrono::steady_clock;

// Rough resident cost of one ingested synthetic document, all structures.
constexpr std::size_t kBytesPerDoc = 4096;

uint64_t ElapsedNs(Clock::time_point since) {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since)
          .count());
}

std::size_t Uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

double Unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
const T& Pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[Uniform(rng, 0, v.size() - 1)];
}

std::string Digits(std::mt19937_64& rng, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(static_cast<char>('0' + Uniform(rng, 0, 9)));
  }
  return out;
}

const std::vector<std::vector<std::string>>& Topics() {
  static const std::vector<std::vector<std::string>> kTopics = {
      {"gdpr", "compliance", "regulation", "consent", "lawful", "processing",
       "controller", "processor", "erasure", "portability", "supervisory",
       "authority", "breach", "notification", "retention", "minimisation",
       "transparency", "accountability", "safeguards", "subject", "rights",
       "adequacy", "transfer", "derogation"},
      {"password", "policy", "rotation", "complexity", "authentication",
       "multifactor", "lockout", "credential", "hashing", "salting", "entropy",
       "passphrase", "expiry", "reset", "phishing", "token", "session",
       "privilege", "audit", "firewall", "intrusion", "malware", "patching",
       "hardening"},
      {"invoice", "payment", "ledger", "receivable", "payable", "balance",
       "reconciliation", "quarterly", "revenue", "expense", "budget",
       "forecast", "accrual", "depreciation", "auditing", "remittance",
       "billing", "statement", "fiscal", "treasury", "liquidity", "dividend",
       "margin", "profit"},
      {"onboarding", "recruitment", "interview", "candidate", "payroll",
       "benefits", "vacation", "performance", "appraisal", "promotion",
       "training", "mentoring", "headcount", "resignation", "termination",
       "handbook", "workplace", "diversity", "inclusion", "wellness",
       "overtime", "timesheet", "contractor", "internship"},
      {"contract", "agreement", "clause", "indemnity", "liability",
       "arbitration", "jurisdiction", "counterparty", "amendment", "warranty",
       "covenant", "litigation", "settlement", "plaintiff", "defendant",
       "attorney", "subpoena", "deposition", "affidavit", "statute",
       "precedent", "tribunal", "injunction", "damages"},
      {"server", "database", "cluster", "deployment", "kubernetes", "container",
       "latency", "throughput", "bandwidth", "backup", "replication",
       "failover", "monitoring", "logging", "outage", "incident", "rollback",
       "migration", "storage", "network", "router", "switch", "virtual",
       "hypervisor"},
      {"campaign", "brand", "advertising", "audience", "engagement",
       "conversion", "funnel", "newsletter", "coupon", "influencer",
       "impression", "clickthrough", "segment", "persona", "launch",
       "sponsorship", "webinar", "tradeshow", "messaging", "slogan",
       "positioning", "awareness", "retargeting", "analytics"},
      {"flight", "itinerary", "hotel", "reservation", "airport", "boarding",
       "luggage", "immigration", "visa", "departure", "arrival",
       "layover", "conference", "venue", "shuttle", "rental", "mileage",
       "allowance", "lodging", "checkin", "checkout", "terminal", "gate",
       "customs"},
      {"patient", "diagnosis", "treatment", "prescription", "clinic",
       "physician", "nurse", "hospital", "insurance", "claim", "referral",
       "vaccination", "allergy", "symptom", "therapy", "pharmacy", "dosage",
       "radiology", "laboratory", "discharge", "admission", "surgery",
       "recovery", "wellbeing"},
      {"shipment", "warehouse", "inventory", "freight", "carrier", "pallet",
       "crate", "dispatch", "delivery", "tracking", "manifest",
       "brokerage", "procurement", "supplier", "vendor", "purchase",
       "order", "stock", "replenishment", "forklift", "loading", "dock",
       "routing", "courier"},
  };
  return kTopics;
}

const std::vector<std::string> kFirstNames = {
    "jonathon", "maria", "wei", "amira", "lucas", "priya", "kenji", "fatima",
    "oliver", "sofia", "diego", "hannah", "ivan", "chloe", "samuel", "leila"};
const std::vector<std::string> kLastNames = {
    "smith", "garcia", "chen", "haddad", "muller", "patel", "tanaka", "okafor",
    "brown", "rossi", "silva", "novak", "kowalski", "dubois", "nguyen", "kim"};
const std::vector<std::string> kDomains = {
    "gmail.com", "example.org", "corp.example.com", "mail.net", "enron.com",
    "university.edu"};

std::string FormatThousands(uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

// Raw token for a value: sometimes wrapped in edge punctuation that the
// cleaner must strip.
std::string Decorate(const std::string& value, std::mt19937_64& rng) {
  switch (Uniform(rng, 0, 7)) {
    case 0:
      return value + ",";
    case 1:
      return value + ".";
    case 2:
      return "(" + value + ")";
    case 3:
      return "\"" + value + "\";";
    default:
      return value;
  }
}

BenchRow MakeRow(std::string experiment, std::size_t n, std::string phase,
                 std::vector<uint64_t> samples,
                 std::optional<double> agreement = std::nullopt) {
  SampleStats s = Summarize(std::move(samples));
  return {std::move(experiment), n, std::move(phase), s.median, s.p90, s.mean,
          agreement};
}

store::SecureStore BuildStore(std::span<const SyntheticDoc> docs,
                              const crypto::KeyBundle& keys,
                              store::PhaseTimers* timers = nullptr) {
  store::SecureStore s(keys, Catalog::Default());
  for (const auto& d : docs) s.Ingest(d.text, keys, timers);
  return s;
}

}  // namespace

const std::vector<std::string>& TopicVocabulary(std::size_t topic) {
  return Topics().at(topic);
}

const std::vector<std::string>& CommonWords() {
  static const std::vector<std::string> kCommon = {
      "the", "and", "for", "with", "please", "review", "our", "this",
      "regarding", "team", "update", "new", "attached", "details", "note"};
  return kCommon;
}

std::string GenValue(EntityKind kind, std::mt19937_64& rng) {
  switch (kind) {
    case EntityKind::kEmail: {
      std::string local = Pick(kFirstNames, rng) + "." + Pick(kLastNames, rng) +
                          std::to_string(Uniform(rng, 1, 99999));
      if (Uniform(rng, 0, 3) == 0) local[0] = static_cast<char>(local[0] - 32);
      return local + "@" + Pick(kDomains, rng);
    }
    case EntityKind::kPhone:
      return "+" + std::to_string(Uniform(rng, 1, 9)) + Digits(rng, 10);
    case EntityKind::kSsn:
      return std::to_string(Uniform(rng, 100, 899)) + "-" + Digits(rng, 2) + "-" +
             Digits(rng, 4);
    case EntityKind::kMoney: {
      std::string out = "$" + FormatThousands(Uniform(rng, 1000, 9999999));
      if (Uniform(rng, 0, 1) == 0) out += "." + Digits(rng, 2);
      return out;
    }
    case EntityKind::kCreditCard:
      return std::to_string(Uniform(rng, 4, 5)) + Digits(rng, 15);
    case EntityKind::kUrl:
      return std::string(Uniform(rng, 0, 3) == 0 ? "http" : "https") +
             "://portal" + std::to_string(Uniform(rng, 1, 999)) +
             ".example.com/docs/" + std::to_string(Uniform(rng, 1, 999999));
    case EntityKind::kPassport:
      return "P" + Digits(rng, 8);
  }
  return {};
}

std::vector<SyntheticDoc> GenCorpus(std::size_t n, uint64_t seed,
                                    const CorpusOptions& options) {
  static constexpr EntityKind kInjectable[] = {
      EntityKind::kEmail, EntityKind::kPhone,      EntityKind::kSsn,
      EntityKind::kMoney, EntityKind::kCreditCard, EntityKind::kUrl};
  std::mt19937_64 rng(seed);
  std::vector<SyntheticDoc> docs;
  docs.reserve(n);
  for (std::size_t d = 0; d < n; ++d) {
    SyntheticDoc doc;
    doc.topic = d % kTopicCount;
    const auto& own = TopicVocabulary(doc.topic);

    std::vector<std::string> words;
    std::size_t n_words = Uniform(rng, options.min_words, options.max_words);
    // Exactly one word in five is a common word, at random positions.
    std::vector<std::size_t> slots(n_words);
    for (std::size_t i = 0; i < n_words; ++i) slots[i] = i;
    std::vector<bool> common(n_words, false);
    for (std::size_t i = 0; i < n_words / 5; ++i) {
      std::swap(slots[i], slots[Uniform(rng, i, n_words - 1)]);
      common[slots[i]] = true;
    }
    for (std::size_t w = 0; w < n_words; ++w) {
      if (common[w]) {
        words.push_back(Pick(CommonWords(), rng));
      } else if (Unit(rng) < options.separability) {
        words.push_back(Pick(own, rng));
      } else {
        std::size_t other = (doc.topic + Uniform(rng, 1, kTopicCount - 1)) %
                            kTopicCount;
        words.push_back(Pick(TopicVocabulary(other), rng));
      }
    }

    std::size_t n_values = Uniform(rng, options.min_values, options.max_values);
    std::vector<std::pair<std::size_t, InjectedValue>> planted;
    for (std::size_t v = 0; v < n_values; ++v) {
      EntityKind kind = kInjectable[Uniform(rng, 0, std::size(kInjectable) - 1)];
      std::string value = GenValue(kind, rng);
      std::size_t at = Uniform(rng, 0, words.size());
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(at),
                   Decorate(value, rng));
      for (auto& [pos, iv] : planted) {
        if (pos >= at) ++pos;
      }
      planted.push_back({at, {kind, value, at}});
    }
    std::sort(planted.begin(), planted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [pos, iv] : planted) {
      iv.token_index = pos;
      doc.truth.push_back(std::move(iv));
    }

    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i > 0) doc.text += ' ';
      doc.text += words[i];
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<TopicQuery> GenTopicQueries(std::size_t count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TopicQuery> out;
  for (std::size_t i = 0; i < count; ++i) {
    TopicQuery q;
    q.topic = i % kTopicCount;
    const auto& vocab = TopicVocabulary(q.topic);
    std::size_t n_words = Uniform(rng, 2, 4);
    for (std::size_t w = 0; w < n_words; ++w) {
      if (w > 0) q.text += ' ';
      q.text += Pick(vocab, rng);
    }
    out.push_back(std::move(q));
  }
  return out;
}

void BenchConfig::Validate() const {
  PRIVSHARD_ENFORCE(!sizes.empty(), ErrorCode::kArgument, "no corpus sizes");
  PRIVSHARD_ENFORCE(std::is_sorted(sizes.begin(), sizes.end()),
                    ErrorCode::kArgument, "sizes must be ascending");
  PRIVSHARD_ENFORCE(sizes.front() >= 1, ErrorCode::kArgument,
                    "sizes must be >= 1");
  PRIVSHARD_ENFORCE(repetitions >= 3, ErrorCode::kArgument,
                    "repetitions must be >= 3");
  PRIVSHARD_ENFORCE(queries >= 1, ErrorCode::kArgument, "queries must be >= 1");
  PRIVSHARD_ENFORCE(k >= 1, ErrorCode::kArgument, "k must be >= 1");
  const std::size_t max_docs = memory_budget_bytes / kBytesPerDoc;
  PRIVSHARD_ENFORCE(sizes.back() <= max_docs, ErrorCode::kArgument,
                    "size " + std::to_string(sizes.back()) +
                        " exceeds the memory budget (max " +
                        std::to_string(max_docs) + " documents)");
}

SampleStats Summarize(std::vector<uint64_t> samples) {
  PRIVSHARD_ENFORCE(!samples.empty(), ErrorCode::kArgument, "no samples");
  std::sort(samples.begin(), samples.end());
  auto rank = [&](double p) {
    auto idx = static_cast<std::size_t>(std::ceil(p * samples.size()));
    return samples[std::max<std::size_t>(idx, 1) - 1];
  };
  double sum = 0.0;
  for (uint64_t s : samples) sum += static_cast<double>(s);
  return {rank(0.5), rank(0.9), sum / static_cast<double>(samples.size())};
}

std::vector<BenchRow> BenchBuild(const BenchConfig& config) {
  config.Validate();
  std::vector<BenchRow> rows;
  crypto::KeyBundle keys = crypto::GenerateKeys();
  for (std::size_t n : config.sizes) {
    auto docs = GenCorpus(n, config.seed);
    // Warm-up, excluded.
    BuildStore(std::span(docs).first(std::min<std::size_t>(n, 1000)), keys);

    std::vector<uint64_t> enc, mac, detect, total;
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
      store::PhaseTimers timers;
      auto t = Clock::now();
      BuildStore(docs, keys, &timers);
      total.push_back(ElapsedNs(t));
      enc.push_back(timers.encrypt_ns);
      mac.push_back(timers.index_ns);
      detect.push_back(timers.detect_ns);
    }
    rows.push_back(MakeRow("build", n, "aes_encrypt", std::move(enc)));
    rows.push_back(MakeRow("build", n, "blind_index", std::move(mac)));
    rows.push_back(MakeRow("build", n, "detect", std::move(detect)));
    rows.push_back(MakeRow("build", n, "total", std::move(total)));
  }
  return rows;
}

std::vector<PlainEntry> FlattenTruth(std::span<const SyntheticDoc> docs) {
  std::vector<PlainEntry> out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& v : docs[d].truth) {
      out.push_back({d, v.kind, crypto::Canonicalize(v.value, v.kind)});
    }
  }
  return out;
}

std::vector<store::DocId> DirectScan(std::span<const PlainEntry> truth,
                                     EntityKind kind, std::string_view value) {
  const std::string canonical = crypto::Canonicalize(value, kind);
  std::vector<store::DocId> ids;
  for (const PlainEntry& e : truth) {
    if (e.kind == kind && e.canonical == canonical) ids.push_back(e.doc_id);
  }
  // Entries arrive in doc order; only duplicates within a doc remain.
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<BenchRow> BenchLookup(const BenchConfig& config) {
  config.Validate();
  std::vector<BenchRow> rows;
  crypto::KeyBundle keys = crypto::GenerateKeys();
  for (std::size_t n : config.sizes) {
    auto docs = GenCorpus(n, config.seed);
    auto truth = FlattenTruth(docs);
    store::SecureStore s = BuildStore(docs, keys);
    s.Finalize(1, config.seed);

    // Half present values, half values the corpus generator never emits.
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::pair<EntityKind, std::string>> queries;
    for (std::size_t i = 0; i < config.queries; ++i) {
      if (i % 2 == 0) {
        const SyntheticDoc& d = docs[Uniform(rng, 0, docs.size() - 1)];
        const InjectedValue& v = d.truth[Uniform(rng, 0, d.truth.size() - 1)];
        queries.emplace_back(v.kind, v.value);
      } else {
        queries.emplace_back(EntityKind::kEmail,
                             "absent" + std::to_string(i) + "@nowhere.invalid");
      }
    }

    for (const auto& [kind, value] : queries) {  // warm-up
      DirectScan(truth, kind, value);
      s.LookupSensitive(kind, value, keys);
    }

    // Each path is timed in its own loop so one path's working set does not
    // evict the other's between samples.
    std::vector<uint64_t> direct_ns, blind_ns;
    std::size_t agree = 0;
    std::size_t trials = 0;
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
      std::vector<std::vector<store::DocId>> direct_ids, blind_ids;
      for (const auto& [kind, value] : queries) {
        auto t = Clock::now();
        direct_ids.push_back(DirectScan(truth, kind, value));
        direct_ns.push_back(ElapsedNs(t));
      }
      for (const auto& [kind, value] : queries) {
        auto t = Clock::now();
        blind_ids.push_back(s.LookupSensitive(kind, value, keys));
        blind_ns.push_back(ElapsedNs(t));
      }
      for (std::size_t i = 0; i < queries.size(); ++i) {
        ++trials;
        if (direct_ids[i] == blind_ids[i]) ++agree;
      }
    }
    double agreement = static_cast<double>(agree) / static_cast<double>(trials);
    rows.push_back(MakeRow("lookup", n, "direct_scan", std::move(direct_ns), agreement));
    rows.push_back(MakeRow("lookup", n, "blind_lookup", std::move(blind_ns), agreement));
  }
  return rows;
}

std::vector<BenchRow> BenchSearch(const BenchConfig& config) {
  config.Validate();
  std::vector<BenchRow> rows;
  crypto::KeyBundle keys = crypto::GenerateKeys();
  CorpusOptions options;
  options.separability = config.separability;
  for (std::size_t n : config.sizes) {
    auto docs = GenCorpus(n, config.seed, options);
    store::SecureStore s = BuildStore(docs, keys);
    s.Finalize(std::min(config.k, n), config.seed);
    auto queries = GenTopicQueries(config.queries, config.seed + 1);

    std::size_t agree = 0;
    for (const auto& q : queries) {
      auto full = s.SearchFullScan(q.text, 1);
      auto routed = s.SearchNonSensitive(q.text, 1);
      bool same = full.empty() ? routed.empty()
                               : (!routed.empty() &&
                                  routed.front().doc_id == full.front().doc_id);
      if (same) ++agree;
    }
    double agreement =
        static_cast<double>(agree) / static_cast<double>(queries.size());

    std::atomic<bool> stop{false};
    std::vector<std::thread> readers;
    for (std::size_t r = 0; r < config.concurrent_readers; ++r) {
      readers.emplace_back([&] {
        while (!stop.load()) {
          for (const auto& q : queries) s.SearchNonSensitive(q.text, 10);
        }
      });
    }

    std::vector<uint64_t> full_ns, routed_ns;
    for (const auto& q : queries) {  // warm-up
      s.SearchFullScan(q.text, 10);
      s.SearchNonSensitive(q.text, 10);
    }
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
      for (const auto& q : queries) {
        auto t = Clock::now();
        s.SearchFullScan(q.text, 10);
        full_ns.push_back(ElapsedNs(t));
        t = Clock::now();
        s.SearchNonSensitive(q.text, 10);
        routed_ns.push_back(ElapsedNs(t));
      }
    }
    stop.store(true);
    for (auto& th : readers) th.join();

    rows.push_back(MakeRow("search", n, "full_scan", std::move(full_ns), 1.0));
    rows.push_back(MakeRow("search", n, "clustered", std::move(routed_ns), agreement));
  }
  return rows;
}

void WriteCsv(std::vector<BenchRow> rows, std::ostream& out) {
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.experiment, a.n, a.phase) <
           std::tie(b.experiment, b.n, b.phase);
  });
  out << kCsvSchemaLine << '\n' << kCsvHeader << '\n';
  for (const BenchRow& r : rows) {
    out << r.experiment << ',' << r.n << ',' << r.phase << ',' << r.median_ns
        << ',' << r.p90_ns << ',';
    if (r.agreement) out << std::fixed << std::setprecision(4) << *r.agreement
                         << std::defaultfloat;
    out << '\n';
  }
}

}  // namespace privshard::bench
