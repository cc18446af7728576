#include "privshard/bench_harness.h"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "privshard/crypto_vault.h"
#include "privshard/error.h"
#include "privshard/text_pipeline.h"

namespace privshard::bench {
namespace {

std::vector<std::string> Lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(GenCorpus, Deterministic) {
  auto a = GenCorpus(5, 7), b = GenCorpus(5, 7);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].text, b[i].text);
    EXPECT_EQ(a[i].topic, b[i].topic);
    EXPECT_EQ(a[i].truth.size(), b[i].truth.size());
  }
  EXPECT_NE(GenCorpus(5, 8)[0].text, a[0].text);
}

TEST(GenCorpus, PrefixStable) {
  // A larger corpus starts with the smaller one, so sizes are comparable.
  auto small = GenCorpus(50, 3), large = GenCorpus(500, 3);
  for (std::size_t i = 0; i < small.size(); ++i) {
    EXPECT_EQ(small[i].text, large[i].text);
  }
}

TEST(GenCorpus, EveryInjectedValueIsDetected) {
  Catalog c = Catalog::Default();
  std::size_t total = 0;
  std::set<EntityKind> kinds;
  for (const auto& doc : GenCorpus(1000, 11)) {
    auto spans = Detect(doc.text, c);
    ASSERT_EQ(spans.size(), doc.truth.size()) << doc.text;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      EXPECT_EQ(spans[i].kind, doc.truth[i].kind);
      EXPECT_EQ(spans[i].value, doc.truth[i].value);
      EXPECT_EQ(spans[i].token_index, doc.truth[i].token_index);
      kinds.insert(spans[i].kind);
    }
    EXPECT_GE(doc.truth.size(), 1u);
    EXPECT_LE(doc.truth.size(), 3u);
    total += doc.truth.size();
  }
  EXPECT_GT(total, 1500u);
  EXPECT_EQ(kinds.size(), 6u);
}

TEST(GenCorpus, TopicsAreRecoverable) {
  for (const auto& doc : GenCorpus(500, 13)) {
    const auto& vocab = TopicVocabulary(doc.topic);
    std::set<std::string> topic_words(vocab.begin(), vocab.end());
    std::set<std::size_t> value_tokens;
    for (const auto& t : doc.truth) value_tokens.insert(t.token_index);
    auto tokens = text::TokenizeAndClean(doc.text);
    std::size_t prose = 0, hits = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (value_tokens.count(i) || tokens[i].dropped()) continue;
      ++prose;
      hits += topic_words.count(text::ToLower(tokens[i].cleaned));
    }
    ASSERT_GT(prose, 0u);
    EXPECT_GE(static_cast<double>(hits) / static_cast<double>(prose), 0.5)
        << doc.text;
  }
}

TEST(GenCorpus, SeparabilityMixesTopics) {
  CorpusOptions opts;
  opts.separability = 0.3;
  std::size_t foreign = 0, total = 0;
  for (const auto& doc : GenCorpus(200, 1, opts)) {
    const auto& vocab = TopicVocabulary(doc.topic);
    std::set<std::string> own(vocab.begin(), vocab.end());
    const auto& common = CommonWords();
    std::set<std::string> shared(common.begin(), common.end());
    for (const auto& t : text::TokenizeAndClean(doc.text)) {
      std::string w = text::ToLower(t.cleaned);
      if (w.empty() || shared.count(w) || w.find_first_of("@$+0123456789") != std::string::npos) {
        continue;
      }
      ++total;
      foreign += own.count(w) == 0;
    }
  }
  EXPECT_GT(static_cast<double>(foreign) / static_cast<double>(total), 0.4);
}

TEST(GenCorpus, TopicVocabulariesAreDisjoint) {
  std::set<std::string> seen;
  std::size_t count = 0;
  for (std::size_t t = 0; t < kTopicCount; ++t) {
    for (const auto& w : TopicVocabulary(t)) {
      seen.insert(w);
      ++count;
      EXPECT_EQ(text::CleanText(w), w);
    }
  }
  EXPECT_EQ(seen.size(), count);
}

TEST(GenTopicQueries, ComeFromOneTopic) {
  for (const auto& q : GenTopicQueries(40, 3)) {
    const auto& vocab = TopicVocabulary(q.topic);
    std::set<std::string> own(vocab.begin(), vocab.end());
    auto words = text::Tokenize(q.text);
    EXPECT_GE(words.size(), 2u);
    for (const auto& w : words) EXPECT_TRUE(own.count(w.text)) << w.text;
  }
}

TEST(DirectScan, MatchesByCanonicalForm) {
  auto docs = GenCorpus(100, 2);
  auto truth = FlattenTruth(docs);
  const auto& v = docs[42].truth[0];
  auto ids = DirectScan(truth, v.kind, v.value);
  EXPECT_TRUE(std::binary_search(ids.begin(), ids.end(), 42u));
  EXPECT_TRUE(DirectScan(truth, EntityKind::kEmail, "absent@nowhere.invalid").empty());
}

TEST(Summarize, NearestRank) {
  auto s = Summarize({5, 1, 4, 2, 3, 10, 9, 8, 7, 6});
  EXPECT_EQ(s.median, 5u);
  EXPECT_EQ(s.p90, 9u);
  EXPECT_DOUBLE_EQ(s.mean, 5.5);
  EXPECT_EQ(Summarize({7}).p90, 7u);
  EXPECT_THROW(Summarize({}), Error);
}

TEST(BenchConfig, Validation) {
  BenchConfig ok;
  ok.sizes = {10, 100};
  EXPECT_NO_THROW(ok.Validate());

  BenchConfig unsorted = ok;
  unsorted.sizes = {100, 10};
  EXPECT_THROW(unsorted.Validate(), Error);

  BenchConfig few = ok;
  few.repetitions = 2;
  EXPECT_THROW(few.Validate(), Error);

  BenchConfig huge = ok;
  huge.memory_budget_bytes = 1 << 20;
  huge.sizes = {1000000};
  EXPECT_THROW(huge.Validate(), Error);

  BenchConfig empty = ok;
  empty.sizes.clear();
  EXPECT_THROW(empty.Validate(), Error);
}

TEST(WriteCsv, SortedWithSchemaLine) {
  std::vector<BenchRow> rows = {
      {"search", 100, "full_scan", 9, 10, 9.0, std::nullopt},
      {"lookup", 1000, "direct_scan", 3, 4, 3.0, 1.0},
      {"lookup", 100, "direct_scan", 1, 2, 1.0, 1.0},
      {"lookup", 100, "blind_lookup", 5, 6, 5.0, 0.95},
  };
  std::ostringstream out;
  WriteCsv(rows, out);
  EXPECT_EQ(Lines(out.str()),
            (std::vector<std::string>{
                std::string(kCsvSchemaLine), std::string(kCsvHeader),
                "lookup,100,blind_lookup,5,6,0.9500",
                "lookup,100,direct_scan,1,2,1.0000",
                "lookup,1000,direct_scan,3,4,1.0000", "search,100,full_scan,9,10,"}));
}

TEST(Benches, SmallRunsProduceRows) {
  BenchConfig cfg;
  cfg.sizes = {100, 300};
  cfg.k = 4;
  cfg.queries = 10;

  auto build = BenchBuild(cfg);
  std::set<std::string> phases;
  for (const auto& r : build) {
    phases.insert(r.phase);
    EXPECT_EQ(r.experiment, "build");
    EXPECT_GT(r.median_ns, 0u);
    EXPECT_LE(r.median_ns, r.p90_ns);
  }
  EXPECT_EQ(build.size(), 8u);
  EXPECT_EQ(phases, (std::set<std::string>{"aes_encrypt", "blind_index", "detect",
                                           "total"}));

  auto lookup = BenchLookup(cfg);
  EXPECT_EQ(lookup.size(), 4u);
  for (const auto& r : lookup) {
    ASSERT_TRUE(r.agreement.has_value());
    EXPECT_EQ(*r.agreement, 1.0);
  }

  auto search = BenchSearch(cfg);
  EXPECT_EQ(search.size(), 4u);
  for (const auto& r : search) {
    if (r.phase == "clustered") {
      ASSERT_TRUE(r.agreement.has_value());
      EXPECT_GE(*r.agreement, 0.0);
      EXPECT_LE(*r.agreement, 1.0);
    }
  }
}

}  // namespace
}  // namespace privshard::bench
