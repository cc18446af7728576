#include "privshard/cli.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "privshard/bench_harness.h"
#include "support.h"

namespace privshard::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Call(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& p, std::string_view content) {
  std::ofstream(p, std::ios::binary) << content;
}

std::vector<std::string> Lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Drops the timing columns of bench CSV rows.
std::vector<std::string> NonTimingColumns(const std::string& csv) {
  std::vector<std::string> out;
  for (const auto& line : Lines(csv)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (line.back() == ',') cols.push_back("");
    if (cols.size() == 6 && cols[3] != "median_ns") {
      out.push_back(cols[0] + "," + cols[1] + "," + cols[2] + "," + cols[5]);
    } else {
      out.push_back(line);
    }
  }
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ::unsetenv(kKeysEnv);
    keys_ = (dir_ / "k.bin").string();
    store_ = (dir_ / "store").string();
    ASSERT_EQ(Call({"keygen", "--out", keys_}).code, kExitOk);
  }
  void TearDown() override { ::unsetenv(kKeysEnv); }

  std::string Input(std::string_view name, std::string_view content) {
    auto p = dir_ / name;
    WriteFile(p, content);
    return p.string();
  }

  void IngestSample() {
    auto in = Input("docs.txt",
                    "budget review with alice@example.com\n"
                    "server outage report, call +4915112345678\n"
                    "quarterly budget forecast\n");
    auto r = Call({"ingest", "--keys", keys_, "--store", store_, "--input", in});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }

  testing::TempDir dir_;
  std::string keys_;
  std::string store_;
};

TEST_F(CliTest, KeygenWrites48Bytes) {
  EXPECT_EQ(std::filesystem::file_size(keys_), 48u);
  auto again = Call({"keygen", "--out", keys_});
  EXPECT_EQ(again.code, kExitUsage);
  EXPECT_NE(again.err.find("--force"), std::string::npos);
  std::string before = ReadFile(keys_);
  EXPECT_EQ(Call({"keygen", "--out", keys_, "--force"}).code, kExitOk);
  EXPECT_NE(ReadFile(keys_), before);
}

TEST_F(CliTest, KeygenUnwritableDirectory) {
  auto r = Call({"keygen", "--out", (dir_ / "missing" / "k.bin").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, IngestReportsPerDocumentCounts) {
  auto in = Input("docs.txt", "a@b.com and 123-45-6789\nplain text\nx +4915112345678\n");
  auto r = Call({"ingest", "--keys", keys_, "--store", store_, "--input", in});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Lines(r.out), (std::vector<std::string>{
                              "doc 0\t2 entities", "doc 1\t0 entities",
                              "doc 2\t1 entities", "ingested 3 documents"}));
  EXPECT_EQ(r.out.find("a@b.com"), std::string::npos);
  EXPECT_EQ(Lines(ReadFile(std::filesystem::path(store_) / "store.jsonl")).size(), 3u);
}

TEST_F(CliTest, IngestErrors) {
  auto in = Input("docs.txt", "hello\n");
  auto corrupt = Input("bad.key", "short");
  EXPECT_EQ(Call({"ingest", "--keys", corrupt, "--store", store_, "--input", in}).code,
            kExitUsage);
  auto empty = Input("empty.txt", "\n  \n");
  auto r = Call({"ingest", "--keys", keys_, "--store", store_, "--input", empty});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("no documents"), std::string::npos);
  EXPECT_EQ(Call({"ingest", "--store", store_, "--input", in}).code, kExitUsage);
}

TEST_F(CliTest, IngestJsonlAndCatalogOverride) {
  auto in = Input("docs.jsonl", "{\"text\": \"passport X12345678 here\"}\n");
  auto cat = Input("cat.tsv", "PASSPORT\t[A-Z]\\d{8}\n");
  auto r = Call({"ingest", "--keys", keys_, "--store", store_, "--input", in,
                 "--format", "jsonl", "--catalog", cat});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Lines(r.out)[0], "doc 0\t1 entities");
  // Appending with a different catalog is refused.
  auto other = Input("other.tsv", "SSN\t\\d{9}\n");
  EXPECT_EQ(Call({"ingest", "--keys", keys_, "--store", store_, "--input", in,
                  "--format", "jsonl", "--catalog", other})
                .code,
            kExitUsage);
  auto bad = Input("bad.jsonl", "{\"txt\": 1}\n");
  EXPECT_EQ(Call({"ingest", "--keys", keys_, "--store", store_, "--input", bad,
                  "--format", "jsonl"})
                .code,
            kExitUsage);
}

TEST_F(CliTest, IngestAppendsUntilFinalized) {
  IngestSample();
  auto more = Input("more.txt", "fourth doc\n");
  auto r = Call({"ingest", "--keys", keys_, "--store", store_, "--input", more});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Lines(r.out)[0], "doc 3\t0 entities");
  ASSERT_EQ(Call({"finalize", "--store", store_, "--k", "1", "--seed", "1"}).code, kExitOk);
  EXPECT_EQ(Call({"ingest", "--keys", keys_, "--store", store_, "--input", more}).code,
            kExitUsage);
}

TEST_F(CliTest, FinalizeExamples) {
  IngestSample();
  auto r = Call({"finalize", "--store", store_, "--k", "1", "--seed", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Lines(r.out)[0], "k\t1");
  EXPECT_EQ(Call({"finalize", "--store", store_, "--k", "4", "--seed", "3"}).code,
            kExitUsage);
  EXPECT_EQ(Call({"finalize", "--store", store_, "--k", "0", "--seed", "3"}).code,
            kExitUsage);
}

TEST_F(CliTest, RefinalizeIsByteIdentical) {
  auto docs = bench::GenCorpus(60, 2);
  std::string text;
  for (const auto& d : docs) text += d.text + "\n";
  auto in = Input("corpus.txt", text);
  ASSERT_EQ(Call({"ingest", "--keys", keys_, "--store", store_, "--input", in}).code,
            kExitOk);
  auto manifest = std::filesystem::path(store_) / "manifest.json";
  ASSERT_EQ(Call({"finalize", "--store", store_, "--k", "4", "--seed", "9"}).code, kExitOk);
  std::string first = ReadFile(manifest);
  std::string records = ReadFile(std::filesystem::path(store_) / "store.jsonl");
  ASSERT_EQ(Call({"finalize", "--store", store_, "--k", "4", "--seed", "9"}).code, kExitOk);
  EXPECT_EQ(ReadFile(manifest), first);
  EXPECT_EQ(ReadFile(std::filesystem::path(store_) / "store.jsonl"), records);
}

TEST_F(CliTest, QueryModesAndKeys) {
  IngestSample();
  ASSERT_EQ(Call({"finalize", "--store", store_, "--k", "2", "--seed", "1"}).code, kExitOk);

  auto sensitive = Call({"query", "--store", store_, "--text", "alice@example.com"});
  EXPECT_EQ(sensitive.code, kExitUsage);
  EXPECT_NE(sensitive.err.find("authorization"), std::string::npos) << sensitive.err;

  auto ranked = Call({"query", "--store", store_, "--text", "budget"});
  EXPECT_EQ(ranked.code, kExitOk) << ranked.err;
  EXPECT_EQ(Lines(ranked.out)[0], "mode\tRANKED");

  auto exact = Call({"query", "--keys", keys_, "--store", store_, "--text",
                     "Alice@Example.com"});
  ASSERT_EQ(exact.code, kExitOk) << exact.err;
  EXPECT_EQ(Lines(exact.out),
            (std::vector<std::string>{"mode\tEXACT", "0\t1.000000\texact"}));

  auto hybrid = Call({"query", "--keys", keys_, "--store", store_, "--text",
                      "budget review alice@example.com", "--probe", "2"});
  ASSERT_EQ(hybrid.code, kExitOk) << hybrid.err;
  auto lines = Lines(hybrid.out);
  EXPECT_EQ(lines[0], "mode\tHYBRID");
  EXPECT_EQ(lines[1], "0\t1.000000\texact,ranked");

  auto none = Call({"query", "--keys", keys_, "--store", store_, "--text",
                    "nobody@nowhere.invalid"});
  EXPECT_EQ(none.code, kExitNothingFound);

  auto wrong = (dir_ / "other.bin").string();
  ASSERT_EQ(Call({"keygen", "--out", wrong}).code, kExitOk);
  EXPECT_EQ(Call({"query", "--keys", wrong, "--store", store_, "--text",
                  "alice@example.com"})
                .code,
            kExitUsage);
}

TEST_F(CliTest, KeysFromEnvironment) {
  IngestSample();
  ASSERT_EQ(Call({"finalize", "--store", store_, "--k", "1", "--seed", "1"}).code, kExitOk);
  ::setenv(kKeysEnv, keys_.c_str(), 1);
  auto r = Call({"query", "--store", store_, "--text", "+4915112345678"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Lines(r.out)[1], "1\t1.000000\texact");
}

TEST_F(CliTest, InspectRedactsWithoutKeys) {
  IngestSample();
  auto r = Call({"inspect", "--store", store_, "--id", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.find("alice@example.com"), std::string::npos);
  EXPECT_NE(r.out.find("[[EMAIL#0]]"), std::string::npos);
  EXPECT_NE(r.out.find("entity\t0\tEMAIL"), std::string::npos);

  auto revealed = Call({"inspect", "--store", store_, "--id", "0", "--keys", keys_});
  ASSERT_EQ(revealed.code, kExitOk) << revealed.err;
  EXPECT_NE(revealed.out.find("entity\t0\tEMAIL\talice@example.com"), std::string::npos);

  EXPECT_EQ(Call({"inspect", "--store", store_, "--id", "7"}).code, kExitUsage);
}

TEST_F(CliTest, BenchWritesCsv) {
  auto out = (dir_ / "b.csv").string();
  auto r = Call({"bench", "lookup", "--sizes", "100,1000", "--out", out, "--queries", "10"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto lines = Lines(ReadFile(out));
  ASSERT_EQ(lines.size(), 2u + 2u * 2u);
  EXPECT_EQ(lines[0], bench::kCsvSchemaLine);
  EXPECT_EQ(lines[1], bench::kCsvHeader);
  EXPECT_EQ(lines[2].rfind("lookup,100,blind_lookup,", 0), 0u);
  EXPECT_EQ(lines[5].rfind("lookup,1000,direct_scan,", 0), 0u);

  auto again = (dir_ / "b2.csv").string();
  ASSERT_EQ(Call({"bench", "lookup", "--sizes", "100,1000", "--out", again,
                  "--queries", "10"})
                .code,
            kExitOk);
  EXPECT_EQ(NonTimingColumns(ReadFile(out)), NonTimingColumns(ReadFile(again)));
}

TEST_F(CliTest, BenchUsageErrors) {
  EXPECT_EQ(Call({"bench", "build", "--sizes", "100"}).code, kExitUsage);
  auto out = (dir_ / "b.csv").string();
  EXPECT_EQ(Call({"bench", "build", "--sizes", "200,100", "--out", out}).code, kExitUsage);
  EXPECT_EQ(Call({"bench", "nope", "--sizes", "100", "--out", out}).code, kExitUsage);
  EXPECT_EQ(Call({"bench", "build", "--sizes", "100", "--out", out, "--reps", "2"}).code,
            kExitUsage);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Call({}).code, kExitUsage);
  EXPECT_EQ(Call({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Call({"query", "--store", store_}).code, kExitUsage);
  EXPECT_EQ(Call({"query", "--store", store_, "--text", "x"}).code, kExitUsage);
  EXPECT_EQ(Call({"--help"}).code, kExitOk);
}

}  // namespace
}  // namespace privshard::cli
