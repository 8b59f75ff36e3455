#include <gtest/gtest.h>

#include <sstream>

#include "lrkit/bench.hpp"
#include "support.hpp"

using namespace lrkit;
using lrkit::testing::read_fixture;

namespace {

std::unique_ptr<Language> load(const std::string& stem) {
  return Language::from_sources(read_fixture(stem + ".y"), read_fixture(stem + ".l"));
}

CorpusOptions deterministic(RecovererKind kind, std::size_t repeats = 1) {
  CorpusOptions o;
  o.recoverer = kind;
  o.params.deterministic_order = true;
  o.repeats = repeats;
  return o;
}

RunRecord record(std::string file, std::size_t repeat, double time, bool ok, std::vector<std::size_t> costs,
                 double skipped) {
  RunRecord r;
  r.file = std::move(file);
  r.repeat = repeat;
  r.stats.recovery_time_s = time;
  r.stats.success = ok;
  r.stats.error_locations = costs.size() + (ok ? 0 : 1);
  r.stats.costs = ok ? std::move(costs) : std::vector<std::size_t>{};
  r.stats.tokens_skipped_pct = skipped;
  return r;
}

}  // namespace

TEST(Bench, RecovererNames) {
  for (auto kind : {RecovererKind::CpctPlus, RecovererKind::CpctPlusRev, RecovererKind::Panic, RecovererKind::None}) {
    EXPECT_EQ(parse_recoverer_kind(recoverer_kind_name(kind)), kind);
  }
  EXPECT_FALSE(parse_recoverer_kind("cpct"));
}

TEST(Bench, ValidFileHasNoErrors) {
  auto calc = load("calc");
  std::vector<CorpusFile> files{{"ok.txt", "2 + 3 * (4 + 5)"}};
  CorpusRun run = run_corpus(*calc, files, deterministic(RecovererKind::CpctPlus, 3));
  ASSERT_EQ(run.records.size(), 3u);
  SummaryStats s = summarize(run.records);
  EXPECT_EQ(s.files, 1u);
  EXPECT_EQ(s.error_locations, 0.0);
  EXPECT_EQ(s.failure_rate_pct, 0.0);
  EXPECT_FALSE(s.mean_cost);
}

TEST(Bench, SingleErrorAccounting) {
  auto calc = load("calc");
  std::vector<CorpusFile> files{{"operator_run.txt", "2 3 +"}};
  CorpusRun run = run_corpus(*calc, files, deterministic(RecovererKind::CpctPlus));
  ASSERT_EQ(run.records.size(), 1u);
  const RunStats& st = run.records[0].stats;
  EXPECT_TRUE(st.success);
  EXPECT_EQ(st.error_locations, 1u);
  EXPECT_EQ(st.costs, (std::vector<std::size_t>{2}));
  EXPECT_GE(st.tokens_skipped_pct, 0.0);
  EXPECT_LE(st.tokens_skipped_pct, 100.0);
}

TEST(Bench, ReverseRankingNeverReportsFewerLocations) {
  auto calc = load("calc");
  std::vector<CorpusFile> files{{"a", "2 3 +"}, {"b", "( 2 + 3 4 * 5"}, {"c", "2 + + 3 ) ( 4"}};
  auto plus = summarize(run_corpus(*calc, files, deterministic(RecovererKind::CpctPlus)).records);
  auto rev = summarize(run_corpus(*calc, files, deterministic(RecovererKind::CpctPlusRev)).records);
  EXPECT_GE(rev.error_locations, plus.error_locations);
}

TEST(Bench, UnlexableFilesAreSkipped) {
  auto calc = load("calc");
  std::vector<CorpusFile> files{{"bad", "2 + x"}, {"good", "2"}};
  CorpusRun run = run_corpus(*calc, files, deterministic(RecovererKind::Panic));
  ASSERT_EQ(run.skipped.size(), 1u);
  EXPECT_EQ(run.skipped[0].name, "bad");
  ASSERT_EQ(run.records.size(), 1u);
  EXPECT_EQ(run.records[0].file, "good");
}

TEST(Bench, ParallelRunsMatchSerial) {
  auto calc = load("calc");
  std::vector<CorpusFile> files;
  for (int i = 0; i < 12; ++i) files.push_back({"f" + std::to_string(i), i % 2 ? "2 3 +" : "( 2 + 3"});
  CorpusOptions serial = deterministic(RecovererKind::CpctPlus, 2);
  CorpusOptions parallel = serial;
  parallel.jobs = 4;
  auto a = run_corpus(*calc, files, serial).records;
  auto b = run_corpus(*calc, files, parallel).records;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].file, b[i].file);
    EXPECT_EQ(a[i].repeat, b[i].repeat);
    EXPECT_EQ(a[i].stats.costs, b[i].stats.costs);
    EXPECT_EQ(a[i].stats.tokens_skipped_pct, b[i].stats.tokens_skipped_pct);
  }
}

TEST(Bench, CsvLayout) {
  std::vector<RunRecord> recs{record("a,b", 0, 0.25, true, {2, 1}, 12.5)};
  recs[0].recoverer = RecovererKind::CpctPlusRev;
  std::ostringstream out;
  write_csv(out, recs);
  EXPECT_EQ(out.str(),
            "file,repeat,recoverer,recovery_time_s,success,error_locations,costs,tokens_skipped_pct\n"
            "\"a,b\",0,cpctplus-rev,0.250000,1,2,2;1,12.5000\n");
}

TEST(Bench, SummaryColumns) {
  std::vector<RunRecord> recs{record("a", 0, 1.0, true, {1, 3}, 10), record("a", 1, 3.0, false, {}, 30),
                              record("b", 0, 2.0, true, {2}, 20), record("b", 1, 2.0, true, {2}, 20)};
  SummaryStats s = summarize(recs);
  EXPECT_EQ(s.files, 2u);
  EXPECT_EQ(s.runs, 4u);
  EXPECT_DOUBLE_EQ(s.mean_time_s, 2.0);
  EXPECT_DOUBLE_EQ(s.median_time_s, 2.0);
  EXPECT_DOUBLE_EQ(*s.mean_cost, 2.0);  // 1, 3, 2, 2; the failed run contributes nothing
  EXPECT_DOUBLE_EQ(s.failure_rate_pct, 25.0);
  EXPECT_DOUBLE_EQ(s.tokens_skipped_pct, 20.0);
  EXPECT_DOUBLE_EQ(s.error_locations, 1.5 + 1.0);
  EXPECT_TRUE(skips_nefariously(s, 19.0));
  EXPECT_FALSE(skips_nefariously(s, 20.0));
}

TEST(Bench, SummaryTableFlagsSkipping) {
  std::vector<RunRecord> recs{record("a", 0, 0.5, true, {1}, 40)};
  std::vector<SummaryRow> rows{{"panic", summarize(recs), bootstrap(recs, 10, 0.99, 1)}};
  std::ostringstream out;
  print_summary(out, rows, 5.0);
  std::string text = out.str();
  EXPECT_NE(text.find("Tokens skipped (%)"), std::string::npos);
  EXPECT_NE(text.find("panic !"), std::string::npos);
  EXPECT_NE(text.find("40.00 [40.00, 40.00]"), std::string::npos);
}

TEST(Bootstrap, EmptyIsAnError) { EXPECT_THROW(bootstrap({}, 100, 0.99, 1), std::invalid_argument); }

TEST(Bootstrap, IdenticalRecordsGiveZeroWidth) {
  std::vector<RunRecord> recs;
  for (int f = 0; f < 4; ++f) {
    for (std::size_t r = 0; r < 5; ++r) recs.push_back(record("f" + std::to_string(f), r, 0.125, true, {2}, 5));
  }
  BootstrapIntervals ci = bootstrap(recs, 1000, 0.99, 7);
  for (Interval i : {ci.mean_time_s, ci.median_time_s, *ci.mean_cost, ci.failure_rate_pct, ci.tokens_skipped_pct,
                     ci.error_locations}) {
    EXPECT_EQ(i.lo, i.hi);
  }
  EXPECT_EQ(ci.mean_time_s.lo, 0.125);
  EXPECT_EQ(ci.error_locations.lo, 4.0);
}

TEST(Bootstrap, SingleRunIsAPoint) {
  std::vector<RunRecord> recs{record("only", 0, 0.3, true, {4}, 7.5)};
  BootstrapIntervals ci = bootstrap(recs, 100, 0.99, 3);
  EXPECT_EQ(ci.mean_time_s.lo, 0.3);
  EXPECT_EQ(ci.mean_time_s.hi, 0.3);
  EXPECT_EQ(ci.mean_cost->lo, 4.0);
  EXPECT_EQ(ci.tokens_skipped_pct.hi, 7.5);
}

TEST(Bootstrap, FailedRunsAreNotSampledForCost) {
  std::vector<RunRecord> recs{record("a", 0, 0.1, true, {3}, 0), record("a", 1, 0.1, false, {}, 0)};
  BootstrapIntervals ci = bootstrap(recs, 500, 0.99, 5);
  EXPECT_EQ(ci.mean_cost->lo, 3.0);
  EXPECT_EQ(ci.mean_cost->hi, 3.0);
  EXPECT_EQ(ci.failure_rate_pct.lo, 0.0);
  EXPECT_EQ(ci.failure_rate_pct.hi, 100.0);
}

TEST(Bootstrap, CoversTheGeneratingMean) {
  // Each file's repeats come from one exponential distribution with mean 0.2.
  const double true_mean = 0.2;
  std::mt19937_64 rng(2024);
  std::exponential_distribution<double> dist(1.0 / true_mean);
  const int trials = 100;
  int covered = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<RunRecord> recs;
    for (int f = 0; f < 40; ++f) {
      for (std::size_t r = 0; r < 5; ++r) recs.push_back(record("f" + std::to_string(f), r, dist(rng), true, {1}, 0));
    }
    Interval i = bootstrap(recs, 10000, 0.99, static_cast<std::uint64_t>(t) + 1).mean_time_s;
    covered += i.lo <= true_mean && true_mean <= i.hi ? 1 : 0;
  }
  EXPECT_GE(covered, 95);
}

TEST(Mutate, DeterministicPerSeed) {
  auto stmts = load("stmts");
  std::vector<CorpusFile> valid{{"a", "a = b + c; { d = e; }"}, {"b", "x = y;"}};
  auto one = mutate_corpus(stmts->lexer(), valid, 42, 3);
  auto two = mutate_corpus(stmts->lexer(), valid, 42, 3);
  auto other = mutate_corpus(stmts->lexer(), valid, 43, 3);
  ASSERT_EQ(one.size(), 2u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].name, two[i].name);
    EXPECT_EQ(one[i].text, two[i].text);
  }
  EXPECT_TRUE(one[0].text != other[0].text || one[1].text != other[1].text);
  EXPECT_THROW(mutate_corpus(stmts->lexer(), valid, 42, 3, 0), std::invalid_argument);
}

TEST(Mutate, TranspositionKeepsTokens) {
  auto stmts = load("stmts");
  std::vector<CorpusFile> valid{{"a", "a = b + c ;"}};
  auto swapped = mutate_corpus(stmts->lexer(), valid, 3, 4, kEditTranspose);
  std::string sorted_before = "a = b + c ;", sorted_after = swapped[0].text;
  sorted_after.pop_back();  // trailing newline
  std::sort(sorted_before.begin(), sorted_before.end());
  std::sort(sorted_after.begin(), sorted_after.end());
  EXPECT_EQ(sorted_before, sorted_after);
}

TEST(Mutate, ZeroEditsKeepFilesParsing) {
  auto stmts = load("stmts");
  std::vector<CorpusFile> valid{{"a", "a = b + c;\n{ d = e; }\n"}};
  auto same = mutate_corpus(stmts->lexer(), valid, 1, 0);
  EXPECT_EQ(same[0].text, valid[0].text);
  auto run = run_corpus(*stmts, same, deterministic(RecovererKind::None));
  EXPECT_TRUE(run.records[0].stats.success);
}

TEST(Mutate, OneDeletionIsClassified) {
  auto stmts = load("stmts");
  GeneratorOptions gen;
  gen.count = 40;
  gen.min_tokens = 8;
  gen.seed = 9;
  auto lexemes = sample_lexemes(stmts->grammar(), stmts->lexer(), {{"ID", "v"}});
  auto valid = generate_corpus(stmts->grammar(), lexemes, gen);
  auto broken = mutate_corpus(stmts->lexer(), valid, 5, 1, kEditDelete);
  for (std::size_t i = 0; i < broken.size(); ++i) {
    EXPECT_EQ(stmts->lexer().lex(broken[i].text).size() + 1, stmts->lexer().lex(valid[i].text).size());
  }
  // Every file either fails or still parses; the harness tells which.
  auto run = run_corpus(*stmts, broken, deterministic(RecovererKind::None));
  ASSERT_EQ(run.records.size(), broken.size());
  std::size_t failing = 0;
  for (const auto& r : run.records) {
    failing += r.stats.success ? 0 : 1;
    EXPECT_EQ(r.stats.error_locations, r.stats.success ? 0u : 1u);
  }
  EXPECT_GT(failing, broken.size() / 2);
}

TEST(Generate, SentencesParse) {
  for (const char* stem : {"calc", "stmts", "brackets", "minijava"}) {
    auto lang = load(stem);
    auto lexemes = sample_lexemes(lang->grammar(), lang->lexer(), {{"ID", "v"}, {"INT", "7"}});
    GeneratorOptions gen;
    gen.count = 25;
    gen.seed = 11;
    auto files = generate_corpus(lang->grammar(), lexemes, gen);
    ASSERT_EQ(files.size(), 25u);
    EXPECT_EQ(files[0].name, "sentence_0000.txt");
    auto run = run_corpus(*lang, files, deterministic(RecovererKind::None));
    EXPECT_TRUE(run.skipped.empty()) << stem;
    for (const auto& r : run.records) EXPECT_TRUE(r.stats.success) << stem << ": " << r.file;
  }
}

TEST(Generate, MissingLexemeIsReported) {
  auto stmts = load("stmts");
  auto lexemes = sample_lexemes(stmts->grammar(), stmts->lexer(), {});
  EXPECT_FALSE(lexemes[index(*stmts->grammar().find_token("ID"))]);
  EXPECT_EQ(lexemes[index(*stmts->grammar().find_token("="))], "=");
  GeneratorOptions gen;
  gen.min_tokens = 1;
  EXPECT_THROW(generate_corpus(stmts->grammar(), lexemes, gen), std::runtime_error);
}

TEST(Corpus, WriteThenLoad) {
  auto dir = std::filesystem::temp_directory_path() / "lrkit_corpus_test";
  std::filesystem::remove_all(dir);
  std::vector<CorpusFile> files{{"b.txt", "2"}, {"a.txt", "3 +"}};
  write_corpus(dir, files);
  Corpus c = load_corpus(dir);
  ASSERT_EQ(c.files.size(), 2u);
  EXPECT_EQ(c.files[0].name, "a.txt");
  EXPECT_EQ(c.files[0].text, "3 +");
  EXPECT_TRUE(c.skipped.empty());
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_corpus(dir), std::runtime_error);
}
