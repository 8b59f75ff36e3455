#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "lrkit/bench.hpp"
#include "lrkit/cpctplus.hpp"
#include "lrkit/language.hpp"
#include "lrkit/panic.hpp"

namespace {

using namespace lrkit;

std::string fixture(const std::string& name) { return std::string(LRKIT_FIXTURE_DIR) + "/" + name; }

std::unique_ptr<Language> load(const std::string& stem, bool merge = true) {
  return Language::from_files(fixture(stem + ".y"), fixture(stem + ".l"), merge);
}

struct ErrorSite {
  ParseStack stack{StateId{0}};
  std::size_t offset = 0;
};

ErrorSite first_error(const StateTable& table, const std::vector<Token>& toks) {
  ErrorSite e;
  while (true) {
    Action a = lr_step(table, e.stack, toks[e.offset].type);
    if (a.kind == Action::Kind::Shift) ++e.offset;
    if (a.kind == Action::Kind::Error || a.kind == Action::Kind::Accept) return e;
  }
}

void BM_BuildTable(benchmark::State& state, const char* stem, bool merge) {
  std::string y = read_file(fixture(std::string(stem) + ".y"));
  Grammar g = Grammar::parse(y);
  for (auto _ : state) {
    StateGraph sg = build_stategraph(g, merge);
    StateTable table(sg, g);
    benchmark::DoNotOptimize(table.state_count());
  }
}
BENCHMARK_CAPTURE(BM_BuildTable, nested_pager, "nested", true);
BENCHMARK_CAPTURE(BM_BuildTable, nested_canonical, "nested", false);
BENCHMARK_CAPTURE(BM_BuildTable, minijava_pager, "minijava", true);

void BM_Search(benchmark::State& state, const char* stem, const char* src) {
  auto lang = load(stem);
  auto toks = lang->lexer().lex(src);
  ErrorSite e = first_error(lang->table(), toks);
  for (auto _ : state) {
    SearchResult r = cpct_search(lang->table(), e.stack, toks, e.offset, {}, Clock::time_point::max());
    benchmark::DoNotOptimize(r.successes.size());
  }
}
BENCHMARK_CAPTURE(BM_Search, calc_operator_run, "calc", "2 3 +");
BENCHMARK_CAPTURE(BM_Search, minijava_missing_comma, "minijava", "class C {\n  int x y;\n}\n");
BENCHMARK_CAPTURE(BM_Search, nested_unclosed, "nested", "f ( [ g ( x ;");

void BM_Panic(benchmark::State& state) {
  auto lang = load("calc");
  auto toks = lang->lexer().lex("2 + + 3");
  ErrorSite e = first_error(lang->table(), toks);
  for (auto _ : state) benchmark::DoNotOptimize(panic_recover(lang->table(), e.stack, toks, e.offset));
}
BENCHMARK(BM_Panic);

void BM_ParseCorpus(benchmark::State& state) {
  auto lang = load("stmts");
  GeneratorOptions gen;
  gen.count = 100;
  gen.min_tokens = 20;
  gen.max_tokens = 150;
  auto valid = generate_corpus(lang->grammar(), sample_lexemes(lang->grammar(), lang->lexer(), {{"ID", "v"}}), gen);
  auto files = mutate_corpus(lang->lexer(), valid, 1, static_cast<std::size_t>(state.range(0)));
  CorpusOptions opt;
  opt.repeats = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_corpus(*lang, files, opt).records.size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(files.size()));
}
BENCHMARK(BM_ParseCorpus)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
