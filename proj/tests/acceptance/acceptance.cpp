// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fail.

#include <sys/resource.h>

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "lrkit/bench.hpp"
#include "lrkit/panic.hpp"
#include "support.hpp"

using namespace lrkit;
using lrkit::testing::first_error;
using lrkit::testing::fixture_path;
using lrkit::testing::rendered;
using lrkit::testing::token_stream;

namespace {

// Tolerances and sizes.
constexpr double kShiftVariantsBudgetS = 1.0;
constexpr std::size_t kShift1CostCeiling = 4;  // Shift1 must find nothing up to this cost
constexpr std::size_t kOracleMaxLength = 5;
constexpr std::size_t kOracleCostBound = 8;
constexpr std::size_t kEquivalenceMaxLength = 8;
constexpr std::size_t kUnmatchedBrackets = 12;
constexpr auto kRecoveryTimeout = std::chrono::milliseconds(500);
constexpr auto kTimeoutSlack = std::chrono::milliseconds(50);
constexpr long kPeakRssLimitKiB = 1L << 20;  // 1 GiB
constexpr std::size_t kMutatedFiles = 500;
constexpr std::size_t kEditsPerFile = 2;
constexpr std::uint64_t kCorpusSeed = 20190117;
constexpr std::size_t kMergedSuccessConfigurations = 5;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::unique_ptr<Language> load(const std::string& stem, bool merge = true) {
  return Language::from_files(fixture_path(stem + ".y"), fixture_path(stem + ".l"), merge);
}

std::vector<TokenId> alphabet(const Grammar& g) {
  std::vector<TokenId> out;
  for (std::size_t t = 1; t < g.token_count(); ++t) out.push_back(make_id<TokenId>(t));
  return out;
}

// Calls f on every token string over `sigma` of length at most `max_len`.
void for_each_string(const std::vector<TokenId>& sigma, std::size_t max_len,
                     const std::function<void(const std::vector<TokenId>&)>& f) {
  std::vector<TokenId> cur;
  std::function<void()> rec = [&] {
    f(cur);
    if (cur.size() == max_len) return;
    for (TokenId t : sigma) {
      cur.push_back(t);
      rec();
      cur.pop_back();
    }
  };
  rec();
}

std::set<RepairSequence> searched_set(const Language& lang, const testing::ErrorPoint& e,
                                      const std::vector<Token>& toks, RecoveryParams p) {
  SearchResult r = cpct_search(lang.table(), e.stack, toks, e.offset, p, Clock::time_point::max());
  auto seqs = candidate_sequences(r.successes);
  return {seqs.begin(), seqs.end()};
}

Verdict shift_variants() {
  auto calc = load("calc");
  std::string src = "2 3 +";
  auto toks = calc->lexer().lex(src);
  auto err = *first_error(calc->table(), toks);
  auto run = [&](ShiftVariant v, std::optional<std::size_t> ceiling) {
    RecoveryParams p;
    p.shift = v;
    p.max_cost = ceiling;
    SearchResult r = cpct_search(calc->table(), err.stack, toks, err.offset, p, Clock::time_point::max());
    return rendered(candidate_sequences(r.successes), calc->grammar(), toks, err.offset, src);
  };
  auto start = Clock::now();
  auto one = run(ShiftVariant::Shift1, kShift1CostCeiling);
  auto two = run(ShiftVariant::Shift2, std::nullopt);
  auto three = run(ShiftVariant::Shift3, std::nullopt);
  double secs = std::chrono::duration<double>(Clock::now() - start).count();

  const std::set<std::string> want_two{"Delete 3, Delete +", "Delete 3, Shift +, Insert INT",
                                       "Insert +, Shift 3, Shift +, Insert INT",
                                       "Insert *, Shift 3, Shift +, Insert INT"};
  std::set<std::string> want_three = want_two;
  want_three.insert({"Insert *, Shift 3, Delete +", "Insert +, Shift 3, Delete +"});
  std::ostringstream d;
  d << "Shift1 " << one.size() << ", Shift2 " << two.size() << ", Shift3 " << three.size() << " sequences in "
    << std::fixed << std::setprecision(3) << secs << " s";
  return {one.empty() && two == want_two && three == want_three && secs < kShiftVariantsBudgetS, d.str()};
}

Verdict panic_trace() {
  auto calc = load("calc");
  auto toks = calc->lexer().lex("2 + + 3");
  auto err = *first_error(calc->table(), toks);
  auto out = panic_recover(calc->table(), err.stack, toks, err.offset);
  const ParseStack at_error{StateId{0}, StateId{2}, StateId{7}};
  const ParseStack after{StateId{0}, StateId{2}};
  bool ok = err.stack == at_error && out && out->stack == after && out->offset == err.offset;
  std::ostringstream d;
  d << "error stack size " << err.stack.size() << ", recovered stack size " << (out ? out->stack.size() : 0)
    << ", tokens skipped " << (out ? out->offset - err.offset : 0);
  return {ok, d.str()};
}

Verdict seven_behaviours() {
  auto calc = load("calc");
  auto avoid = Language::from_files(fixture_path("calc_avoid.y"), fixture_path("calc.l"));
  RecoveryParams det;
  det.deterministic_order = true;
  std::mt19937_64 rng(1);
  auto outcome = [&](const Language& l, const std::string& src, RecoveryParams p) {
    auto toks = l.lexer().lex(src);
    auto err = *first_error(l.table(), toks);
    p.avoid_insert = l.grammar().avoid_insert_tokens();
    auto r = cpct_recover(l.table(), err.stack, toks, err.offset, p, rng, Clock::time_point::max());
    std::vector<std::string> seqs;
    std::string applied;
    if (r) {
      for (const auto& s : r->sequences) seqs.push_back(render_sequence(s, l.grammar(), toks, err.offset, src));
      applied = seqs.at(r->applied);
    }
    return std::pair{seqs, applied};
  };
  auto [missing, m_applied] = outcome(*calc, "2 +", det);
  auto [doubled, d_applied] = outcome(*calc, "2 + + 3", det);
  std::set<std::string> doubled_set(doubled.begin(), doubled.end());
  auto [avoided, a_applied] = outcome(*avoid, "2 + + 3", det);

  // Without a fixed order the applied sequence is drawn at random, but only
  // from sequences that insert no avoided token.
  bool random_ok = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RecoveryParams p;
    p.seed = seed;
    rng.seed(seed);
    random_ok = random_ok && outcome(*avoid, "2 + + 3", p).second == "Delete +";
  }
  bool ok = missing == std::vector<std::string>{"Insert INT"} &&
            doubled_set == std::set<std::string>{"Delete +", "Insert INT"} &&
            avoided == std::vector<std::string>{"Delete +", "Insert INT"} && a_applied == "Delete +" && random_ok;
  std::ostringstream d;
  d << "'2 +' -> " << missing.size() << " sequence; '2 + + 3' -> " << doubled.size()
    << " sequences; with avoided INT applies '" << a_applied << "' and ranks '"
    << (avoided.size() > 1 ? avoided[1] : "") << "' second";
  return {ok, d.str()};
}

struct OracleTally {
  std::size_t strings = 0;
  std::size_t errors = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
};

OracleTally oracle_compare(const std::string& stem, bool merge) {
  auto lang = load(stem);
  OracleTally tally;
  RecoveryParams p;
  p.merge = merge;
  for_each_string(alphabet(lang->grammar()), kOracleMaxLength, [&](const std::vector<TokenId>& s) {
    ++tally.strings;
    auto toks = token_stream(lang->grammar(), s);
    auto err = first_error(lang->table(), toks);
    if (!err) return;
    ++tally.errors;
    auto got = searched_set(*lang, *err, toks, p);
    auto want = oracle_min_repairs(lang->table(), err->stack, toks, err->offset, kOracleCostBound);
    if (got != want) {
      if (tally.mismatches++ == 0) {
        for (TokenId t : s) tally.first_mismatch += std::string(lang->grammar().token_name(t)) + " ";
      }
    }
  });
  return tally;
}

Verdict oracle_completeness(bool merge) {
  bool ok = true;
  std::ostringstream d;
  for (const char* stem : {"calc", "stmts", "brackets"}) {
    OracleTally t = oracle_compare(stem, merge);
    ok = ok && t.mismatches == 0 && t.errors > 0;
    d << stem << " " << t.errors << "/" << t.strings << " erroneous, " << t.mismatches << " mismatched";
    if (!t.first_mismatch.empty()) d << " (first: " << t.first_mismatch << ")";
    d << "; ";
  }
  return {ok, d.str()};
}

Verdict merge_neutrality() {
  Verdict v = oracle_completeness(false);
  auto calc = load("calc");
  auto toks = calc->lexer().lex("2 3 +");
  auto err = *first_error(calc->table(), toks);
  SearchResult r = cpct_search(calc->table(), err.stack, toks, err.offset, {}, Clock::time_point::max());
  v.pass = v.pass && r.successes.size() == kMergedSuccessConfigurations;
  v.detail = "merging off: " + v.detail + "merging on, '2 3 +': " + std::to_string(r.successes.size()) +
             " success configurations";
  return v;
}

// Accept/reject agreement of two tables over all strings up to a length,
// extending a prefix only while at least one parser can still accept.
struct Equivalence {
  const StateTable& a;
  const StateTable& b;
  std::size_t max_len;
  std::vector<TokenId> sigma;
  std::size_t prefixes = 0;
  std::size_t disagreements = 0;

  // Feeds one token; false if the parser reports an error first.
  static bool feed(const StateTable& t, ParseStack& stack, TokenId tok) {
    while (true) {
      Action act = lr_step(t, stack, tok);
      if (act.kind == Action::Kind::Shift || act.kind == Action::Kind::Accept) return true;
      if (act.kind == Action::Kind::Error) return false;
    }
  }
  static bool accepts(const StateTable& t, std::optional<ParseStack> stack) {
    return stack && feed(t, *stack, kEofToken);
  }

  void visit(const std::optional<ParseStack>& sa, const std::optional<ParseStack>& sb, std::size_t len) {
    ++prefixes;
    if (accepts(a, sa) != accepts(b, sb)) ++disagreements;
    if (len == max_len) return;
    for (TokenId t : sigma) {
      std::optional<ParseStack> na = sa, nb = sb;
      if (na && !feed(a, *na, t)) na.reset();
      if (nb && !feed(b, *nb, t)) nb.reset();
      if (na || nb) visit(na, nb, len + 1);
    }
  }
};

Verdict table_equivalence() {
  bool ok = true;
  bool some_smaller = false;
  std::ostringstream d;
  for (const char* stem : {"calc", "stmts", "brackets", "minijava", "nested"}) {
    auto canonical = load(stem, false);
    auto merged = load(stem, true);
    Equivalence eq{canonical->table(), merged->table(), kEquivalenceMaxLength, alphabet(merged->grammar())};
    eq.visit(ParseStack{StateId{0}}, ParseStack{StateId{0}}, 0);
    ok = ok && eq.disagreements == 0;
    some_smaller = some_smaller || merged->table().state_count() < canonical->table().state_count();
    d << stem << " " << canonical->table().state_count() << "->" << merged->table().state_count() << " states, "
      << eq.prefixes << " live prefixes, " << eq.disagreements << " disagreements; ";
  }
  return {ok && some_smaller, d.str()};
}

Verdict timeout_budget() {
  auto nested = load("nested");
  std::string src = "f ";
  for (std::size_t i = 0; i < kUnmatchedBrackets; ++i) src += (i % 3 == 0 ? "( " : i % 3 == 1 ? "[ " : "g ( ");
  src += "x ;";
  auto toks = nested->lexer().lex(src);
  CpctPlus rec(nested->grammar(), {});
  auto start = Clock::now();
  ParseResult r = parse(nested->table(), nested->grammar(), toks, &rec, {.timeout = kRecoveryTimeout, .source = src});
  auto wall = Clock::now() - start;
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  bool ok = !r.recovery_succeeded && wall <= kRecoveryTimeout + kTimeoutSlack && ru.ru_maxrss < kPeakRssLimitKiB;
  std::ostringstream d;
  d << kUnmatchedBrackets << " unmatched brackets: " << (r.recovery_succeeded ? "recovered" : "failed") << " after "
    << std::chrono::duration_cast<std::chrono::milliseconds>(wall).count() << " ms (budget "
    << kRecoveryTimeout.count() << " + " << kTimeoutSlack.count() << "), peak RSS " << ru.ru_maxrss / 1024 << " MiB";
  return {ok, d.str()};
}

Verdict reverse_ranking() {
  auto stmts = load("stmts");
  GeneratorOptions gen;
  gen.count = kMutatedFiles;
  gen.seed = kCorpusSeed;
  gen.min_tokens = 20;
  gen.max_tokens = 150;
  auto valid = generate_corpus(stmts->grammar(), sample_lexemes(stmts->grammar(), stmts->lexer(), {{"ID", "v"}}), gen);
  auto broken = mutate_corpus(stmts->lexer(), valid, kCorpusSeed, kEditsPerFile);
  auto summary = [&](RecovererKind kind) {
    CorpusOptions opt;
    opt.recoverer = kind;
    opt.params.seed = kCorpusSeed;
    opt.repeats = 1;
    opt.jobs = std::max(1u, std::thread::hardware_concurrency());
    return summarize(run_corpus(*stmts, broken, opt).records);
  };
  SummaryStats plus = summary(RecovererKind::CpctPlus);
  SummaryStats rev = summary(RecovererKind::CpctPlusRev);
  bool ok = rev.error_locations >= plus.error_locations && plus.mean_cost && rev.mean_cost &&
            *rev.mean_cost >= *plus.mean_cost;
  std::ostringstream d;
  d << std::fixed << std::setprecision(3) << broken.size() << " files: error locations plus " << plus.error_locations
    << " rev " << rev.error_locations << "; mean cost plus " << plus.mean_cost.value_or(0) << " rev "
    << rev.mean_cost.value_or(0) << "; failure rate plus " << plus.failure_rate_pct << "% rev "
    << rev.failure_rate_pct << "%";
  return {ok, d.str()};
}

Verdict cli_golden() {
  const std::string input = fixture_path("inputs/missing_comma.java");
  std::ostringstream out, err;
  int code = tools::run_cli({"--deterministic", fixture_path("minijava.l"), fixture_path("minijava.y"), input}, out,
                            err);
  const std::string want =
      "Parsing error at line 2 col 9. Repair sequences found:\n"
      "  1: Insert ,\n"
      "  2: Insert =\n"
      "  3: Delete y\n";

  auto java = load("minijava");
  std::string src = read_file(input);
  auto toks = java->lexer().lex(src);
  auto e = *first_error(java->table(), toks);
  auto oracle = rendered(oracle_min_repairs(java->table(), e.stack, toks, e.offset, kOracleCostBound),
                         java->grammar(), toks, e.offset, src);

  std::ostringstream out2, err2;
  int valid = tools::run_cli({fixture_path("calc.l"), fixture_path("calc.y"), fixture_path("inputs/valid.calc")},
                             out2, err2);
  bool ok = code == 1 && out.str() == want && err.str().empty() &&
            oracle == std::set<std::string>{"Delete y", "Insert ,", "Insert ="} && valid == 0;
  std::ostringstream d;
  d << "missing comma: exit " << code << ", output " << (out.str() == want ? "matches" : "differs")
    << ", oracle agrees: " << (oracle.size() == 3 ? "yes" : "no") << "; '2 + 3': exit " << valid;
  return {ok, d.str()};
}

Verdict bench_accounting() {
  struct Case {
    const char* y;
    const char* l;
    const char* src;
  };
  const Case cases[] = {{"calc_avoid.y", "calc.l", "2 + + 3"},
                        {"calc.y", "calc.l", "2 3 +"},
                        {"stmts.y", "stmts.l", "a = b c ; d = e ;"},
                        {"minijava.y", "minijava.l", "class C { int x y; }"}};
  bool ok = true;
  std::ostringstream d;
  for (const Case& c : cases) {
    auto lang = Language::from_files(fixture_path(c.y), fixture_path(c.l));
    std::vector<CorpusFile> files{{"one", c.src}};
    CorpusOptions opt;
    opt.params.deterministic_order = true;
    opt.repeats = 1;
    CorpusRun run = run_corpus(*lang, files, opt);
    const RunStats& st = run.records.at(0).stats;

    auto toks = lang->lexer().lex(c.src);
    auto e = *first_error(lang->table(), toks);
    auto oracle = oracle_min_repairs(lang->table(), e.stack, toks, e.offset, kOracleCostBound);
    std::size_t min_cost = oracle.empty() ? 0 : repair_count(*oracle.begin());

    RecoveryParams det;
    det.deterministic_order = true;
    CpctPlus rec(lang->grammar(), det);
    ParseResult pr = parse(lang->table(), lang->grammar(), toks, &rec, {.source = c.src});
    std::size_t deletes = 0;
    for (const auto& rep : pr.reports) {
      for (const Repair& r : rep.sequences.at(*rep.applied)) deletes += r.is_delete() ? 1 : 0;
    }
    double want_pct = 100.0 * static_cast<double>(deletes) / static_cast<double>(toks.size() - 1);

    std::vector<RunRecord> copies(5, run.records[0]);
    for (std::size_t i = 0; i < copies.size(); ++i) copies[i].repeat = i;
    BootstrapIntervals ci = bootstrap(copies, 1000, 0.99, kCorpusSeed);
    bool zero_width = ci.mean_time_s.lo == ci.mean_time_s.hi && ci.mean_cost && ci.mean_cost->lo == ci.mean_cost->hi &&
                      ci.tokens_skipped_pct.lo == ci.tokens_skipped_pct.hi &&
                      ci.error_locations.lo == ci.error_locations.hi;

    bool case_ok = st.success && st.error_locations == 1 && st.costs.size() == 1 && st.costs[0] == min_cost &&
                   st.tokens_skipped_pct == want_pct && zero_width;
    ok = ok && case_ok;
    d << "'" << c.src << "' cost " << (st.costs.empty() ? 0 : st.costs[0]) << "/" << min_cost << " skipped "
      << std::setprecision(4) << st.tokens_skipped_pct << "%" << (case_ok ? "" : " (bad)") << "; ";
  }
  return {ok, d.str() + "identical records bootstrap to zero width"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"shift variants find 0, 4 and 6 sequences on '2 3 +'", shift_variants},
      {"panic mode unwinds [0, 2, 7] to [0, 2] skipping nothing", panic_trace},
      {"missing operand, doubled operator and avoided inserts", seven_behaviours},
      {"search agrees with the brute-force oracle on short strings", [] { return oracle_completeness(true); }},
      {"merging configurations changes no repair set", merge_neutrality},
      {"merged and canonical tables accept the same strings", table_equivalence},
      {"recovery gives up within its time budget", timeout_budget},
      {"reverse ranking reports no fewer errors at no lower cost", reverse_ranking},
      {"command line output for the missing comma", cli_golden},
      {"benchmark accounting on single-error files", bench_accounting},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = Clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    failed += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << i + 1 << "  " << criteria[i].first << "  ["
              << v.detail << "] " << std::fixed << std::setprecision(2) << secs << " s" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
