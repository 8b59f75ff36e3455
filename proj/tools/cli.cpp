#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <map>

#include "lrkit/bench.hpp"

namespace lrkit::tools {

namespace {

struct Options {
  std::string lexer_file;
  std::string grammar_file;
  std::string input_file;
  std::string recoverer = "cpctplus";
  std::uint64_t timeout_ms = 500;
  bool deterministic = false;
  bool print_tree = false;
  bool quiet = false;
  bool dump_states = false;
  std::uint64_t seed = 0;
};

void report_error(std::ostream& out, const RecoveryReport& r, const Grammar& g, std::span<const Token> tokens,
                  std::string_view src) {
  out << "Parsing error at line " << r.line << " col " << r.col << ". ";
  if (!r.success) {
    out << "No repair sequences found.\n";
  } else if (r.sequences.empty()) {
    out << "Skipped " << r.tokens_skipped << " token" << (r.tokens_skipped == 1 ? "" : "s") << " and popped "
        << r.stack_pops << " state" << (r.stack_pops == 1 ? "" : "s") << ".\n";
  } else {
    out << "Repair sequences found:\n";
    for (std::size_t i = 0; i < r.sequences.size(); ++i) {
      out << "  " << i + 1 << ": " << render_sequence(r.sequences[i], g, tokens, r.token_offset, src) << '\n';
    }
  }
}

int run(const Options& opt, std::ostream& out, std::ostream& err) {
  auto kind = parse_recoverer_kind(opt.recoverer);
  std::unique_ptr<Language> lang;
  std::string src;
  try {
    lang = Language::from_files(opt.grammar_file, opt.lexer_file);
    src = read_file(opt.input_file);
  } catch (const GrammarError& e) {
    err << opt.grammar_file << ": " << e.what() << '\n';
    return kExitFailed;
  } catch (const LexSpecError& e) {
    err << opt.lexer_file << ":" << e.line() << ": " << e.what() << '\n';
    return kExitFailed;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitFailed;
  }
  const Grammar& g = lang->grammar();

  if (!opt.quiet) {
    std::size_t sr = lang->table().shift_reduce_conflicts();
    std::size_t rr = lang->table().reduce_reduce_conflicts();
    if (sr + rr > 0) {
      err << "warning: " << sr << " shift/reduce and " << rr << " reduce/reduce conflicts\n";
    }
    for (TokenId t : lang->lexer().unproduced_tokens()) {
      err << "warning: no lexer rule produces token '" << g.token_name(t) << "'\n";
    }
  }
  if (opt.dump_states) out << lang->graph().dump();

  std::vector<Token> tokens;
  try {
    tokens = lang->lexer().lex(src);
  } catch (const LexError& e) {
    auto pos = LineIndex(src).position(e.offset());
    err << "Lexing error at line " << pos.line << " col " << pos.col << ".\n";
    return kExitFailed;
  }

  RecoveryParams params;
  params.timeout = std::chrono::milliseconds(opt.timeout_ms);
  params.deterministic_order = opt.deterministic;
  params.seed = opt.seed;
  auto recoverer = make_recoverer(*kind, g, params);
  ParseResult r = parse(lang->table(), g, tokens, recoverer.get(), {.timeout = params.timeout, .source = src});

  for (const RecoveryReport& rep : r.reports) report_error(out, rep, g, tokens, src);
  if (opt.print_tree && r.tree) out << r.tree->pretty(g, src);
  if (!r.recovery_succeeded) return kExitFailed;
  return r.reports.empty() ? kExitClean : kExitRecovered;
}

// CLI11 consumes arguments from the back of the vector.
int parse_args(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               bool& done) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  done = false;
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    done = true;
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitFailed;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Parse a file with an LR(1) grammar, reporting and recovering from syntax errors", "nimbleparse"};
  app.add_option("lexer", opt.lexer_file, "Lexer specification (.l)")->required();
  app.add_option("grammar", opt.grammar_file, "Grammar (.y)")->required();
  app.add_option("input", opt.input_file, "File to parse")->required();
  app.add_option("-r,--recoverer", opt.recoverer, "Error recovery algorithm")
      ->check(CLI::IsMember({"cpctplus", "cpctplus-rev", "panic", "none"}))
      ->capture_default_str();
  app.add_option("-t,--timeout", opt.timeout_ms, "Recovery time budget per file in milliseconds")
      ->capture_default_str();
  app.add_flag("-d,--deterministic", opt.deterministic, "Apply the first ranked repair instead of a random one");
  app.add_option("--seed", opt.seed, "Seed for choosing among equally ranked repairs (0: random)");
  app.add_flag("-p,--print-tree", opt.print_tree, "Print the parse tree");
  app.add_flag("-q,--quiet", opt.quiet, "Suppress grammar and lexer warnings");
  app.add_flag("--dump-states", opt.dump_states, "Print the LR state graph");

  bool done = false;
  int code = parse_args(app, args, out, err, done);
  if (done) return code;
  return run(opt, out, err);
}

namespace {

struct LanguageArgs {
  std::string grammar_file;
  std::string lexer_file;

  void add(CLI::App& cmd) {
    cmd.add_option("-g,--grammar", grammar_file, "Grammar (.y)")->required();
    cmd.add_option("-l,--lexer", lexer_file, "Lexer specification (.l)")->required();
  }
};

struct RunArgs {
  LanguageArgs lang;
  std::string corpus;
  std::vector<std::string> recoverers{"cpctplus"};
  std::size_t repeats = 5;
  std::size_t jobs = 1;
  std::uint64_t timeout_ms = 500;
  std::string csv;
  std::size_t bootstrap = 1000;
  double confidence = 0.99;
  std::uint64_t seed = 0;
  double skip_threshold = 10.0;
};

struct MutateArgs {
  LanguageArgs lang;
  std::string input;
  std::string output;
  std::uint64_t seed = 1;
  std::size_t edits = 2;
  std::vector<std::string> kinds{"delete", "insert", "transpose"};
};

struct GenerateArgs {
  LanguageArgs lang;
  std::string output;
  GeneratorOptions gen;
  std::vector<std::string> lexemes;
};

int bench_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  auto lang = Language::from_files(a.lang.grammar_file, a.lang.lexer_file);
  Corpus corpus = load_corpus(a.corpus);
  for (const auto& s : corpus.skipped) err << "skipped " << s.name << ": " << s.reason << '\n';

  std::vector<RunRecord> all;
  std::vector<SummaryRow> rows;
  bool reported_lex_skips = false;
  for (const std::string& name : a.recoverers) {
    CorpusOptions opt;
    opt.recoverer = *parse_recoverer_kind(name);
    opt.params.timeout = std::chrono::milliseconds(a.timeout_ms);
    opt.params.seed = a.seed;
    opt.repeats = a.repeats;
    opt.jobs = a.jobs;
    CorpusRun run = run_corpus(*lang, corpus.files, opt);
    if (!reported_lex_skips) {
      for (const auto& s : run.skipped) err << "skipped " << s.name << ": " << s.reason << '\n';
      reported_lex_skips = true;
    }
    SummaryRow row{name, summarize(run.records), std::nullopt};
    if (a.bootstrap > 0 && !run.records.empty()) row.intervals = bootstrap(run.records, a.bootstrap, a.confidence, a.seed);
    rows.push_back(std::move(row));
    all.insert(all.end(), run.records.begin(), run.records.end());
  }

  if (a.csv == "-") {
    write_csv(out, all);
  } else if (!a.csv.empty()) {
    std::ofstream f(a.csv);
    write_csv(f, all);
    if (!f) throw std::runtime_error("cannot write " + a.csv);
  }
  out << "files: " << (rows.empty() ? 0 : rows[0].stats.files) << ", repeats: " << a.repeats << '\n';
  print_summary(out, rows, a.skip_threshold);
  return 0;
}

int bench_mutate(const MutateArgs& a, std::ostream& out, std::ostream& err) {
  auto lang = Language::from_files(a.lang.grammar_file, a.lang.lexer_file);
  Corpus corpus = load_corpus(a.input);
  for (const auto& s : corpus.skipped) err << "skipped " << s.name << ": " << s.reason << '\n';
  unsigned kinds = 0;
  for (const std::string& k : a.kinds) kinds |= k == "delete" ? kEditDelete : k == "insert" ? kEditInsert : kEditTranspose;
  auto mutated = mutate_corpus(lang->lexer(), corpus.files, a.seed, a.edits, kinds);
  write_corpus(a.output, mutated);
  out << "wrote " << mutated.size() << " files to " << a.output << '\n';
  return 0;
}

int bench_generate(const GenerateArgs& a, std::ostream& out, std::ostream&) {
  auto lang = Language::from_files(a.lang.grammar_file, a.lang.lexer_file);
  std::map<std::string, std::string> overrides;
  for (const std::string& kv : a.lexemes) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw std::runtime_error("--lexeme expects NAME=TEXT, got '" + kv + "'");
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  auto files = generate_corpus(lang->grammar(), sample_lexemes(lang->grammar(), lang->lexer(), overrides), a.gen);
  write_corpus(a.output, files);
  out << "wrote " << files.size() << " files to " << a.output << '\n';
  return 0;
}

}  // namespace

int run_bench_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Error recovery experiments over a corpus", "lrbench"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Parse a corpus repeatedly and summarise recovery metrics");
  run.lang.add(*run_cmd);
  run_cmd->add_option("-c,--corpus", run.corpus, "Directory of input files")->required()->check(CLI::ExistingDirectory);
  run_cmd->add_option("-r,--recoverer", run.recoverers, "Recoverers to compare (repeatable)")
      ->check(CLI::IsMember({"cpctplus", "cpctplus-rev", "panic", "none"}))
      ->capture_default_str();
  run_cmd->add_option("-n,--repeats", run.repeats, "Runs per file")->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("-j,--jobs", run.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("-t,--timeout", run.timeout_ms, "Recovery budget per file in milliseconds")
      ->capture_default_str();
  run_cmd->add_option("--csv", run.csv, "Write per-run records here ('-' for stdout)");
  run_cmd->add_option("--bootstrap", run.bootstrap, "Bootstrap iterations (0 disables)")->capture_default_str();
  run_cmd->add_option("--confidence", run.confidence, "Bootstrap interval confidence")
      ->capture_default_str()
      ->check(CLI::Range(0.5, 0.9999));
  run_cmd->add_option("--seed", run.seed, "Seed for repair choice and bootstrap (0: random repairs)");
  run_cmd->add_option("--skip-threshold", run.skip_threshold, "Flag recoverers skipping more than this % of input")
      ->capture_default_str();

  MutateArgs mutate;
  CLI::App* mutate_cmd = app.add_subcommand("mutate", "Make broken copies of valid files");
  mutate.lang.add(*mutate_cmd);
  mutate_cmd->add_option("-i,--input", mutate.input, "Directory of valid files")->required()->check(CLI::ExistingDirectory);
  mutate_cmd->add_option("-o,--output", mutate.output, "Output directory")->required();
  mutate_cmd->add_option("--seed", mutate.seed, "Random seed")->capture_default_str();
  mutate_cmd->add_option("-e,--edits", mutate.edits, "Edits per file")->capture_default_str();
  mutate_cmd->add_option("-k,--kinds", mutate.kinds, "Edit kinds")
      ->check(CLI::IsMember({"delete", "insert", "transpose"}))
      ->capture_default_str();

  GenerateArgs generate;
  CLI::App* generate_cmd = app.add_subcommand("generate", "Write random sentences of a grammar");
  generate.lang.add(*generate_cmd);
  generate_cmd->add_option("-o,--output", generate.output, "Output directory")->required();
  generate_cmd->add_option("--count", generate.gen.count, "Number of files")->capture_default_str();
  generate_cmd->add_option("--seed", generate.gen.seed, "Random seed")->capture_default_str();
  generate_cmd->add_option("--max-depth", generate.gen.max_depth, "Derivation depth before taking shortcuts")
      ->capture_default_str();
  generate_cmd->add_option("--min-tokens", generate.gen.min_tokens, "Shortest sentence")->capture_default_str();
  generate_cmd->add_option("--max-tokens", generate.gen.max_tokens, "Longest sentence")->capture_default_str();
  generate_cmd->add_option("--lexeme", generate.lexemes, "Lexeme for a token, as NAME=TEXT (repeatable)");

  bool done = false;
  int code = parse_args(app, args, out, err, done);
  if (done) return code;
  try {
    if (run_cmd->parsed()) return bench_run(run, out, err);
    if (mutate_cmd->parsed()) return bench_mutate(mutate, out, err);
    return bench_generate(generate, out, err);
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitFailed;
  }
}

}  // namespace lrkit::tools
