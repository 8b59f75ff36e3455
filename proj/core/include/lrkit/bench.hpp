#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrkit/cpctplus.hpp"
#include "lrkit/language.hpp"

namespace lrkit {

enum class RecovererKind : std::uint8_t { CpctPlus, CpctPlusRev, Panic, None };

std::optional<RecovererKind> parse_recoverer_kind(std::string_view name);
std::string_view recoverer_kind_name(RecovererKind kind);
/// Null for RecovererKind::None. CPCT+ variants use the grammar's `%avoid_insert`
/// tokens unless `params` names some.
std::unique_ptr<Recoverer> make_recoverer(RecovererKind kind, const Grammar& g, const RecoveryParams& params);

struct CorpusFile {
  std::string name;
  std::string text;
};

struct SkippedFile {
  std::string name;
  std::string reason;
};

struct Corpus {
  std::vector<CorpusFile> files;  // sorted by name
  std::vector<SkippedFile> skipped;
};

/// Every regular file directly inside `dir`. Unreadable files are skipped.
/// Throws std::runtime_error if `dir` is not a directory.
Corpus load_corpus(const std::filesystem::path& dir);
/// Writes each file into `dir`, creating it if needed.
void write_corpus(const std::filesystem::path& dir, std::span<const CorpusFile> files);

struct RunRecord {
  std::string file;
  std::size_t repeat = 0;
  RecovererKind recoverer = RecovererKind::CpctPlus;
  RunStats stats;
};

struct CorpusOptions {
  RecovererKind recoverer = RecovererKind::CpctPlus;
  /// `params.timeout` is the per-file recovery budget. A nonzero `params.seed`
  /// makes every run reproducible.
  RecoveryParams params;
  std::size_t repeats = 5;
  std::size_t jobs = 1;  // worker threads; 1 keeps timings free of contention
};

struct CorpusRun {
  std::vector<RunRecord> records;  // ordered by file, then repeat
  std::vector<SkippedFile> skipped;
};

/// Parses every file `repeats` times. Files that do not lex are skipped.
CorpusRun run_corpus(const Language& lang, std::span<const CorpusFile> files, const CorpusOptions& options);

/// Header: file,repeat,recoverer,recovery_time_s,success,error_locations,costs,tokens_skipped_pct
/// `costs` is semicolon-joined; `success` is 1 or 0.
void write_csv(std::ostream& out, std::span<const RunRecord> records);

struct SummaryStats {
  std::size_t files = 0;
  std::size_t runs = 0;
  double mean_time_s = 0;
  double median_time_s = 0;
  std::optional<double> mean_cost;  // over locations in successful runs; unset if there are none
  double failure_rate_pct = 0;
  double tokens_skipped_pct = 0;  // mean over runs
  double error_locations = 0;     // summed over files, each file averaged over its repeats
};

SummaryStats summarize(std::span<const RunRecord> records);

struct Interval {
  double lo = 0;
  double hi = 0;
};

struct BootstrapIntervals {
  Interval mean_time_s;
  Interval median_time_s;
  std::optional<Interval> mean_cost;
  Interval failure_rate_pct;
  Interval tokens_skipped_pct;
  Interval error_locations;
};

/// Percentile intervals at `confidence` (e.g. 0.99). Each iteration draws one
/// repeat per file; for the mean cost only that file's successful repeats are
/// drawn from. Throws std::invalid_argument if `records` is empty.
BootstrapIntervals bootstrap(std::span<const RunRecord> records, std::size_t iterations, double confidence,
                             std::uint64_t seed);

/// True if the mean share of skipped input exceeds `threshold_pct`: few error
/// locations are then likely bought by discarding input.
bool skips_nefariously(const SummaryStats& s, double threshold_pct);

struct SummaryRow {
  std::string label;
  SummaryStats stats;
  std::optional<BootstrapIntervals> intervals;
};

/// A text table with one row per recoverer; flagged rows are marked with '!'.
void print_summary(std::ostream& out, std::span<const SummaryRow> rows, double skip_threshold_pct);

/// Kinds of random edit, combinable as a bit mask.
enum EditKind : unsigned {
  kEditDelete = 1,
  kEditInsert = 2,     // a copy of a token from the same file
  kEditTranspose = 4,  // swap two adjacent tokens
  kEditAll = 7,
};

/// Applies `edits_per_file` random edits of the kinds in `kinds` to each file.
/// An edit that cannot apply (e.g. a transposition on a one-token file) falls
/// back to another allowed kind, or is dropped. Edited files are rewritten as
/// lexemes separated by single spaces; with no edits the text is unchanged.
/// Deterministic for a given seed. Throws LexError if a file does not lex.
std::vector<CorpusFile> mutate_corpus(const Lexer& lexer, std::span<const CorpusFile> valid,
                                      std::uint64_t seed, std::size_t edits_per_file, unsigned kinds = kEditAll);

/// A lexeme for each token id (index 0 is EOF and stays unset): an entry of
/// `overrides` keyed by token name, else the token's name if it lexes to
/// exactly that token.
std::vector<std::optional<std::string>> sample_lexemes(const Grammar& g, const Lexer& lexer,
                                                       const std::map<std::string, std::string>& overrides);

struct GeneratorOptions {
  std::size_t count = 100;
  std::size_t max_depth = 12;  // past this, rules take their shallowest production
  std::size_t min_tokens = 1;
  std::size_t max_tokens = 200;
  std::uint64_t seed = 1;
};

/// Random sentences of the grammar, named sentence_NNNN.txt. Throws
/// std::runtime_error if a needed token has no lexeme or no sentence in the
/// requested length range turns up.
std::vector<CorpusFile> generate_corpus(const Grammar& g, std::span<const std::optional<std::string>> lexemes,
                                        const GeneratorOptions& options);

}  // namespace lrkit
