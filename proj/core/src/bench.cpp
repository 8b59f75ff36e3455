#include "lrkit/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "lrkit/panic.hpp"

namespace lrkit {

namespace {

constexpr std::pair<RecovererKind, std::string_view> kKindNames[] = {
    {RecovererKind::CpctPlus, "cpctplus"},
    {RecovererKind::CpctPlusRev, "cpctplus-rev"},
    {RecovererKind::Panic, "panic"},
    {RecovererKind::None, "none"},
};

}  // namespace

std::optional<RecovererKind> parse_recoverer_kind(std::string_view name) {
  for (auto [kind, n] : kKindNames) {
    if (n == name) return kind;
  }
  return std::nullopt;
}

std::string_view recoverer_kind_name(RecovererKind kind) {
  for (auto [k, n] : kKindNames) {
    if (k == kind) return n;
  }
  return "?";
}

std::unique_ptr<Recoverer> make_recoverer(RecovererKind kind, const Grammar& g, const RecoveryParams& params) {
  switch (kind) {
    case RecovererKind::CpctPlus:
      return std::make_unique<CpctPlus>(g, params);
    case RecovererKind::CpctPlusRev:
      return std::make_unique<CpctPlusRev>(g, params);
    case RecovererKind::Panic:
      return std::make_unique<PanicMode>();
    case RecovererKind::None:
      break;
  }
  return nullptr;
}

Corpus load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  Corpus c;
  for (const auto& p : paths) {
    try {
      c.files.push_back(CorpusFile{p.filename().string(), read_file(p)});
    } catch (const std::runtime_error& e) {
      c.skipped.push_back(SkippedFile{p.filename().string(), e.what()});
    }
  }
  return c;
}

void write_corpus(const std::filesystem::path& dir, std::span<const CorpusFile> files) {
  std::filesystem::create_directories(dir);
  for (const CorpusFile& f : files) {
    std::ofstream out(dir / f.name, std::ios::binary);
    out << f.text;
    if (!out) throw std::runtime_error("cannot write " + (dir / f.name).string());
  }
}

CorpusRun run_corpus(const Language& lang, std::span<const CorpusFile> files, const CorpusOptions& options) {
  options.params.validate();
  CorpusRun run;
  struct Lexed {
    const CorpusFile* file;
    std::vector<Token> tokens;
  };
  std::vector<Lexed> lexed;
  for (const CorpusFile& f : files) {
    try {
      lexed.push_back(Lexed{&f, lang.lexer().lex(f.text)});
    } catch (const LexError& e) {
      run.skipped.push_back(SkippedFile{f.name, e.what()});
    }
  }

  const std::size_t tasks = lexed.size() * options.repeats;
  run.records.resize(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const Lexed& lx = lexed[t / options.repeats];
      RecoveryParams params = options.params;
      if (params.seed != 0) params.seed = params.seed + t * 0x9e3779b97f4a7c15ULL;
      if (options.params.seed != 0 && params.seed == 0) params.seed = 1;
      auto rec = make_recoverer(options.recoverer, lang.grammar(), params);
      ParseResult r = parse(lang.table(), lang.grammar(), lx.tokens, rec.get(),
                            ParseOptions{.timeout = params.timeout, .source = lx.file->text});
      run.records[t] = RunRecord{lx.file->name, t % options.repeats, options.recoverer, std::move(r.stats)};
    }
  };
  std::size_t n = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(tasks, 1));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  return run;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& out, std::span<const RunRecord> records) {
  out << "file,repeat,recoverer,recovery_time_s,success,error_locations,costs,tokens_skipped_pct\n";
  for (const RunRecord& r : records) {
    std::string costs;
    for (std::size_t c : r.stats.costs) {
      if (!costs.empty()) costs += ';';
      costs += std::to_string(c);
    }
    std::ostringstream row;
    row << csv_field(r.file) << ',' << r.repeat << ',' << recoverer_kind_name(r.recoverer) << ',' << std::fixed
        << std::setprecision(6) << r.stats.recovery_time_s << ',' << (r.stats.success ? 1 : 0) << ','
        << r.stats.error_locations << ',' << costs << ',' << std::setprecision(4) << r.stats.tokens_skipped_pct;
    out << row.str() << '\n';
  }
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lo + hi) / 2;
}

// Runs of each file, in first-seen order.
std::vector<std::vector<const RunRecord*>> group_by_file(std::span<const RunRecord> records) {
  std::vector<std::vector<const RunRecord*>> groups;
  std::unordered_map<std::string, std::size_t> at;
  for (const RunRecord& r : records) {
    auto [it, fresh] = at.try_emplace(r.file, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(&r);
  }
  return groups;
}

// Statistics over one run per file, or over every run.
struct Sample {
  std::vector<double> times;
  double failures = 0;
  double skipped_pct = 0;
  double locations = 0;
  double cost_sum = 0;
  std::size_t cost_count = 0;

  void add(const RunStats& s, double weight) {
    times.push_back(s.recovery_time_s);
    failures += s.success ? 0 : 1;
    skipped_pct += s.tokens_skipped_pct;
    locations += weight * static_cast<double>(s.error_locations);
  }
  void add_costs(const RunStats& s) {
    for (std::size_t c : s.costs) cost_sum += static_cast<double>(c);
    cost_count += s.costs.size();
  }
  double n() const { return static_cast<double>(times.size()); }
  double mean_time() const { return std::accumulate(times.begin(), times.end(), 0.0) / n(); }
  std::optional<double> mean_cost() const {
    if (cost_count == 0) return std::nullopt;
    return cost_sum / static_cast<double>(cost_count);
  }
};

}  // namespace

SummaryStats summarize(std::span<const RunRecord> records) {
  SummaryStats s;
  if (records.empty()) return s;
  auto groups = group_by_file(records);
  Sample all;
  for (const auto& g : groups) {
    for (const RunRecord* r : g) {
      all.add(r->stats, 1.0 / static_cast<double>(g.size()));
      if (r->stats.success) all.add_costs(r->stats);
    }
  }
  s.files = groups.size();
  s.runs = records.size();
  s.mean_time_s = all.mean_time();
  s.median_time_s = median_of(all.times);
  s.mean_cost = all.mean_cost();
  s.failure_rate_pct = 100.0 * all.failures / all.n();
  s.tokens_skipped_pct = all.skipped_pct / all.n();
  s.error_locations = all.locations;
  return s;
}

namespace {

Interval percentile_interval(std::vector<double> v, double confidence) {
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    double pos = q * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    // Written so that equal neighbours give exactly that value.
    return v[lo] == v[hi] ? v[lo] : v[lo] + frac * (v[hi] - v[lo]);
  };
  double tail = (1.0 - confidence) / 2.0;
  return Interval{at(tail), at(1.0 - tail)};
}

}  // namespace

BootstrapIntervals bootstrap(std::span<const RunRecord> records, std::size_t iterations, double confidence,
                             std::uint64_t seed) {
  if (records.empty()) throw std::invalid_argument("bootstrap needs at least one record");
  if (iterations == 0) throw std::invalid_argument("bootstrap needs at least one iteration");
  if (!(confidence > 0 && confidence < 1)) throw std::invalid_argument("confidence must be in (0, 1)");

  auto groups = group_by_file(records);
  std::vector<std::vector<const RunRecord*>> succeeded(groups.size());
  for (std::size_t f = 0; f < groups.size(); ++f) {
    for (const RunRecord* r : groups[f]) {
      if (r->stats.success) succeeded[f].push_back(r);
    }
  }

  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<const RunRecord*>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  std::vector<double> mean_time, median_time, mean_cost, failure, skipped, locations;
  for (std::size_t it = 0; it < iterations; ++it) {
    Sample s;
    for (std::size_t f = 0; f < groups.size(); ++f) {
      s.add(pick(groups[f])->stats, 1.0);
      if (!succeeded[f].empty()) s.add_costs(pick(succeeded[f])->stats);
    }
    mean_time.push_back(s.mean_time());
    median_time.push_back(median_of(s.times));
    if (auto c = s.mean_cost()) mean_cost.push_back(*c);
    failure.push_back(100.0 * s.failures / s.n());
    skipped.push_back(s.skipped_pct / s.n());
    locations.push_back(s.locations);
  }

  BootstrapIntervals out;
  out.mean_time_s = percentile_interval(std::move(mean_time), confidence);
  out.median_time_s = percentile_interval(std::move(median_time), confidence);
  if (!mean_cost.empty()) out.mean_cost = percentile_interval(std::move(mean_cost), confidence);
  out.failure_rate_pct = percentile_interval(std::move(failure), confidence);
  out.tokens_skipped_pct = percentile_interval(std::move(skipped), confidence);
  out.error_locations = percentile_interval(std::move(locations), confidence);
  return out;
}

bool skips_nefariously(const SummaryStats& s, double threshold_pct) { return s.tokens_skipped_pct > threshold_pct; }

namespace {

std::string fmt(double v, int precision) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v;
  return ss.str();
}

std::string cell(double v, const std::optional<Interval>& ci, int precision) {
  std::string s = fmt(v, precision);
  if (ci) s += " [" + fmt(ci->lo, precision) + ", " + fmt(ci->hi, precision) + "]";
  return s;
}

}  // namespace

void print_summary(std::ostream& out, std::span<const SummaryRow> rows, double skip_threshold_pct) {
  const std::vector<std::string> header{"Recoverer",        "Mean time (s)",      "Median time (s)", "Cost size",
                                        "Failure rate (%)", "Tokens skipped (%)", "Error locations"};
  std::vector<std::vector<std::string>> table{header};
  bool flagged = false;
  for (const SummaryRow& r : rows) {
    const SummaryStats& s = r.stats;
    const auto& ci = r.intervals;
    bool nefarious = skips_nefariously(s, skip_threshold_pct);
    flagged = flagged || nefarious;
    table.push_back({
        r.label + (nefarious ? " !" : ""),
        cell(s.mean_time_s, ci ? std::optional(ci->mean_time_s) : std::nullopt, 6),
        cell(s.median_time_s, ci ? std::optional(ci->median_time_s) : std::nullopt, 6),
        s.mean_cost ? cell(*s.mean_cost, ci ? ci->mean_cost : std::nullopt, 2) : std::string("-"),
        cell(s.failure_rate_pct, ci ? std::optional(ci->failure_rate_pct) : std::nullopt, 2),
        cell(s.tokens_skipped_pct, ci ? std::optional(ci->tokens_skipped_pct) : std::nullopt, 2),
        cell(s.error_locations, ci ? std::optional(ci->error_locations) : std::nullopt, 1),
    });
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c == 0 ? "" : "  ") << (c == 0 ? std::left : std::right) << std::setw(static_cast<int>(width[c]))
          << row[c];
    }
    out << std::left << '\n';
  }
  if (flagged) out << "! mean tokens skipped exceeds " << fmt(skip_threshold_pct, 2) << "%\n";
}

std::vector<CorpusFile> mutate_corpus(const Lexer& lexer, std::span<const CorpusFile> valid, std::uint64_t seed,
                                      std::size_t edits_per_file, unsigned kinds) {
  std::vector<EditKind> allowed;
  for (EditKind k : {kEditDelete, kEditInsert, kEditTranspose}) {
    if (kinds & k) allowed.push_back(k);
  }
  if (allowed.empty()) throw std::invalid_argument("no edit kinds allowed");
  std::vector<CorpusFile> out;
  for (std::size_t f = 0; f < valid.size(); ++f) {
    const CorpusFile& file = valid[f];
    std::vector<Token> toks = lexer.lex(file.text);
    if (edits_per_file == 0) {
      out.push_back(file);
      continue;
    }
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(f)};
    std::mt19937_64 rng(ss);
    auto below = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

    std::vector<std::string_view> words;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) words.push_back(toks[i].lexeme(file.text));
    auto applicable = [&](EditKind k) {
      return k == kEditTranspose ? words.size() >= 2 : !words.empty();
    };
    for (std::size_t e = 0; e < edits_per_file; ++e) {
      EditKind kind = allowed[below(allowed.size())];
      if (!applicable(kind)) {
        auto alt = std::find_if(allowed.begin(), allowed.end(), applicable);
        if (alt == allowed.end()) break;
        kind = *alt;
      }
      switch (kind) {
        case kEditDelete:
          words.erase(words.begin() + static_cast<std::ptrdiff_t>(below(words.size())));
          break;
        case kEditInsert: {
          std::string_view w = words[below(words.size())];
          words.insert(words.begin() + static_cast<std::ptrdiff_t>(below(words.size() + 1)), w);
          break;
        }
        default: {
          std::size_t i = below(words.size() - 1);
          std::swap(words[i], words[i + 1]);
          break;
        }
      }
    }
    std::string text;
    for (std::string_view w : words) {
      if (!text.empty()) text += ' ';
      text += w;
    }
    text += '\n';
    out.push_back(CorpusFile{file.name, std::move(text)});
  }
  return out;
}

std::vector<std::optional<std::string>> sample_lexemes(const Grammar& g, const Lexer& lexer,
                                                       const std::map<std::string, std::string>& overrides) {
  std::vector<std::optional<std::string>> out(g.token_count());
  for (std::size_t t = 1; t < g.token_count(); ++t) {
    TokenId tok = make_id<TokenId>(t);
    std::string name(g.token_name(tok));
    if (auto it = overrides.find(name); it != overrides.end()) {
      out[t] = it->second;
      continue;
    }
    try {
      auto toks = lexer.lex(name);
      if (toks.size() == 2 && toks[0].type == tok && toks[0].span.length() == name.size()) out[t] = name;
    } catch (const LexError&) {
    }
  }
  return out;
}

namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

// Height of the shallowest derivation tree of each rule.
std::vector<std::size_t> rule_heights(const Grammar& g) {
  std::vector<std::size_t> h(g.rule_count(), kUnbounded);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t p = 0; p < g.production_count(); ++p) {
      const Production& prod = g.production(make_id<ProdId>(p));
      std::size_t deepest = 0;
      for (Symbol s : prod.symbols) {
        if (s.is_rule()) deepest = std::max(deepest, h[index(s.as_rule())]);
      }
      if (deepest == kUnbounded) continue;
      std::size_t& cur = h[index(prod.rule)];
      if (deepest + 1 < cur) {
        cur = deepest + 1;
        changed = true;
      }
    }
  }
  return h;
}

}  // namespace

std::vector<CorpusFile> generate_corpus(const Grammar& g, std::span<const std::optional<std::string>> lexemes,
                                        const GeneratorOptions& options) {
  const auto heights = rule_heights(g);
  auto prod_height = [&](ProdId p) {
    std::size_t deepest = 0;
    for (Symbol s : g.production(p).symbols) {
      if (s.is_rule()) deepest = std::max(deepest, heights[index(s.as_rule())]);
    }
    return deepest == kUnbounded ? kUnbounded : deepest + 1;
  };
  if (heights[index(g.start_rule())] == kUnbounded) throw std::runtime_error("start rule derives no sentence");

  std::mt19937_64 rng(options.seed);
  auto attempt = [&](std::vector<TokenId>& out) {
    std::vector<std::pair<Symbol, std::size_t>> todo{{Symbol::rule(g.start_rule()), 0}};
    while (!todo.empty()) {
      auto [sym, depth] = todo.back();
      todo.pop_back();
      if (sym.is_token()) {
        out.push_back(sym.as_token());
        if (out.size() > options.max_tokens) return false;
        continue;
      }
      std::vector<ProdId> choices;
      auto prods = g.rule_productions(sym.as_rule());
      if (depth >= options.max_depth) {
        for (ProdId p : prods) {
          if (prod_height(p) == heights[index(sym.as_rule())]) choices.push_back(p);
        }
      } else {
        for (ProdId p : prods) {
          if (prod_height(p) != kUnbounded) choices.push_back(p);
        }
      }
      ProdId p = choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)];
      const auto& syms = g.production(p).symbols;
      for (auto it = syms.rbegin(); it != syms.rend(); ++it) todo.emplace_back(*it, depth + 1);
    }
    return out.size() >= options.min_tokens;
  };

  std::vector<CorpusFile> files;
  for (std::size_t n = 0; n < options.count; ++n) {
    std::vector<TokenId> sentence;
    bool ok = false;
    for (std::size_t tries = 0; tries < 10000 && !ok; ++tries) {
      sentence.clear();
      ok = attempt(sentence);
    }
    if (!ok) throw std::runtime_error("no sentence with the requested number of tokens found");
    std::string text;
    for (TokenId t : sentence) {
      const auto& lx = index(t) < lexemes.size() ? lexemes[index(t)] : std::nullopt;
      if (!lx) throw std::runtime_error("no lexeme for token '" + std::string(g.token_name(t)) + "'");
      if (!text.empty()) text += ' ';
      text += *lx;
    }
    text += '\n';
    std::ostringstream name;
    name << "sentence_" << std::setw(4) << std::setfill('0') << n << ".txt";
    files.push_back(CorpusFile{name.str(), std::move(text)});
  }
  return files;
}

}  // namespace lrkit
