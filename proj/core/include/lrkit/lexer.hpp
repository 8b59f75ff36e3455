#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lrkit/grammar.hpp"
#include "lrkit/ids.hpp"
#include "lrkit/regex.hpp"

namespace lrkit {

/// Byte offsets [start, end) into the source text.
struct Span {
  std::uint32_t start = 0;
  std::uint32_t end = 0;

  std::uint32_t length() const noexcept { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// Whether a token came from the user's input or was fabricated by an insert repair.
enum class Provenance : std::uint8_t { Real, Inserted };

/// Inserted tokens have a type but no value: their span is zero-width.
struct Token {
  TokenId type{};
  Span span;
  Provenance provenance = Provenance::Real;

  bool inserted() const noexcept { return provenance == Provenance::Inserted; }
  std::string_view lexeme(std::string_view src) const {
    return inserted() ? std::string_view{} : src.substr(span.start, span.length());
  }
  friend bool operator==(const Token&, const Token&) = default;
};

struct LexRule {
  std::string pattern;
  std::optional<std::string> token;  // nullopt: matched text is skipped
  std::size_t line = 0;
};

class LexSpecError : public std::runtime_error {
 public:
  LexSpecError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A Lex-like specification: one `pattern TOKEN` rule per line, `pattern ;` to skip.
///
/// A leading `%%` line is accepted and ignored. Blank lines and lines starting
/// with `//` are ignored. TOKEN may be quoted with `'` or `"`.
struct LexSpec {
  std::vector<LexRule> rules;

  static LexSpec parse(std::string_view src);
};

class LexError : public std::runtime_error {
 public:
  explicit LexError(std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A LexSpec bound to a Grammar's token types.
class Lexer {
 public:
  /// Throws LexSpecError if a rule names a token the grammar does not define,
  /// or RegexError if a pattern is malformed.
  Lexer(const LexSpec& spec, const Grammar& grammar);

  /// Tokenizes `src` by longest match (earliest rule breaks ties) and appends EOF.
  /// Throws LexError at the first offset no rule matches.
  std::vector<Token> lex(std::string_view src) const;

  /// Grammar tokens no rule can produce (other than EOF); useful as a warning.
  const std::vector<TokenId>& unproduced_tokens() const noexcept { return unproduced_; }

 private:
  MultiRegex regex_;
  std::vector<std::optional<TokenId>> rule_tokens_;
  std::vector<TokenId> unproduced_;
};

/// Maps byte offsets to 1-based line and column numbers. Columns count UTF-8 code points.
class LineIndex {
 public:
  explicit LineIndex(std::string_view src);

  struct Position {
    std::size_t line = 1;
    std::size_t col = 1;
  };

  Position position(std::size_t offset) const;

 private:
  std::string_view src_;
  std::vector<std::size_t> line_starts_;
};

}  // namespace lrkit
