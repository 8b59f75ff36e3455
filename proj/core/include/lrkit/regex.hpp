#pragma once

#include <bitset>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lrkit {

class RegexError : public std::runtime_error {
 public:
  RegexError(std::string pattern, std::size_t pos, const std::string& what);

  std::size_t position() const noexcept { return pos_; }

 private:
  std::size_t pos_;
};

/// A set of regular expressions compiled into one Thompson NFA.
///
/// Supported syntax: literals, `.`, escapes (`\n \t \r \d \D \w \W \s \S` and
/// escaped metacharacters), bracket classes with ranges and negation, grouping,
/// `|`, and the quantifiers `* + ?` and `{m}`, `{m,}`, `{m,n}`. Matching is on bytes.
class MultiRegex {
 public:
  struct Match {
    std::size_t length = 0;
    std::size_t pattern = 0;  // index of the pattern that produced the match
  };

  /// Compiles `patterns` in order; throws RegexError on malformed syntax.
  explicit MultiRegex(const std::vector<std::string>& patterns);

  /// Longest non-empty match anchored at `pos`. Ties in length go to the lowest pattern index.
  std::optional<Match> longest_match(std::string_view text, std::size_t pos) const;

  std::size_t pattern_count() const noexcept { return pattern_count_; }

 private:
  using CharSet = std::bitset<256>;

  struct State {
    enum class Kind : std::uint8_t { Chars, Split, Accept };
    Kind kind = Kind::Split;
    CharSet chars;
    std::uint32_t out = kNone;
    std::uint32_t out2 = kNone;
    std::uint32_t pattern = 0;
  };

  static constexpr std::uint32_t kNone = UINT32_MAX;

  friend class RegexCompiler;

  std::vector<State> states_;
  std::uint32_t start_ = kNone;
  std::size_t pattern_count_ = 0;
};

}  // namespace lrkit
