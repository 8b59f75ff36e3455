#include "lrkit/lexer.hpp"

#include <algorithm>

namespace lrkit {

LexSpecError::LexSpecError(std::size_t line, const std::string& what)
    : std::runtime_error("lexer spec line " + std::to_string(line) + ": " + what), line_(line) {}

LexError::LexError(std::size_t offset)
    : std::runtime_error("no lexer rule matches input at offset " + std::to_string(offset)), offset_(offset) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

LexSpec LexSpec::parse(std::string_view src) {
  LexSpec spec;
  std::size_t line_no = 0;
  while (!src.empty()) {
    ++line_no;
    std::size_t nl = src.find('\n');
    std::string_view line = trim(src.substr(0, nl));
    src.remove_prefix(nl == std::string_view::npos ? src.size() : nl + 1);
    if (line.empty() || line == "%%" || line.starts_with("//")) continue;

    std::size_t split = line.find_last_of(" \t");
    if (split == std::string_view::npos) throw LexSpecError(line_no, "expected 'pattern TOKEN' or 'pattern ;'");
    std::string_view pattern = trim(line.substr(0, split));
    std::string_view name = line.substr(split + 1);
    if (pattern.empty()) throw LexSpecError(line_no, "empty pattern");

    LexRule rule{std::string(pattern), std::nullopt, line_no};
    if (name != ";") {
      if (name.size() >= 2 && (name.front() == '"' || name.front() == '\'') && name.back() == name.front()) {
        name = name.substr(1, name.size() - 2);
      }
      if (name.empty()) throw LexSpecError(line_no, "empty token name");
      rule.token = std::string(name);
    }
    spec.rules.push_back(std::move(rule));
  }
  return spec;
}

namespace {

std::vector<std::string> patterns_of(const LexSpec& spec) {
  std::vector<std::string> out;
  out.reserve(spec.rules.size());
  for (const LexRule& r : spec.rules) out.push_back(r.pattern);
  return out;
}

}  // namespace

Lexer::Lexer(const LexSpec& spec, const Grammar& grammar) : regex_(patterns_of(spec)) {
  std::vector<bool> produced(grammar.token_count(), false);
  for (const LexRule& r : spec.rules) {
    if (!r.token) {
      rule_tokens_.push_back(std::nullopt);
      continue;
    }
    auto t = grammar.find_token(*r.token);
    if (!t || *t == kEofToken) throw LexSpecError(r.line, "token '" + *r.token + "' is not defined by the grammar");
    produced[index(*t)] = true;
    rule_tokens_.push_back(*t);
  }
  for (std::size_t t = 1; t < produced.size(); ++t) {
    if (!produced[t]) unproduced_.push_back(make_id<TokenId>(t));
  }
}

std::vector<Token> Lexer::lex(std::string_view src) const {
  std::vector<Token> out;
  std::size_t pos = 0;
  while (pos < src.size()) {
    auto m = regex_.longest_match(src, pos);
    if (!m) throw LexError(pos);
    if (auto t = rule_tokens_[m->pattern]) {
      out.push_back(Token{*t, Span{static_cast<std::uint32_t>(pos), static_cast<std::uint32_t>(pos + m->length)},
                          Provenance::Real});
    }
    pos += m->length;
  }
  auto end = static_cast<std::uint32_t>(src.size());
  out.push_back(Token{kEofToken, Span{end, end}, Provenance::Real});
  return out;
}

LineIndex::LineIndex(std::string_view src) : src_(src) {
  line_starts_.push_back(0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == '\n') line_starts_.push_back(i + 1);
  }
}

LineIndex::Position LineIndex::position(std::size_t offset) const {
  offset = std::min(offset, src_.size());
  auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
  std::size_t line = static_cast<std::size_t>(it - line_starts_.begin());
  std::size_t start = line_starts_[line - 1];
  std::size_t col = 1;
  for (std::size_t i = start; i < offset; ++i) {
    if ((static_cast<unsigned char>(src_[i]) & 0xC0) != 0x80) ++col;
  }
  return {line, col};
}

}  // namespace lrkit
