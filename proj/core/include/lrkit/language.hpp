#pragma once

#include <filesystem>
#include <memory>
#include <string_view>

#include "lrkit/grammar.hpp"
#include "lrkit/lexer.hpp"
#include "lrkit/lrtable.hpp"

namespace lrkit {

/// A grammar with its state graph, table and lexer. The graph refers back to
/// the grammar, so a Language is neither copyable nor movable.
class Language {
 public:
  /// Throws GrammarError, LexSpecError or RegexError on invalid input.
  static std::unique_ptr<Language> from_sources(std::string_view grammar_src, std::string_view lex_src,
                                                bool merge = true);
  /// As from_sources; also throws std::runtime_error if a file cannot be read.
  static std::unique_ptr<Language> from_files(const std::filesystem::path& grammar_file,
                                              const std::filesystem::path& lex_file, bool merge = true);

  Language(const Language&) = delete;
  Language& operator=(const Language&) = delete;

  const Grammar& grammar() const noexcept { return grammar_; }
  const StateGraph& graph() const noexcept { return graph_; }
  const StateTable& table() const noexcept { return table_; }
  const Lexer& lexer() const noexcept { return lexer_; }

 private:
  Language(Grammar g, const LexSpec& spec, bool merge);

  Grammar grammar_;
  StateGraph graph_;
  StateTable table_;
  Lexer lexer_;
};

/// The whole contents of a file. Throws std::runtime_error if it cannot be read.
std::string read_file(const std::filesystem::path& path);

}  // namespace lrkit
