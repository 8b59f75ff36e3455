#include "lrkit/language.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lrkit {

Language::Language(Grammar g, const LexSpec& spec, bool merge)
    : grammar_(std::move(g)),
      graph_(build_stategraph(grammar_, merge)),
      table_(graph_, grammar_),
      lexer_(spec, grammar_) {}

std::unique_ptr<Language> Language::from_sources(std::string_view grammar_src, std::string_view lex_src,
                                                 bool merge) {
  return std::unique_ptr<Language>(new Language(Grammar::parse(grammar_src), LexSpec::parse(lex_src), merge));
}

std::unique_ptr<Language> Language::from_files(const std::filesystem::path& grammar_file,
                                               const std::filesystem::path& lex_file, bool merge) {
  return from_sources(read_file(grammar_file), read_file(lex_file), merge);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error("cannot read " + path.string());
  return ss.str();
}

}  // namespace lrkit
