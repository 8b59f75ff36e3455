#include "lrkit/repair.hpp"

#include <algorithm>

namespace lrkit {

void prune_trailing_shifts(RepairSequence& seq) {
  while (!seq.empty() && seq.back().is_shift()) seq.pop_back();
}

std::size_t repair_count(std::span<const Repair> seq) {
  return static_cast<std::size_t>(std::count_if(seq.begin(), seq.end(), [](const Repair& r) { return !r.is_shift(); }));
}

std::string render_sequence(std::span<const Repair> seq, const Grammar& g, std::span<const Token> tokens,
                            std::size_t offset, std::string_view src) {
  std::string out;
  for (const Repair& r : seq) {
    if (!out.empty()) out += ", ";
    if (r.is_insert()) {
      out += "Insert ";
      out += g.token_name(r.token);
      continue;
    }
    out += r.is_delete() ? "Delete " : "Shift ";
    if (offset < tokens.size()) {
      const Token& t = tokens[offset];
      std::string_view lexeme = t.lexeme(src);
      out += lexeme.empty() ? std::string(g.token_name(t.type)) : std::string(lexeme);
    }
    ++offset;
  }
  return out;
}

}  // namespace lrkit
