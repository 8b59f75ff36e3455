#include "lrkit/regex.hpp"

#include <algorithm>

namespace lrkit {

RegexError::RegexError(std::string pattern, std::size_t pos, const std::string& what)
    : std::runtime_error("invalid regex '" + pattern + "' at offset " + std::to_string(pos) + ": " + what),
      pos_(pos) {}

// Recursive-descent compiler producing Thompson fragments. Each fragment has a
// start state and a list of dangling exits patched when the fragment is joined.
class RegexCompiler {
 public:
  using State = MultiRegex::State;
  using CharSet = MultiRegex::CharSet;

  RegexCompiler(MultiRegex& re, std::string_view pattern) : re_(re), pat_(pattern) {}

  struct Exit {
    std::uint32_t state;
    bool second;  // patch out2 rather than out
  };

  struct Frag {
    std::uint32_t start;
    std::vector<Exit> exits;
  };

  Frag compile() {
    Frag f = alternation();
    if (pos_ < pat_.size()) fail("unexpected ')'");
    return f;
  }

  std::uint32_t add(State s) {
    re_.states_.push_back(std::move(s));
    return static_cast<std::uint32_t>(re_.states_.size() - 1);
  }

  void patch(const std::vector<Exit>& exits, std::uint32_t target) {
    for (const Exit& e : exits) {
      (e.second ? re_.states_[e.state].out2 : re_.states_[e.state].out) = target;
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw RegexError(std::string(pat_), pos_, what); }

  bool more() const { return pos_ < pat_.size(); }
  char peek() const { return pat_[pos_]; }

  Frag empty_frag() {
    State s;
    s.kind = State::Kind::Split;
    std::uint32_t id = add(s);
    // A split whose second branch is never patched behaves as a plain epsilon.
    return {id, {{id, false}}};
  }

  Frag alternation() {
    Frag left = concatenation();
    while (more() && peek() == '|') {
      ++pos_;
      Frag right = concatenation();
      State s;
      s.kind = State::Kind::Split;
      s.out = left.start;
      s.out2 = right.start;
      std::uint32_t id = add(s);
      left.start = id;
      left.exits.insert(left.exits.end(), right.exits.begin(), right.exits.end());
    }
    return left;
  }

  Frag concatenation() {
    std::optional<Frag> acc;
    while (more() && peek() != '|' && peek() != ')') {
      Frag f = repetition();
      if (!acc) {
        acc = std::move(f);
      } else {
        patch(acc->exits, f.start);
        acc->exits = std::move(f.exits);
      }
    }
    return acc ? std::move(*acc) : empty_frag();
  }

  Frag star(Frag f) {
    State s;
    s.out = f.start;
    std::uint32_t id = add(s);
    patch(f.exits, id);
    return {id, {{id, true}}};
  }

  Frag plus(Frag f) {
    State s;
    s.out = f.start;
    std::uint32_t id = add(s);
    patch(f.exits, id);
    return {f.start, {{id, true}}};
  }

  Frag optional(Frag f) {
    State s;
    s.out = f.start;
    std::uint32_t id = add(s);
    f.exits.push_back({id, true});
    return {id, std::move(f.exits)};
  }

  std::size_t number() {
    std::size_t n = 0;
    bool any = false;
    while (more() && peek() >= '0' && peek() <= '9') {
      n = n * 10 + static_cast<std::size_t>(peek() - '0');
      ++pos_;
      any = true;
    }
    if (!any) fail("expected a number in {}");
    return n;
  }

  Frag repetition() {
    std::uint32_t first_state = static_cast<std::uint32_t>(re_.states_.size());
    Frag f = atom();
    while (more()) {
      char c = peek();
      if (c == '*') {
        ++pos_;
        f = star(std::move(f));
      } else if (c == '+') {
        ++pos_;
        f = plus(std::move(f));
      } else if (c == '?') {
        ++pos_;
        f = optional(std::move(f));
      } else if (c == '{') {
        ++pos_;
        std::size_t lo = number();
        std::optional<std::size_t> hi = lo;
        if (more() && peek() == ',') {
          ++pos_;
          hi.reset();
          if (more() && peek() != '}') hi = number();
        }
        if (!more() || peek() != '}') fail("expected '}'");
        ++pos_;
        if (hi && *hi < lo) fail("bad repetition bounds");
        if (hi && *hi == 0) {
          f = empty_frag();
        } else {
          f = bounded(f, first_state, lo, hi);
        }
      } else {
        break;
      }
    }
    return f;
  }

  Frag bounded(const Frag& f, std::uint32_t first_state, std::size_t lo, std::optional<std::size_t> hi) {
    std::uint32_t end_state = static_cast<std::uint32_t>(re_.states_.size());
    auto copy = [&]() {
      // Clone only the original atom's states.
      std::vector<State> original(re_.states_.begin() + first_state, re_.states_.begin() + end_state);
      std::uint32_t base = static_cast<std::uint32_t>(re_.states_.size());
      std::uint32_t offset = base - first_state;
      for (State s : original) {
        if (s.out != MultiRegex::kNone && s.out >= first_state && s.out < end_state) s.out += offset;
        if (s.out2 != MultiRegex::kNone && s.out2 >= first_state && s.out2 < end_state) s.out2 += offset;
        re_.states_.push_back(s);
      }
      Frag c{f.start + offset, {}};
      for (const Exit& e : f.exits) c.exits.push_back({e.state + offset, e.second});
      return c;
    };
    std::optional<Frag> acc;
    auto append = [&](Frag piece) {
      if (!acc) {
        acc = std::move(piece);
      } else {
        patch(acc->exits, piece.start);
        acc->exits = std::move(piece.exits);
      }
    };
    std::size_t required = std::max<std::size_t>(lo, 1);
    for (std::size_t i = 0; i < required; ++i) append(i == 0 ? f : copy());
    if (lo == 0) acc = optional(std::move(*acc));
    if (!hi) {
      append(star(copy()));
    } else {
      for (std::size_t i = required; i < *hi; ++i) append(optional(copy()));
    }
    return std::move(*acc);
  }

  Frag chars(const CharSet& set) {
    State s;
    s.kind = State::Kind::Chars;
    s.chars = set;
    std::uint32_t id = add(s);
    return {id, {{id, false}}};
  }

  static CharSet single(unsigned char c) {
    CharSet s;
    s.set(c);
    return s;
  }

  static CharSet range(unsigned char lo, unsigned char hi) {
    CharSet s;
    for (unsigned c = lo; c <= hi; ++c) s.set(c);
    return s;
  }

  static CharSet word() { return range('a', 'z') | range('A', 'Z') | range('0', '9') | single('_'); }
  static CharSet space() {
    return single(' ') | single('\t') | single('\n') | single('\r') | single('\f') | single('\v');
  }

  // Parses the character after a backslash; returns the class it denotes.
  CharSet escape() {
    if (!more()) fail("trailing backslash");
    char c = pat_[pos_++];
    switch (c) {
      case 'n': return single('\n');
      case 't': return single('\t');
      case 'r': return single('\r');
      case 'f': return single('\f');
      case 'v': return single('\v');
      case '0': return single('\0');
      case 'd': return range('0', '9');
      case 'D': return ~range('0', '9');
      case 'w': return word();
      case 'W': return ~word();
      case 's': return space();
      case 'S': return ~space();
      default: return single(static_cast<unsigned char>(c));
    }
  }

  Frag bracket() {
    // pos_ is just past '['
    bool negate = false;
    if (more() && peek() == '^') {
      negate = true;
      ++pos_;
    }
    CharSet set;
    bool first = true;
    while (more() && (peek() != ']' || first)) {
      first = false;
      CharSet item;
      std::optional<unsigned char> lo;
      if (peek() == '\\') {
        ++pos_;
        std::size_t before = pos_;
        item = escape();
        if (item.count() == 1 && pos_ == before + 1) {
          for (unsigned c = 0; c < 256; ++c) {
            if (item.test(c)) lo = static_cast<unsigned char>(c);
          }
        }
      } else {
        lo = static_cast<unsigned char>(pat_[pos_++]);
        item = single(*lo);
      }
      if (lo && pos_ + 1 < pat_.size() && peek() == '-' && pat_[pos_ + 1] != ']') {
        ++pos_;
        unsigned char hi;
        if (peek() == '\\') {
          ++pos_;
          CharSet h = escape();
          if (h.count() != 1) fail("class escape cannot end a range");
          hi = 0;
          for (unsigned c = 0; c < 256; ++c) {
            if (h.test(c)) hi = static_cast<unsigned char>(c);
          }
        } else {
          hi = static_cast<unsigned char>(pat_[pos_++]);
        }
        if (hi < *lo) fail("reversed range in class");
        item = range(*lo, hi);
      }
      set |= item;
    }
    if (!more()) fail("unterminated '['");
    ++pos_;
    return chars(negate ? ~set : set);
  }

  Frag atom() {
    char c = peek();
    switch (c) {
      case '(': {
        ++pos_;
        Frag f = more() && peek() == ')' ? empty_frag() : alternation();
        if (!more() || peek() != ')') fail("expected ')'");
        ++pos_;
        return f;
      }
      case '[':
        ++pos_;
        return bracket();
      case '.':
        ++pos_;
        return chars(~single('\n'));
      case '\\':
        ++pos_;
        return chars(escape());
      case '*':
      case '+':
      case '?':
      case '{':
        fail(std::string("nothing to repeat before '") + c + "'");
      default:
        ++pos_;
        return chars(single(static_cast<unsigned char>(c)));
    }
  }

  MultiRegex& re_;
  std::string_view pat_;
  std::size_t pos_ = 0;
};

MultiRegex::MultiRegex(const std::vector<std::string>& patterns) : pattern_count_(patterns.size()) {
  std::vector<std::uint32_t> starts;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    if (patterns[i].empty()) throw RegexError(patterns[i], 0, "empty pattern");
    RegexCompiler c(*this, patterns[i]);
    RegexCompiler::Frag f = c.compile();
    State accept;
    accept.kind = State::Kind::Accept;
    accept.pattern = static_cast<std::uint32_t>(i);
    c.patch(f.exits, c.add(accept));
    starts.push_back(f.start);
  }
  if (starts.empty()) return;
  // Chain the pattern starts with splits, earliest pattern first.
  start_ = starts.back();
  for (std::size_t i = starts.size() - 1; i-- > 0;) {
    State s;
    s.out = starts[i];
    s.out2 = start_;
    states_.push_back(s);
    start_ = static_cast<std::uint32_t>(states_.size() - 1);
  }
}

std::optional<MultiRegex::Match> MultiRegex::longest_match(std::string_view text, std::size_t pos) const {
  if (start_ == kNone) return std::nullopt;
  std::vector<std::uint32_t> current, next, stack;
  std::vector<std::size_t> mark(states_.size(), SIZE_MAX);
  std::optional<Match> best;
  std::size_t generation = 0;

  auto add_closure = [&](std::vector<std::uint32_t>& set, std::uint32_t s, std::size_t consumed) {
    stack.push_back(s);
    while (!stack.empty()) {
      std::uint32_t id = stack.back();
      stack.pop_back();
      if (id == kNone || mark[id] == generation) continue;
      mark[id] = generation;
      const State& st = states_[id];
      switch (st.kind) {
        case State::Kind::Chars:
          set.push_back(id);
          break;
        case State::Kind::Split:
          stack.push_back(st.out2);
          stack.push_back(st.out);
          break;
        case State::Kind::Accept:
          if (consumed == 0) break;
          if (!best || best->length < consumed) {
            best = Match{consumed, st.pattern};
          } else {
            best->pattern = std::min<std::size_t>(best->pattern, st.pattern);
          }
          break;
      }
    }
  };

  add_closure(current, start_, 0);
  for (std::size_t i = pos; i < text.size() && !current.empty(); ++i) {
    ++generation;
    next.clear();
    unsigned char c = static_cast<unsigned char>(text[i]);
    for (std::uint32_t id : current) {
      if (states_[id].chars.test(c)) add_closure(next, states_[id].out, i - pos + 1);
    }
    std::swap(current, next);
  }
  return best;
}

}  // namespace lrkit
