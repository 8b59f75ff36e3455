#include "lrkit/grammar.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace lrkit {

namespace {

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::ostringstream out;
  for (std::size_t i = 0; i < diags.size(); ++i) {
    if (i) out << '\n';
    out << "line " << diags[i].line << " col " << diags[i].col << ": " << diags[i].message;
  }
  return out.str();
}

struct Lexeme {
  enum class Kind { Ident, Quoted, Directive, Separator, Colon, Bar, Semi, Action, Tag, Number, End, Bad };

  Kind kind = Kind::End;
  std::string text;
  std::size_t line = 0;
  std::size_t col = 0;
};

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9') || c == '.'; }

class Scanner {
 public:
  Scanner(std::string_view src, std::vector<Diagnostic>& diags) : src_(src), diags_(diags) {}

  Lexeme next() {
    if (!pending_.empty()) {
      Lexeme l = std::move(pending_.front());
      pending_.pop_front();
      return l;
    }
    return scan();
  }

  const Lexeme& peek() {
    if (pending_.empty()) pending_.push_back(scan());
    return pending_.front();
  }

 private:
  char at(std::size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }
  bool eof() const { return pos_ >= src_.size(); }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void error(std::size_t line, std::size_t col, std::string msg) {
    diags_.push_back({line, col, std::move(msg)});
  }

  void skip_trivia() {
    for (;;) {
      while (!eof() && (at() == ' ' || at() == '\t' || at() == '\r' || at() == '\n')) advance();
      if (at() == '/' && at(1) == '*') {
        std::size_t l = line_, c = col_;
        advance();
        advance();
        while (!eof() && !(at() == '*' && at(1) == '/')) advance();
        if (eof()) {
          error(l, c, "unterminated comment");
          return;
        }
        advance();
        advance();
      } else if (at() == '/' && at(1) == '/') {
        while (!eof() && at() != '\n') advance();
      } else {
        return;
      }
    }
  }

  // Skips a quoted string or character literal inside an action block.
  void skip_code_string(char quote) {
    advance();
    while (!eof() && at() != quote && at() != '\n') {
      if (at() == '\\' && pos_ + 1 < src_.size()) advance();
      advance();
    }
    if (!eof() && at() == quote) advance();
  }

  Lexeme scan() {
    skip_trivia();
    Lexeme l;
    l.line = line_;
    l.col = col_;
    if (eof()) {
      l.kind = Lexeme::Kind::End;
      return l;
    }
    char c = at();
    if (c == '%') {
      if (at(1) == '%') {
        advance();
        advance();
        l.kind = Lexeme::Kind::Separator;
        return l;
      }
      if (at(1) == '{') {
        // Prologue code: %{ ... %}
        while (!eof() && !(at() == '%' && at(1) == '}')) advance();
        if (eof()) {
          error(l.line, l.col, "unterminated %{ block");
        } else {
          advance();
          advance();
        }
        return scan();
      }
      advance();
      std::string name;
      while (!eof() && (ident_char(at()) || at() == '-')) {
        name += at();
        advance();
      }
      l.kind = Lexeme::Kind::Directive;
      l.text = std::move(name);
      return l;
    }
    if (ident_start(c)) {
      while (!eof() && ident_char(at())) {
        l.text += at();
        advance();
      }
      l.kind = Lexeme::Kind::Ident;
      return l;
    }
    if (c >= '0' && c <= '9') {
      while (!eof() && at() >= '0' && at() <= '9') {
        l.text += at();
        advance();
      }
      l.kind = Lexeme::Kind::Number;
      return l;
    }
    if (c == '\'' || c == '"') {
      advance();
      while (!eof() && at() != c && at() != '\n') {
        if (at() == '\\' && pos_ + 1 < src_.size()) {
          advance();
          char e = at();
          l.text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        } else {
          l.text += at();
        }
        advance();
      }
      if (at() != c) {
        error(l.line, l.col, "unterminated quoted literal");
        l.kind = Lexeme::Kind::Bad;
        return l;
      }
      advance();
      if (l.text.empty()) {
        error(l.line, l.col, "empty quoted literal");
        l.kind = Lexeme::Kind::Bad;
        return l;
      }
      l.kind = Lexeme::Kind::Quoted;
      return l;
    }
    if (c == '{') {
      int depth = 0;
      while (!eof()) {
        char d = at();
        if (d == '"' || d == '\'') {
          skip_code_string(d);
          continue;
        }
        if (d == '/' && (at(1) == '*' || at(1) == '/')) {
          skip_trivia();
          continue;
        }
        advance();
        if (d == '{') ++depth;
        if (d == '}' && --depth == 0) break;
      }
      if (depth != 0) error(l.line, l.col, "unbalanced '{' in action block");
      l.kind = Lexeme::Kind::Action;
      return l;
    }
    if (c == '<') {
      while (!eof() && at() != '>') advance();
      if (!eof()) advance();
      l.kind = Lexeme::Kind::Tag;
      return l;
    }
    advance();
    switch (c) {
      case ':': l.kind = Lexeme::Kind::Colon; return l;
      case '|': l.kind = Lexeme::Kind::Bar; return l;
      case ';': l.kind = Lexeme::Kind::Semi; return l;
      default: break;
    }
    error(l.line, l.col, std::string("unexpected character '") + c + "'");
    l.kind = Lexeme::Kind::Bad;
    return l;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  std::deque<Lexeme> pending_;
  std::vector<Diagnostic>& diags_;
};

struct RawSymbol {
  std::string name;
  bool quoted = false;
  std::size_t line = 0;
  std::size_t col = 0;
};

struct RawProduction {
  std::vector<RawSymbol> symbols;
  std::optional<RawSymbol> prec;
};

struct RawRule {
  RawSymbol name;
  std::vector<RawProduction> productions;
};

std::string quote(std::string_view name) {
  char q = name.find('\'') != std::string_view::npos && name.find('"') == std::string_view::npos ? '"' : '\'';
  std::string out(1, q);
  for (char c : name) {
    if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      if (c == q || c == '\\') out += '\\';
      out += c;
    }
  }
  out += q;
  return out;
}

}  // namespace

GrammarError::GrammarError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(format_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

class GrammarBuilder {
 public:
  explicit GrammarBuilder(std::string_view src) : scanner_(src, diags_) {
    g_.token_names_.push_back("$");
    g_.token_prec_.push_back(std::nullopt);
    g_.avoid_insert_.push_back(false);
  }

  Grammar build() {
    parse_declarations();
    parse_rules();
    resolve();
    if (!diags_.empty()) {
      std::stable_sort(diags_.begin(), diags_.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return a.line != b.line ? a.line < b.line : a.col < b.col;
      });
      throw GrammarError(std::move(diags_));
    }
    return std::move(g_);
  }

 private:
  using Kind = Lexeme::Kind;

  void error(const Lexeme& at, std::string msg) { diags_.push_back({at.line, at.col, std::move(msg)}); }
  void error(const RawSymbol& at, std::string msg) { diags_.push_back({at.line, at.col, std::move(msg)}); }

  TokenId declare_token(const std::string& name, std::size_t line, std::size_t col) {
    if (name == "$") {
      diags_.push_back({line, col, "token name '$' is reserved for end-of-file"});
      return kEofToken;
    }
    if (auto it = token_ids_.find(name); it != token_ids_.end()) return it->second;
    TokenId id = make_id<TokenId>(g_.token_names_.size());
    g_.token_names_.push_back(name);
    g_.token_prec_.push_back(std::nullopt);
    g_.avoid_insert_.push_back(false);
    token_ids_.emplace(name, id);
    return id;
  }

  bool is_list_item(const Lexeme& l) const { return l.kind == Kind::Ident || l.kind == Kind::Quoted || l.kind == Kind::Tag; }

  void parse_declarations() {
    std::uint32_t prec_level = 0;
    for (;;) {
      Lexeme l = scanner_.next();
      switch (l.kind) {
        case Kind::Separator:
          return;
        case Kind::End:
          error(l, "missing '%%' separator before the rules section");
          return;
        case Kind::Directive:
          break;
        case Kind::Bad:
          continue;
        default:
          error(l, "unexpected input in declarations section");
          continue;
      }
      const std::string& d = l.text;
      if (d == "start") {
        Lexeme name = scanner_.next();
        if (name.kind != Kind::Ident) {
          error(name, "%start expects a rule name");
        } else if (start_name_) {
          error(name, "duplicate %start declaration");
        } else {
          start_name_ = RawSymbol{name.text, false, name.line, name.col};
        }
      } else if (d == "token") {
        while (is_list_item(scanner_.peek())) {
          Lexeme t = scanner_.next();
          if (t.kind == Kind::Tag) continue;
          if (t.kind == Kind::Ident) declared_idents_.emplace(t.text, RawSymbol{t.text, false, t.line, t.col});
          declare_token(t.text, t.line, t.col);
        }
      } else if (d == "left" || d == "right" || d == "nonassoc") {
        ++prec_level;
        Assoc assoc = d == "left" ? Assoc::Left : d == "right" ? Assoc::Right : Assoc::NonAssoc;
        while (is_list_item(scanner_.peek())) {
          Lexeme t = scanner_.next();
          if (t.kind == Kind::Tag) continue;
          if (t.kind == Kind::Ident) declared_idents_.emplace(t.text, RawSymbol{t.text, false, t.line, t.col});
          TokenId id = declare_token(t.text, t.line, t.col);
          if (id == kEofToken) continue;
          if (g_.token_prec_[index(id)]) {
            error(t, "precedence of '" + t.text + "' declared more than once");
          } else {
            g_.token_prec_[index(id)] = Precedence{prec_level, assoc};
          }
        }
      } else if (d == "avoid_insert") {
        bool any = false;
        while (scanner_.peek().kind == Kind::Ident || scanner_.peek().kind == Kind::Quoted) {
          Lexeme t = scanner_.next();
          avoid_.push_back(RawSymbol{t.text, t.kind == Kind::Quoted, t.line, t.col});
          any = true;
        }
        if (!any) error(l, "%avoid_insert expects at least one token");
      } else if (d == "expect" || d == "expect-rr") {
        if (scanner_.peek().kind == Kind::Number) scanner_.next();
      } else if (d == "union") {
        error(l, "%union is not supported");
        if (scanner_.peek().kind == Kind::Action) scanner_.next();
      } else {
        error(l, "unsupported directive '%" + d + "'");
      }
    }
  }

  void parse_rules() {
    std::optional<Lexeme> name;
    for (;;) {
      if (!name) {
        Lexeme l = scanner_.next();
        if (l.kind == Kind::End || l.kind == Kind::Separator) return;
        if (l.kind == Kind::Bad) continue;
        if (l.kind != Kind::Ident) {
          error(l, "expected a rule name");
          continue;
        }
        if (scanner_.peek().kind != Kind::Colon) {
          error(scanner_.peek(), "expected ':' after rule name '" + l.text + "'");
          continue;
        }
        name = std::move(l);
      }
      scanner_.next();  // ':'
      name = parse_rule(std::move(*name));
    }
  }

  // Parses the alternatives of one rule. Returns the name of the following rule
  // when it was reached without a terminating ';' (Yacc allows omitting it).
  std::optional<Lexeme> parse_rule(Lexeme name) {
    RawRule rule;
    rule.name = RawSymbol{name.text, false, name.line, name.col};
    rule.productions.emplace_back();
    std::optional<Lexeme> next_rule;
    bool done = false;
    while (!done) {
      const Lexeme& p = scanner_.peek();
      switch (p.kind) {
        case Kind::Ident: {
          Lexeme sym = scanner_.next();
          if (scanner_.peek().kind == Kind::Colon) {
            next_rule = std::move(sym);
            done = true;
            break;
          }
          rule.productions.back().symbols.push_back({sym.text, false, sym.line, sym.col});
          break;
        }
        case Kind::Quoted: {
          Lexeme sym = scanner_.next();
          rule.productions.back().symbols.push_back({sym.text, true, sym.line, sym.col});
          break;
        }
        case Kind::Directive: {
          Lexeme dir = scanner_.next();
          if (dir.text == "prec") {
            Lexeme t = scanner_.next();
            if (t.kind != Kind::Ident && t.kind != Kind::Quoted) {
              error(t, "%prec expects a token");
            } else if (rule.productions.back().prec) {
              error(t, "duplicate %prec in production");
            } else {
              rule.productions.back().prec = RawSymbol{t.text, t.kind == Kind::Quoted, t.line, t.col};
            }
          } else if (dir.text != "empty") {
            error(dir, "unexpected directive '%" + dir.text + "' in rule");
          }
          break;
        }
        case Kind::Action:
        case Kind::Tag:
        case Kind::Bad:
          scanner_.next();
          break;
        case Kind::Bar:
          scanner_.next();
          rule.productions.emplace_back();
          break;
        case Kind::Semi:
          scanner_.next();
          done = true;
          break;
        case Kind::End:
        case Kind::Separator:
          done = true;
          break;
        default:
          error(p, "unexpected input in rule '" + rule.name.name + "'");
          scanner_.next();
          break;
      }
    }
    rules_.push_back(std::move(rule));
    return next_rule;
  }

  std::optional<TokenId> resolve_token_ref(const RawSymbol& s) {
    if (s.quoted) return declare_token(s.name, s.line, s.col);
    if (declared_idents_.count(s.name)) return declare_token(s.name, s.line, s.col);
    return std::nullopt;
  }

  void resolve() {
    std::unordered_map<std::string, RuleId> rule_ids;
    for (const RawRule& r : rules_) {
      if (rule_ids.count(r.name.name)) {
        error(r.name, "duplicate rule '" + r.name.name + "'");
        continue;
      }
      if (declared_idents_.count(r.name.name)) {
        error(r.name, "'" + r.name.name + "' is declared as a token and defined as a rule");
      }
      RuleId id = make_id<RuleId>(g_.rule_names_.size());
      rule_ids.emplace(r.name.name, id);
      g_.rule_names_.push_back(r.name.name);
      g_.rule_prods_.emplace_back();
    }

    for (const RawRule& r : rules_) {
      auto rid = rule_ids.find(r.name.name);
      bool duplicate = &r != &*std::find_if(rules_.begin(), rules_.end(),
                                            [&](const RawRule& o) { return o.name.name == r.name.name; });
      for (const RawProduction& rp : r.productions) {
        Production p;
        p.rule = rid->second;
        for (const RawSymbol& s : rp.symbols) {
          if (!s.quoted) {
            if (auto it = rule_ids.find(s.name); it != rule_ids.end()) {
              p.symbols.push_back(Symbol::rule(it->second));
              continue;
            }
          }
          if (auto t = resolve_token_ref(s)) {
            p.symbols.push_back(Symbol::token(*t));
          } else {
            error(s, "unknown symbol '" + s.name + "'");
          }
        }
        if (rp.prec) {
          if (auto t = resolve_token_ref(*rp.prec)) {
            p.precedence_override = *t;
          } else {
            error(*rp.prec, "unknown token '" + rp.prec->name + "' in %prec");
          }
        }
        if (duplicate) continue;
        ProdId pid = make_id<ProdId>(g_.productions_.size());
        g_.rule_prods_[index(p.rule)].push_back(pid);
        g_.productions_.push_back(std::move(p));
      }
    }

    for (const RawSymbol& a : avoid_) {
      auto it = token_ids_.find(a.name);
      if (it == token_ids_.end()) {
        error(a, "unknown token '" + a.name + "' in %avoid_insert");
      } else {
        g_.avoid_insert_[index(it->second)] = true;
      }
    }

    if (g_.rule_names_.empty()) {
      diags_.push_back({1, 1, "grammar has no rules, so there is no start rule"});
    } else if (start_name_) {
      auto it = rule_ids.find(start_name_->name);
      if (it == rule_ids.end()) {
        error(*start_name_, "start rule '" + start_name_->name + "' is not defined");
      } else {
        g_.start_ = it->second;
      }
    } else {
      g_.start_ = RuleId{0};
    }
  }

  std::vector<Diagnostic> diags_;
  Scanner scanner_;
  Grammar g_;
  std::unordered_map<std::string, TokenId> token_ids_;
  std::unordered_map<std::string, RawSymbol> declared_idents_;
  std::optional<RawSymbol> start_name_;
  std::vector<RawSymbol> avoid_;
  std::vector<RawRule> rules_;
};

Grammar Grammar::parse(std::string_view src) { return GrammarBuilder(src).build(); }

std::optional<TokenId> Grammar::find_token(std::string_view name) const {
  for (std::size_t i = 0; i < token_names_.size(); ++i) {
    if (token_names_[i] == name) return make_id<TokenId>(i);
  }
  return std::nullopt;
}

std::optional<RuleId> Grammar::find_rule(std::string_view name) const {
  for (std::size_t i = 0; i < rule_names_.size(); ++i) {
    if (rule_names_[i] == name) return make_id<RuleId>(i);
  }
  return std::nullopt;
}

std::optional<Precedence> Grammar::production_precedence(ProdId p) const {
  const Production& prod = production(p);
  if (prod.precedence_override) return token_precedence(*prod.precedence_override);
  for (auto it = prod.symbols.rbegin(); it != prod.symbols.rend(); ++it) {
    if (it->is_token()) return token_precedence(it->as_token());
  }
  return std::nullopt;
}

std::vector<TokenId> Grammar::avoid_insert_tokens() const {
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < avoid_insert_.size(); ++i) {
    if (avoid_insert_[i]) out.push_back(make_id<TokenId>(i));
  }
  return out;
}

std::string Grammar::symbol_name(Symbol s) const {
  return s.is_token() ? std::string(token_name(s.as_token())) : std::string(rule_name(s.as_rule()));
}

std::string Grammar::to_yacc() const {
  std::ostringstream out;
  out << "%start " << rule_name(start_) << '\n';
  if (token_count() > 1) {
    out << "%token";
    for (std::size_t t = 1; t < token_count(); ++t) out << ' ' << quote(token_names_[t]);
    out << '\n';
  }
  std::uint32_t max_level = 0;
  for (const auto& p : token_prec_) {
    if (p) max_level = std::max(max_level, p->level);
  }
  for (std::uint32_t level = 1; level <= max_level; ++level) {
    std::string line;
    Assoc assoc = Assoc::Left;
    for (std::size_t t = 1; t < token_count(); ++t) {
      if (token_prec_[t] && token_prec_[t]->level == level) {
        assoc = token_prec_[t]->assoc;
        line += ' ' + quote(token_names_[t]);
      }
    }
    // Levels without tokens cannot be expressed; an empty %left line keeps numbering stable.
    out << (assoc == Assoc::Left ? "%left" : assoc == Assoc::Right ? "%right" : "%nonassoc") << line << '\n';
  }
  auto avoid = avoid_insert_tokens();
  if (!avoid.empty()) {
    out << "%avoid_insert";
    for (TokenId t : avoid) out << ' ' << quote(token_name(t));
    out << '\n';
  }
  out << "%%\n";
  for (std::size_t r = 0; r < rule_count(); ++r) {
    out << rule_names_[r] << ":";
    const auto& prods = rule_prods_[r];
    for (std::size_t i = 0; i < prods.size(); ++i) {
      out << (i ? "\n    |" : "");
      const Production& p = productions_[index(prods[i])];
      for (Symbol s : p.symbols) {
        out << ' ' << (s.is_token() ? quote(token_name(s.as_token())) : rule_names_[s.value]);
      }
      if (p.precedence_override) out << " %prec " << quote(token_name(*p.precedence_override));
    }
    out << "\n    ;\n";
  }
  return out.str();
}

}  // namespace lrkit
