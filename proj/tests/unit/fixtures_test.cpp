#include <gtest/gtest.h>

#include "lrkit/cpctplus.hpp"
#include "support.hpp"

using namespace lrkit;
using lrkit::testing::first_error;
using lrkit::testing::Language;
using lrkit::testing::rendered;

namespace {

const std::set<std::string> kMissingComma{"Delete y", "Insert ,", "Insert ="};

}  // namespace

TEST(MiniJava, MissingCommaOracleSet) {
  Language java("minijava.y", "minijava.l");
  for (std::string src : {"class C { int x y; }", "class C {\n  int x y;\n}\n"}) {
    auto toks = java.lexer.lex(src);
    auto err = first_error(java.table, toks);
    ASSERT_TRUE(err);
    auto oracle = oracle_min_repairs(java.table, err->stack, toks, err->offset, 3);
    EXPECT_EQ(rendered(oracle, java.grammar, toks, err->offset, src), kMissingComma);

    RecoveryParams p;
    auto found = cpct_search(java.table, err->stack, toks, err->offset, p, Clock::time_point::max());
    ASSERT_EQ(found.status, SearchResult::Status::Found);
    EXPECT_EQ(found.cost, 1u);
    auto seqs = candidate_sequences(found.successes);
    EXPECT_EQ(rendered(seqs, java.grammar, toks, err->offset, src), kMissingComma);
  }
}

TEST(MiniJava, ReportPosition) {
  Language java("minijava.y", "minijava.l");
  std::string src = "class C {\n  int x y;\n}\n";
  RecoveryParams p;
  p.deterministic_order = true;
  CpctPlus rec(java.grammar, p);
  ParseResult r = parse(java.table, java.grammar, java.lexer.lex(src), &rec, {.source = src});
  ASSERT_EQ(r.reports.size(), 1u);
  EXPECT_EQ(r.reports[0].line, 2u);
  EXPECT_EQ(r.reports[0].col, 9u);
  EXPECT_TRUE(r.tree);
}

TEST(Fixtures, ValidSamplesParse) {
  struct Case {
    const char* y;
    const char* l;
    const char* src;
  };
  for (const Case& c : {Case{"minijava.y", "minijava.l", "class A { int a, b = 1 + c; B d; }"},
                        Case{"stmts.y", "stmts.l", "a = b + c; { x = y; { } } z = w;"},
                        Case{"stmts.y", "stmts.l", ""},
                        Case{"brackets.y", "brackets.l", "( x [ ( ) x ] ) x"},
                        Case{"brackets.y", "brackets.l", ""}}) {
    Language lang(c.y, c.l);
    EXPECT_FALSE(first_error(lang.table, lang.lexer.lex(c.src))) << c.src;
    EXPECT_TRUE(lang.table.conflicts().empty()) << c.y;
  }
}
