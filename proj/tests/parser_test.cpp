#include <gtest/gtest.h>

#include "lces/parser.hpp"
#include "lces/printer.hpp"

using namespace lces;

TEST(parse, down_with_refs) {
  SourceFile f = parse("refs r : Unit. term [r -> {*}]v get r");
  ASSERT_EQ(f.refs.size(), 1u);
  EXPECT_EQ(f.refs[0].first, "r");
  EXPECT_EQ(f.refs[0].second, Type::unit());
  ASSERT_TRUE(f.body.is_simple());
  const Term& t = f.body.only();
  ASSERT_EQ(t.kind(), TermKind::Down);
  EXPECT_EQ(t.refs(), RefSubst::single("r", {Term::unit()}));
  EXPECT_EQ(t.body(), Term::get("r"));
}

TEST(parse, unit_without_refs) {
  SourceFile f = parse("term *");
  EXPECT_TRUE(f.refs.empty());
  EXPECT_EQ(f.body.only(), Term::unit());
}

TEST(parse, application_has_empty_lambda_subst) {
  Term t = parse_term("((\\x:Unit. x) *)");
  ASSERT_EQ(t.kind(), TermKind::App);
  EXPECT_TRUE(t.refs().empty());
}

TEST(parse, expect_directive) {
  SourceFile f = parse("refs r : Unit. expect (Unit, {r}). term get r");
  ASSERT_TRUE(f.expected.has_value());
  EXPECT_EQ(f.expected->effect, (Effect{"r"}));
}

TEST(parse, types) {
  Type t = parse_type("Unit -{r}> Unit -> Unit");
  ASSERT_EQ(t.kind(), TypeKind::Arrow);
  EXPECT_EQ(t.effect(), (Effect{"r"}));
  EXPECT_EQ(t.codomain().kind(), TypeKind::Arrow);
  EXPECT_EQ(parse_type("B"), Type::behavior());
  EXPECT_EQ(print(t), "Unit -{r}> Unit -{}> Unit");
}

TEST(parse, comments_and_positions) {
  try {
    parse("-- comment\nterm (\\x:Unit. x");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(parse, lambda_c_program) {
  LCProgram p = parse_program("get r || set(r, *) || r <= \\x:Unit. x");
  EXPECT_EQ(p.threads.size(), 2u);
  EXPECT_EQ(p.stores.size(), 1u);
}

TEST(parse, rejects_garbage) {
  EXPECT_THROW(parse_term("get"), ParseError);
  EXPECT_THROW(parse_term("[r -> {*}]q get r"), ParseError);
  EXPECT_THROW(parse_term("* *)"), ParseError);
}
