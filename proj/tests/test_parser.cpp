#include <gtest/gtest.h>

#include <random>

#include "fclloop/bundled.hpp"
#include "fclloop/fcl/parser.hpp"
#include "fclloop/fcl/printer.hpp"
#include "support.hpp"

using namespace fclloop;
using namespace fclloop::fcl;

namespace {

Diagnostic::Kind first_kind(std::string_view text) {
  auto r = parse_constraints(text);
  EXPECT_FALSE(r.ok()) << text;
  EXPECT_TRUE(r.constraints.empty());
  return r.diagnostics.empty() ? Diagnostic::Kind::Syntax : r.diagnostics[0].kind;
}

}  // namespace

TEST(Parser, BundledFile) {
  auto r = parse_constraints(bundled_constraints_text());
  ASSERT_TRUE(r.ok()) << r.diagnostics[0].to_string();
  ASSERT_EQ(r.constraints.size(), 5u);
  EXPECT_EQ(r.constraints[0].name, "win");
  EXPECT_EQ(r.constraints[1].gloss, "The Dragon should be attacked at least once in the first 15 steps.");
  EXPECT_EQ(r.constraints[2].mode, Mode::AtEachStep);
  EXPECT_EQ(render(r.constraints[1]), "constraint \"attack_early\" at start: F[>=1, 15](count(Attack) >= 1)");
  EXPECT_EQ(render(r.constraints[2].formula), "forall f in Farmers: G[MAX](f.location == \"Village\")");
}

TEST(Parser, Desugaring) {
  auto g = parse_formula("G[3](count(Farm) >= 1)").formula;
  auto f = parse_formula("F[>=3, 3](count(Farm) >= 1)").formula;
  EXPECT_TRUE(same(g, f));
  auto p = parse_formula("P[>=1, 4](count(Farm) >= 1)").formula;
  auto neg = parse_formula("F[>=1, -4](count(Farm) >= 1)").formula;
  EXPECT_TRUE(same(p, neg));
  EXPECT_EQ(render(p), "P[>=1, 4](count(Farm) >= 1)");
}

TEST(Parser, Precedence) {
  auto f = parse_formula("count(Farm) > 0 or count(Attack) > 0 and not count(GoToCave) > 0 implies BEG == 0").formula;
  const auto& top = std::get<Binary>(f->node);
  EXPECT_EQ(top.op, BinOp::Implies);
  const auto& lhs = std::get<Binary>(top.lhs->node);
  EXPECT_EQ(lhs.op, BinOp::Or);
  EXPECT_EQ(std::get<Binary>(lhs.rhs->node).op, BinOp::And);
  // implies is right-associative
  auto r = parse_formula("BEG == 0 implies BEG == 1 implies BEG == 2").formula;
  EXPECT_TRUE(std::holds_alternative<Binary>(std::get<Binary>(r->node).rhs->node));
}

TEST(Parser, Diagnostics) {
  EXPECT_EQ(first_kind("constraint \"a\" at start: count(Defend) >= 1"), Diagnostic::Kind::UnknownSet);
  EXPECT_EQ(first_kind("constraint \"a\" at start: forall v in Villagers: v.mood == 1"),
            Diagnostic::Kind::UnknownAttribute);
  EXPECT_EQ(first_kind("constraint \"a\" at start: v.hp > 0"), Diagnostic::Kind::FreeVariable);
  EXPECT_EQ(first_kind("constraint \"a\" at start: F[>=-1, 3](BEG > 0)"), Diagnostic::Kind::NegativeCount);
  EXPECT_EQ(first_kind("constraint \"a\" at start: G[-2](BEG > 0)"), Diagnostic::Kind::NegativeCount);
  EXPECT_EQ(first_kind("constraint \"a\" at start: BEG > 0\nconstraint \"a\" at start: BEG > 1"),
            Diagnostic::Kind::DuplicateName);
  EXPECT_EQ(first_kind("constraint \"a\" at start: forall v in Villagers: v.hp == \"x\""),
            Diagnostic::Kind::TypeMismatch);
  EXPECT_EQ(first_kind("constraint \"a\" at start: forall v in Villagers: v.location < \"x\""),
            Diagnostic::Kind::TypeMismatch);
  EXPECT_EQ(first_kind("constraint \"a\" at start: BEG >"), Diagnostic::Kind::Syntax);
  EXPECT_EQ(first_kind("constraint \"a\" at start: BEG > INF"), Diagnostic::Kind::Syntax);
}

TEST(Parser, DiagnosticPositions) {
  auto r = parse_constraints("# header\nconstraint \"a\" at start:\n  count(Attack) >= 1 and\n  count(Nope) >= 1\n");
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].line, 4);
  EXPECT_EQ(r.diagnostics[0].column, 9);
  EXPECT_EQ(r.diagnostics[0].to_string().substr(0, 12), "4:9: error: ");
}

TEST(Parser, RecoversAndReportsEveryConstraint) {
  auto r = parse_constraints(
      "constraint \"a\" at start: BEG >\n"
      "constraint \"b\" at start: count(Nope) > 1\n"
      "constraint \"c\" at start: BEG > 0\n");
  EXPECT_EQ(r.diagnostics.size(), 2u);
  EXPECT_TRUE(r.constraints.empty());
}

TEST(Parser, GlossAndComments) {
  auto r = parse_constraints(
      "## first line\n## second line\nconstraint \"a\" at start: BEG >= 0\n"
      "## dropped\n\nconstraint \"b\" at start: BEG >= 0\n"
      "constraint \"c\" at start: \"a\\\"b\\\\\" == \"x\" # trailing\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.constraints[0].gloss, "first line second line");
  EXPECT_EQ(r.constraints[1].gloss, "");
  EXPECT_EQ(std::get<StringLit>(std::get<Compare>(r.constraints[2].formula->node).lhs).value, "a\"b\\");
}

TEST(Parser, RoundTripRandomAsts) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 800; ++k) {
    std::vector<std::string> scope;
    auto f = testsupport::random_formula(rng, 1 + k % 5, scope);
    std::string text = render(f);
    auto back = parse_formula(text);
    ASSERT_TRUE(back.diagnostics.empty()) << text << "\n" << back.diagnostics[0].to_string();
    ASSERT_TRUE(same(f, back.formula)) << text << "\n" << render(back.formula);
    ASSERT_EQ(render(back.formula), text);
  }
}

TEST(Parser, RoundTripFile) {
  auto r = parse_constraints(bundled_constraints_text());
  auto again = parse_constraints(render_file(r.constraints));
  ASSERT_TRUE(again.ok());
  ASSERT_EQ(again.constraints.size(), r.constraints.size());
  for (std::size_t i = 0; i < r.constraints.size(); ++i) {
    EXPECT_TRUE(same_structure(r.constraints[i], again.constraints[i]));
    EXPECT_EQ(r.constraints[i].gloss, again.constraints[i].gloss);
  }
}

TEST(Parser, TotalOnRandomBytes) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "constraint\"at start each step:forall exists in implies or and not F G P [ ] ( ) , . - < > = ! "
                               "count MAX BEG INF Attack Farm v x 0 1 23 # \n\t\\\x01\xff";
  for (int k = 0; k < 3000; ++k) {
    std::string text;
    std::size_t len = std::uniform_int_distribution<std::size_t>(0, 80)(rng);
    for (std::size_t i = 0; i < len; ++i) {
      text += k % 3 == 0 ? static_cast<char>(rng() & 0xff)
                         : alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    }
    if (k % 4 == 0) text = "constraint \"z\" at start: " + text;
    ParseResult r;
    ASSERT_NO_THROW(r = parse_constraints(text));
    ASSERT_TRUE(r.ok() || r.constraints.empty());
    for (const auto& d : r.diagnostics) ASSERT_GE(d.line, 1);
  }
  std::string deep(5000, '(');
  EXPECT_NO_THROW(parse_formula(deep));
  EXPECT_FALSE(parse_formula(deep).diagnostics.empty());
}
