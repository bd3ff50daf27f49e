#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "gen.hpp"
#include "lces/parser.hpp"
#include "lces/printer.hpp"
#include "lces/reduction.hpp"
#include "lces/typing.hpp"

using namespace lces;
using lces::testing::TermGen;
using lces::testing::typed_corpus;

namespace {

Term shuffled(const Term& t, std::mt19937_64& rng) {
  Term out = t;
  for (std::size_t i = 0; i < t.child_count(); ++i)
    out = with_child(out, i, shuffled(t.child(i), rng));
  if (out.kind() == TermKind::Par) {
    auto kids = out.children();
    std::shuffle(kids.begin(), kids.end(), rng);
    if (kids.size() >= 3 && rng() % 2) {
      Term inner = Term::par({kids[0], kids[1]});
      kids.erase(kids.begin(), kids.begin() + 2);
      kids.push_back(inner);
    }
    out = Term::par(kids);
  }
  return out;
}

// Carries out every pending variable substitution.
Term discharge(const Term& t) {
  if (t.kind() == TermKind::VarSub) {
    VarSubst sigma;
    for (const auto& b : t.bindings()) sigma[b.name] = discharge(b.value);
    return discharge(substitute(t.body(), sigma));
  }
  Term out = t;
  for (std::size_t i = 0; i < t.child_count(); ++i) out = with_child(out, i, discharge(t.child(i)));
  return out;
}

bool same_subst(const VarSubst& a, const VarSubst& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [x, v] : a) {
    auto it = b.find(x);
    if (it == b.end() || !term_equal(discharge(v), discharge(it->second))) return false;
  }
  return true;
}

std::set<std::string> range_vars(const VarSubst& s) {
  std::set<std::string> out;
  for (const auto& [x, v] : s)
    for (const auto& y : free_names(v).variables) out.insert(y);
  return out;
}

bool disjoint(const VarSubst& s, const std::set<std::string>& names) {
  for (const auto& [x, v] : s)
    if (names.count(x)) return false;
  return true;
}

}  // namespace

TEST(properties, canonicalize_idempotent_and_order_blind) {
  std::mt19937_64 rng(1);
  auto corpus = typed_corpus(300, 21);
  for (const auto& tt : corpus) {
    Term c = alpha_canonicalize(tt.term);
    EXPECT_EQ(alpha_canonicalize(c), c);
    EXPECT_EQ(alpha_canonicalize(shuffled(tt.term, rng)), c) << print(tt.term);
  }
  for (std::size_t i = 0; i + 2 < corpus.size(); i += 3) {
    std::vector<Term> xs{corpus[i].term, corpus[i + 1].term, corpus[i + 2].term, corpus[i].term};
    Sum a = canonicalize(Sum(xs));
    std::shuffle(xs.begin(), xs.end(), rng);
    EXPECT_EQ(canonicalize(Sum(xs)), a);
    EXPECT_EQ(canonicalize(a), a);
    EXPECT_LE(a.summands().size(), 3u);
  }
}

TEST(properties, term_equal_respects_reduction_and_typing) {
  std::mt19937_64 rng(2);
  for (const auto& tt : typed_corpus(200, 22)) {
    Term other = shuffled(tt.term, rng);
    ASSERT_TRUE(term_equal(tt.term, other));
    EXPECT_EQ(successors_full(canonicalize(Sum(tt.term))),
              successors_full(canonicalize(Sum(other))));
    EXPECT_EQ(infer(tt.refs, Sum(tt.term)), infer(tt.refs, Sum(other)));
  }
}

TEST(properties, juxtaposition_is_associative_and_commutative) {
  TermGen gen(3);
  const std::vector<std::string> refs{"r", "s", "u"};
  for (int i = 0; i < 500; ++i) {
    RefSubst a = gen.ref_subst(refs, i % 4), b = gen.ref_subst(refs, i % 3),
             c = gen.ref_subst(refs, 2);
    EXPECT_EQ(juxtapose_ref_substs(a, b), juxtapose_ref_substs(b, a));
    EXPECT_EQ(juxtapose_ref_substs(juxtapose_ref_substs(a, b), c),
              juxtapose_ref_substs(a, juxtapose_ref_substs(b, c)));
    EXPECT_EQ(juxtapose_ref_substs(a, b).value_count(), a.value_count() + b.value_count());
  }
}

TEST(properties, composition_is_associative_under_side_condition) {
  TermGen gen(4);
  std::size_t checked = 0;
  for (int i = 0; i < 3000; ++i) {
    VarSubst s = gen.var_subst(1 + i % 2), t = gen.var_subst(1), u = gen.var_subst(1 + i % 3);
    std::set<std::string> ranges = range_vars(s);
    for (const auto& y : range_vars(t)) ranges.insert(y);
    for (const auto& y : range_vars(u)) ranges.insert(y);
    if (!disjoint(s, ranges) || !disjoint(t, ranges) || !disjoint(u, ranges)) continue;
    ++checked;
    EXPECT_TRUE(same_subst(compose_var_substs(compose_var_substs(s, t), u),
                           compose_var_substs(s, compose_var_substs(t, u))));
  }
  EXPECT_GT(checked, 100u);
}

TEST(properties, meta_application_matches_explicit_substitution) {
  TermGen gen(5);
  for (int i = 0; i < 500; ++i) {
    VarSubst sigma = gen.var_subst(1 + i % 3);
    for (const auto& [x, v] : gen.var_subst(2)) {
      Term explicit_form = Term::var_sub(to_bindings(sigma), v);
      Trace tr = run(Sum(explicit_form), Strategy::Leftmost, 0, 20);
      ASSERT_EQ(tr.status, TraceStatus::NormalForm);
      for (const auto& st : tr.steps) {
        EXPECT_GE(static_cast<int>(st.site.tag), static_cast<int>(RuleTag::Subst_Var));
        EXPECT_LE(static_cast<int>(st.site.tag), static_cast<int>(RuleTag::Subst_Merge));
      }
      EXPECT_TRUE(term_equal(tr.final_state(), Sum(meta_apply_value(sigma, v))))
          << print(explicit_form);
    }
  }
}

TEST(properties, reduction_never_invents_names) {
  auto open = [](const Sum& s) {
    std::set<std::string> out;
    for (const auto& t : s.summands())
      for (const auto& x : open_variables(t)) out.insert(x);
    return out;
  };
  for (const auto& tt : typed_corpus(200, 23)) {
    // an open variant: some λ binder's occurrences left free
    Term open_term = tt.term;
    if (tt.term.kind() == TermKind::App && tt.term.fun().kind() == TermKind::Lam)
      open_term = Term::app(tt.term.fun().body(), tt.term.arg(), tt.term.refs());
    ReductionGraph g = reduction_graph(canonicalize(Sum(open_term)), Mode::Full, {500});
    for (const auto& e : g.edges) {
      FreeNames from = free_names(g.nodes[e.from]);
      FreeNames to = free_names(g.nodes[e.to]);
      auto vf = open(g.nodes[e.from]), vt = open(g.nodes[e.to]);
      EXPECT_TRUE(std::includes(vf.begin(), vf.end(), vt.begin(), vt.end()));
      EXPECT_TRUE(std::includes(from.references.begin(), from.references.end(),
                                to.references.begin(), to.references.end()));
    }
  }
}

TEST(properties, print_parse_round_trip) {
  for (const auto& tt : typed_corpus(500, 24)) {
    std::string text = print(tt.term);
    EXPECT_TRUE(term_equal(parse_term(text), tt.term)) << text;
  }
}

TEST(properties, nd_steps_choose_a_summand_of_the_read) {
  std::vector<RefSubst> pool{parse_ref_subst("r -> {*}"),
                             parse_ref_subst("r -> {\\a:Unit. a, \\b:Unit. *}")};
  for (const auto& t : lces::testing::small_terms(3, pool)) {
    std::set<Term> from_full, from_nd;
    for (const auto& st : steps(Sum(t), Mode::Full))
      if (st.site.tag == RuleTag::RDown_Get)
        for (const auto& x : st.result.summands()) from_full.insert(x);
    for (const auto& st : steps(Sum(t), Mode::Nd))
      if (st.site.tag == RuleTag::ND_GetPick || st.site.tag == RuleTag::ND_GetSkip)
        from_nd.insert(st.result.only());
    EXPECT_EQ(from_full, from_nd) << print(t);
  }
}
