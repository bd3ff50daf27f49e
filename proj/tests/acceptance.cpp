// Acceptance suite: one line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "gen.hpp"
#include "lces/analysis.hpp"
#include "lces/lambda_c.hpp"
#include "lces/parser.hpp"
#include "lces/printer.hpp"
#include "lces/reduction.hpp"
#include "lces/typing.hpp"

using namespace lces;
using namespace lces::testing;

namespace {

// Pinned thresholds.
constexpr double kLandinSeconds = 1.0;
constexpr double kTerminationSeconds = 120.0;
constexpr double kCriticalPairSeconds = 1.0;
constexpr std::size_t kCorpusSize = 500;
constexpr std::size_t kStateBudget = 20000;
constexpr std::size_t kJoinBudget = 32;
constexpr std::size_t kProgramCount = 100;
constexpr std::size_t kSimulationBudget = 64;
constexpr std::size_t kOracleSamples = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void criterion(int n, const std::string& name, const std::function<Outcome()>& body) {
  auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  char timing[32];
  std::snprintf(timing, sizeof timing, "%.2f s", seconds_since(t0));
  std::cout << "criterion " << n << " [" << (o.pass ? "PASS" : "FAIL") << "] " << name << ": "
            << o.detail << " (" << timing << ")" << std::endl;
  if (!o.pass) ++failures;
}

std::string count(std::size_t k, const std::string& what) {
  return std::to_string(k) + " " + what;
}

// Shared corpus for criteria 2 to 5.
struct CorpusEntry {
  TypedTerm source;
  NormalForms nd;
};

std::vector<CorpusEntry>& corpus() {
  static std::vector<CorpusEntry> c;
  return c;
}

}  // namespace

int main() {
  criterion(1, "landin rejection and divergence", [] {
    auto t0 = Clock::now();
    SourceFile f = parse(
        "refs r : Unit -{r}> Unit.\n"
        "term (get r *) || ((\\z:Unit. [r -> {\\x:Unit. (get r *)}]^ *) *)");
    auto strat = check_stratification(f.refs);
    Trace t = run(f.body, Strategy::Leftmost, 0, 500, Mode::Nd);
    bool diverges = t.status != TraceStatus::NormalForm;
    double secs = seconds_since(t0);
    bool pass = strat.has_value() && strat->ref == "r" && diverges && secs < kLandinSeconds;
    return Outcome{pass, std::string("stratification ") + (strat ? "rejected" : "accepted") +
                             ", leftmost nd run " + status_name(t.status) + " after " +
                             std::to_string(t.steps.size()) + " steps"};
  });

  criterion(2, "termination of typed corpus (nd)", [] {
    auto t0 = Clock::now();
    auto terms = typed_corpus(kCorpusSize, 2024);
    std::size_t complete = 0, states = 0, untyped = 0;
    for (auto& tt : terms) {
      try {
        infer(tt.refs, tt.term);
      } catch (const TypeError&) {
        ++untyped;
      }
      NormalForms nf = enumerate_normal_forms(tt.term, Mode::Nd, {kStateBudget});
      if (nf.complete) ++complete;
      states = std::max(states, nf.states);
      corpus().push_back(CorpusEntry{tt, std::move(nf)});
    }
    double secs = seconds_since(t0);
    bool pass = terms.size() >= kCorpusSize && untyped == 0 && complete == terms.size() &&
                secs < kTerminationSeconds;
    return Outcome{pass, count(complete, "of ") + std::to_string(terms.size()) +
                             " typed terms exhaust their nd graph within " +
                             std::to_string(kStateBudget) + " states (largest " +
                             std::to_string(states) + "), " + count(untyped, "untyped")};
  });

  criterion(3, "subject reduction on every edge", [] {
    std::size_t edges = 0, violations = 0, truncated = 0;
    for (const auto& e : corpus()) {
      for (Mode mode : {Mode::Nd, Mode::Full}) {
        Report r = check_subject_reduction(e.source.refs, e.source.term, mode, {kStateBudget});
        edges += r.checked;
        violations += r.failures.size();
        if (r.truncated) ++truncated;
      }
    }
    bool pass = !corpus().empty() && violations == 0 && truncated == 0;
    return Outcome{pass, count(edges, "edges") + " in nd and full graphs, " +
                             count(violations, "violations") + ", " +
                             count(truncated, "truncated graphs")};
  });

  criterion(4, "progress on reached normal forms", [] {
    std::size_t forms = 0, violations = 0;
    for (const auto& e : corpus()) {
      for (const auto& nf : e.nd.forms) {
        Report r = check_progress(e.source.refs, nf);
        ++forms;
        violations += r.failures.size();
      }
    }
    return Outcome{!corpus().empty() && violations == 0,
                   count(forms, "normal forms") + ", " + count(violations, "violations")};
  });

  criterion(5, "local confluence and unique normal forms", [] {
    std::size_t pairs = 0, unjoined = 0, unique = 0, incomplete = 0;
    std::string first;
    ConfluenceOptions o;
    o.join_budget = kJoinBudget;
    for (const auto& e : corpus()) {
      Report r = check_local_confluence(e.source.term, o);
      pairs += r.checked;
      unjoined += r.failures.size();
      if (!r.ok() && first.empty()) first = r.failures.front();
      NormalForms nf = enumerate_normal_forms(e.source.term, Mode::Full, {kStateBudget});
      if (!nf.complete) ++incomplete;
      if (nf.complete && nf.forms.size() == 1) ++unique;
    }
    bool pass = unjoined == 0 && unique == corpus().size() && !corpus().empty();
    std::string detail = count(pairs - unjoined, "of ") + std::to_string(pairs) +
                         " divergent pairs joined, " + count(unique, "of ") +
                         std::to_string(corpus().size()) + " terms with one full normal form, " +
                         count(incomplete, "incomplete enumerations");
    if (!first.empty()) detail += "; first: " + first;
    return Outcome{pass, detail};
  });

  criterion(6, "worked critical pair", [] {
    auto t0 = Clock::now();
    Sum s = parse_sum("[r -> {\\y:Unit. y}]v [r -> {\\x:Unit. *}]v get r");
    Sum expected = canonicalize(parse_sum("get r + \\x:Unit. * + \\y:Unit. y"));
    NormalForms nf = enumerate_normal_forms(s, Mode::Full);
    bool exact = nf.complete && nf.forms.size() == 1 && nf.forms.front() == expected;
    bool strategies = run(s, Strategy::Leftmost, 0, 100).final_state() == expected;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
      strategies = strategies && run(s, Strategy::Random, seed, 100).final_state() == expected;
    // the two hand reductions: merge first, or read the inner substitution first
    std::set<RuleTag> first_steps;
    for (const auto& st : steps(canonicalize(s))) first_steps.insert(st.site.tag);
    bool both = first_steps.count(RuleTag::RDown_Merge) && first_steps.count(RuleTag::RDown_Get);
    double secs = seconds_since(t0);
    return Outcome{exact && strategies && both && secs < kCriticalPairSeconds,
                   "normal form " + (nf.forms.empty() ? std::string("none") : print(nf.forms.front())) +
                       (exact ? " (exact)" : " (mismatch)") + ", 51 strategy runs " +
                       (strategies ? "agree" : "disagree")};
  });

  criterion(7, "two-writer non-determinism", [] {
    SourceFile f = parse(
        "refs r : Unit -{}> Unit.\n"
        "term ((\\f:Unit -{}> Unit. f) get(r)) || set(r, \\x:Unit. x) || set(r, \\x:Unit. *)",
        Dialect::Lc);
    Term v0 = parse_term("\\x:Unit. x");
    Term v1 = parse_term("\\x:Unit. *");
    Term program = translate(*f.program);
    NormalForms nf = enumerate_normal_forms(program, Mode::Nd, {kStateBudget});
    bool saw0 = false, saw1 = false;
    for (const auto& s : nf.forms) {
      const Term& t = s.only();
      std::vector<Term> leaves = t.kind() == TermKind::Par ? t.children() : std::vector<Term>{t};
      for (const auto& leaf : leaves) {
        saw0 = saw0 || subst_related(leaf, v0);
        saw1 = saw1 || subst_related(leaf, v1);
      }
    }
    return Outcome{nf.complete && saw0 && saw1,
                   count(nf.forms.size(), "nd normal forms") + ", V0 outcome " +
                       (saw0 ? "present" : "missing") + ", V1 outcome " + (saw1 ? "present" : "missing")};
  });

  criterion(8, "simulation of λ_C programs", [] {
    auto programs = lc_corpus(kProgramCount, 77);
    std::size_t edges = 0, failed = 0, truncated = 0;
    std::string first;
    SimulationLimits lim;
    lim.step_budget = kSimulationBudget;
    for (const auto& p : programs) {
      Report r = check_simulation(p.program, lim);
      edges += r.checked;
      failed += r.failures.size();
      if (r.truncated) ++truncated;
      if (!r.ok() && first.empty()) first = r.failures.front();
    }
    std::string detail = count(programs.size(), "programs") + ", " + count(edges, "λ_C steps") +
                         " simulated, " + count(failed, "failures") + ", " +
                         count(truncated, "truncated explorations");
    if (!first.empty()) detail += "; first: " + first;
    return Outcome{programs.size() >= kProgramCount && failed == 0 && truncated == 0, detail};
  });

  criterion(9, "preorder invariance and simulation", [] {
    std::vector<RefSubst> pool{parse_ref_subst("r -> {*}"), parse_ref_subst("r -> {\\x:Unit. x}")};
    auto terms = small_terms(4, pool);
    std::size_t checks = 0, failed = 0;
    std::string first;
    auto fail = [&](const std::string& what) {
      ++failed;
      if (first.empty()) first = what;
    };
    for (const auto& m : terms) {
      for (const auto& p : pool) {
        const Term n = alpha_canonicalize(Term::down(p, m));
        ++checks;
        if (!preorder_leq(m, n)) fail("not below its extension: " + print(m));
        // invariance under downward structural steps, both sides
        for (const Term* side : {&m, &n}) {
          for (const auto& st : steps(Sum(*side))) {
            if (!is_down_structural(st.site.tag) || !st.result.is_simple()) continue;
            const Term& next = st.result.only();
            ++checks;
            bool ok = side == &m ? preorder_leq(next, n) : preorder_leq(m, next);
            if (!ok) fail(std::string(rule_name(st.site.tag)) + " breaks the preorder at " + print(*side));
          }
        }
        Report r = check_simulation_preorder(m, n, {kJoinBudget, kStateBudget});
        checks += r.checked;
        if (!r.ok()) fail(r.failures.front());
      }
    }
    std::string detail = count(terms.size(), "terms") + ", " + count(checks, "checks") + ", " +
                         count(failed, "failures");
    if (!first.empty()) detail += "; first: " + first;
    return Outcome{failed == 0, detail};
  });

  criterion(10, "oracle equivalences", [] {
    TermGen gen(99);
    std::size_t meta_ok = 0;
    for (std::size_t i = 0; i < kOracleSamples; ++i) {
      VarSubst sigma = gen.var_subst(1 + i % 3);
      VarContext none;
      Term v;
      switch (i % 4) {
        case 0: v = Term::unit(); break;
        case 1: v = Term::var(i % 8 < 4 ? "x" : "q"); break;
        case 2: v = Term::lam("k", Type::unit(), Term::var(i % 8 < 4 ? "y" : "k"), "k"); break;
        default:
          v = Term::lam("x", Type::unit(),
                        Term::app(Term::var("z"), Term::lam("y", Type::unit(), Term::var("x"), "y")),
                        "x");
      }
      Trace t = run(Term::var_sub(to_bindings(sigma), v), Strategy::Leftmost, 0, 50);
      if (t.status == TraceStatus::NormalForm && t.final_state().is_simple() &&
          term_equal(t.final_state().only(), meta_apply_value(sigma, v)))
        ++meta_ok;
    }
    std::vector<RefSubst> pool{parse_ref_subst("r -> {*}"),
                               parse_ref_subst("r -> {*, \\x:Unit. x}")};
    auto terms = small_terms(4, pool);
    std::size_t agree = 0;
    for (const auto& t : terms) {
      std::set<Term> full, nd;
      for (const auto& st : steps(Sum(t), Mode::Full))
        if (st.site.tag == RuleTag::RDown_Get)
          for (const auto& x : st.result.summands()) full.insert(x);
      for (const auto& st : steps(Sum(t), Mode::Nd))
        if (st.site.tag == RuleTag::ND_GetPick || st.site.tag == RuleTag::ND_GetSkip)
          nd.insert(st.result.only());
      if (full == nd) ++agree;
    }
    return Outcome{meta_ok == kOracleSamples && agree == terms.size(),
                   std::to_string(meta_ok) + "/" + std::to_string(kOracleSamples) +
                       " meta-applications match the explicit normal form, " +
                       std::to_string(agree) + "/" + std::to_string(terms.size()) +
                       " small terms with matching read branches"};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
