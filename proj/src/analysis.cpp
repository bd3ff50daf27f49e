#include "lces/analysis.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "lces/printer.hpp"

namespace lces {

// ---------------------------------------------------------------------------
// Skeletons and reachability

namespace {

Term strip_downs(const Term& t) {
  switch (t.kind()) {
    case TermKind::Down:
      return strip_downs(t.body());
    case TermKind::VarSub:
    case TermKind::Up:
      return with_child(t, 0, strip_downs(t.body()));
    case TermKind::App:
      return Term::app(strip_downs(t.fun()), strip_downs(t.arg()), RefSubst{}, t.pos());
    case TermKind::Par: {
      std::vector<Term> kids;
      for (const auto& k : t.children()) kids.push_back(strip_downs(k));
      return Term::par(std::move(kids), t.pos());
    }
    default:
      return t;
  }
}

struct Layer {
  bool down = true;
  RefSubst refs;
  VarSubst sigma;
};

RefSubst canonical_values(const RefSubst& v) {
  RefSubst::Map m;
  for (const auto& [ref, values] : v.entries()) {
    auto& out = m[ref];
    for (const auto& x : values) out.push_back(alpha_canonicalize(x));
  }
  return RefSubst(std::move(m));
}

RefSubst layered(const std::vector<Layer>& ctx, const RefSubst& innermost) {
  RefSubst acc = innermost;
  for (auto it = ctx.rbegin(); it != ctx.rend(); ++it)
    acc = it->down ? juxtapose_ref_substs(it->refs, acc) : meta_apply_ref_subst(it->sigma, acc);
  return canonical_values(acc);
}

void collect_occurrences(const Term& t, Path& path, std::vector<Occurrence>& out) {
  switch (t.kind()) {
    case TermKind::Get:
      out.push_back(Occurrence{path, OccurrenceKind::Get, t.name()});
      return;
    case TermKind::App:
      out.push_back(Occurrence{path, OccurrenceKind::App, {}});
      break;
    case TermKind::VarSub:
    case TermKind::Down:
    case TermKind::Up:
    case TermKind::Par:
      break;
    default:
      return;
  }
  for (std::uint32_t i = 0; i < t.child_count(); ++i) {
    path.push_back(i);
    collect_occurrences(t.child(i), path, out);
    path.pop_back();
  }
}

}  // namespace

Term skeleton(const Term& t) { return alpha_canonicalize(strip_downs(t)); }

std::vector<Occurrence> occurrences(const Term& t) {
  std::vector<Occurrence> out;
  Path path;
  collect_occurrences(t, path, out);
  return out;
}

RefSubst reach(const Term& t, const Occurrence& o) {
  std::vector<Layer> ctx;
  const Term* at = &t;
  for (auto i : o.path) {
    switch (at->kind()) {
      case TermKind::Down:
        ctx.push_back(Layer{true, at->refs(), {}});
        break;
      case TermKind::VarSub:
        ctx.push_back(Layer{false, {}, to_var_subst(at->bindings())});
        break;
      case TermKind::App:
      case TermKind::Up:
      case TermKind::Par:
        break;
      default:
        throw UsageError("occurrence path crosses " + print(*at));
    }
    if (i >= at->child_count()) throw UsageError("occurrence path out of range");
    at = &at->child(i);
  }
  const bool fits = o.kind == OccurrenceKind::Get
                        ? at->kind() == TermKind::Get && at->name() == o.ref
                        : at->kind() == TermKind::App;
  if (!fits) throw UsageError("occurrence does not address a " +
                              std::string(o.kind == OccurrenceKind::Get ? "read" : "application"));
  return layered(ctx, {});
}

// ---------------------------------------------------------------------------
// Preorders

namespace {

class PreorderMatcher {
 public:
  PreorderMatcher(const RefSubst* bound, BoundReading reading) : bound_(bound), reading_(reading) {}

  bool match(const Term& a0, std::vector<Layer> ca, const Term& b0, std::vector<Layer> cb,
             std::size_t level) {
    const Term* a = &a0;
    const Term* b = &b0;
    while (a->kind() == TermKind::Down) {
      ca.push_back(Layer{true, a->refs(), {}});
      a = &a->body();
    }
    while (b->kind() == TermKind::Down) {
      cb.push_back(Layer{true, b->refs(), {}});
      b = &b->body();
    }
    if (a->kind() != b->kind()) return false;
    switch (a->kind()) {
      case TermKind::Get:
        return a->name() == b->name() && within(layered(ca, {}), layered(cb, {}));
      case TermKind::App: {
        bool ok;
        if (reading_ == BoundReading::Literal && bound_) {
          ok = within(layered(ca, b->refs()), layered(cb, a->refs()));
        } else {
          ok = within(layered(ca, a->refs()), layered(cb, b->refs()));
        }
        return ok && match(a->fun(), ca, b->fun(), cb, level) &&
               match(a->arg(), ca, b->arg(), cb, level);
      }
      case TermKind::Up:
        return a->refs() == b->refs() && match(a->body(), ca, b->body(), cb, level);
      case TermKind::VarSub:
        return match_var_sub(*a, ca, *b, cb, level);
      case TermKind::Par:
        return match_par(*a, ca, *b, cb, level);
      default:
        return *a == *b;
    }
  }

 private:
  bool within(const RefSubst& lo, const RefSubst& hi) const {
    if (!ref_subst_included(lo, hi)) return false;
    return !bound_ || ref_subst_included(hi, juxtapose_ref_substs(lo, *bound_));
  }

  bool match_var_sub(const Term& a, std::vector<Layer> ca, const Term& b, std::vector<Layer> cb,
                     std::size_t level) {
    const auto& x = a.bindings();
    const auto& y = b.bindings();
    if (x.size() != y.size()) return false;
    const std::size_t k = x.size();
    ca.push_back(Layer{false, {}, to_var_subst(x)});
    std::vector<std::size_t> perm(k);
    for (std::size_t i = 0; i < k; ++i) perm[i] = i;
    do {
      bool ok = true;
      for (std::size_t i = 0; i < k && ok; ++i) ok = x[i].value == y[perm[i]].value;
      if (!ok) continue;
      // rename b's binders after their partners in a
      Term body = b.body();
      std::vector<VarBinding> renamed(k);
      for (std::size_t i = 0; i < k; ++i) body = rename_free(body, y[perm[i]].name, "%" + x[i].name);
      for (std::size_t i = 0; i < k; ++i) {
        body = rename_free(body, "%" + x[i].name, x[i].name);
        renamed[i] = VarBinding{x[i].name, y[perm[i]].value, {}};
      }
      auto cb2 = cb;
      cb2.push_back(Layer{false, {}, to_var_subst(renamed)});
      if (match(a.body(), ca, body, cb2, level + k)) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
  }

  struct Leaf {
    Term term;
    std::vector<Layer> ctx;
    Term shape;
  };

  void leaves(const Term& t, std::vector<Layer> ctx, std::size_t level, std::vector<Leaf>& out) {
    const Term* at = &t;
    while (at->kind() == TermKind::Down) {
      ctx.push_back(Layer{true, at->refs(), {}});
      at = &at->body();
    }
    if (at->kind() == TermKind::Par) {
      for (const auto& k : at->children()) leaves(k, ctx, level, out);
      return;
    }
    out.push_back(Leaf{*at, std::move(ctx), alpha_canonicalize(strip_downs(*at), level)});
  }

  bool match_par(const Term& a, const std::vector<Layer>& ca, const Term& b,
                 const std::vector<Layer>& cb, std::size_t level) {
    std::vector<Leaf> la, lb;
    leaves(a, ca, level, la);
    leaves(b, cb, level, lb);
    if (la.size() != lb.size()) return false;
    std::vector<bool> used(lb.size(), false);
    std::function<bool(std::size_t)> go = [&](std::size_t i) {
      if (i == la.size()) return true;
      for (std::size_t j = 0; j < lb.size(); ++j) {
        if (used[j] || !(la[i].shape == lb[j].shape)) continue;
        if (!match(la[i].term, la[i].ctx, lb[j].term, lb[j].ctx, level)) continue;
        used[j] = true;
        if (go(i + 1)) return true;
        used[j] = false;
      }
      return false;
    };
    return go(0);
  }

  const RefSubst* bound_;
  BoundReading reading_;
};

bool preorder_impl(const Term& m, const Term& n, const RefSubst* bound, BoundReading reading) {
  Term a = alpha_canonicalize(m);
  Term b = alpha_canonicalize(n);
  if (!(skeleton(a) == skeleton(b))) return false;
  PreorderMatcher matcher(bound, reading);
  return matcher.match(a, {}, b, {}, 0);
}

}  // namespace

bool preorder_leq(const Term& m, const Term& n) {
  return preorder_impl(m, n, nullptr, BoundReading::Symmetric);
}

bool preorder_bounded(const Term& m, const Term& n, const RefSubst& bound, BoundReading reading) {
  return preorder_impl(m, n, &bound, reading);
}

Report check_simulation_preorder(const Term& m, const Term& n, SearchLimits limits) {
  Report rep;
  rep.name = "simulation-preorder";
  if (!preorder_leq(m, n)) {
    rep.fail("precondition: " + print(m) + " is not below " + print(n));
    return rep;
  }
  // One breadth-first search from n serves every reduct of m.
  struct Goal {
    Term term;
    Term shape;
    bool found = false;
  };
  std::vector<Goal> goals;
  for (auto& m1 : successors_nd(m)) {
    Term shape = skeleton(m1);
    goals.push_back(Goal{std::move(m1), std::move(shape)});
  }
  rep.checked = goals.size();
  std::size_t open = goals.size();
  auto visit = [&](const Term& state) {
    const Term shape = skeleton(state);
    PreorderMatcher matcher(nullptr, BoundReading::Symmetric);
    for (auto& g : goals)
      if (!g.found && g.shape == shape && matcher.match(g.term, {}, state, {}, 0)) {
        g.found = true;
        --open;
      }
  };
  const Term start = alpha_canonicalize(n);
  std::unordered_map<Term, std::size_t, TermHash> depth{{start, 0}};
  std::deque<Term> queue{start};
  visit(start);
  bool cut = false;
  while (open > 0 && !queue.empty()) {
    Term cur = std::move(queue.front());
    queue.pop_front();
    const std::size_t d = depth[cur];
    if (d >= limits.depth) {
      cut = true;
      continue;
    }
    for (auto& next : successors_nd(cur)) {
      if (depth.count(next)) continue;
      if (depth.size() >= limits.max_states) {
        cut = true;
        break;
      }
      depth.emplace(next, d + 1);
      visit(next);
      queue.push_back(std::move(next));
      if (open == 0) break;
    }
  }
  for (const auto& g : goals) {
    if (g.found) continue;
    if (cut) rep.truncated = true;
    rep.fail("reduct " + print(g.term) + " of " + print(m) + " unmatched from " + print(n));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Local confluence

namespace {

bool overlapping(const RedexSite& a, const RedexSite& b) {
  if (a.summand != b.summand) return false;
  const Path& p = a.path.size() <= b.path.size() ? a.path : b.path;
  const Path& q = a.path.size() <= b.path.size() ? b.path : a.path;
  return std::equal(p.begin(), p.end(), q.begin());
}

std::string describe(const RedexSite& s) {
  return std::string(rule_name(s.tag)) + "@" + std::to_string(s.summand) + ":" + print(s.path);
}

enum class JoinResult { Joined, Separate, Truncated };

JoinResult join(const Sum& x, const Sum& y, const ConfluenceOptions& o) {
  // cheap attempt: leftmost runs from both sides
  auto visited = [&](const Sum& s) {
    std::unordered_set<Sum, SumHash> out{s};
    Trace t = run(s, Strategy::Leftmost, 0, o.join_budget);
    for (const auto& st : t.steps) out.insert(st.result);
    return out;
  };
  auto vx = visited(x);
  for (const auto& s : visited(y))
    if (vx.count(s)) return JoinResult::Joined;

  struct Side {
    std::unordered_map<Sum, std::size_t, SumHash> depth;
    std::deque<Sum> queue;
    bool cut = false;
  };
  Side a, b;
  a.depth.emplace(x, 0);
  a.queue.push_back(x);
  b.depth.emplace(y, 0);
  b.queue.push_back(y);
  auto expand = [&](Side& me, const Side& other) {
    const std::size_t layer = me.depth[me.queue.front()];
    while (!me.queue.empty() && me.depth[me.queue.front()] == layer) {
      Sum cur = std::move(me.queue.front());
      me.queue.pop_front();
      if (layer >= o.join_budget) {
        me.cut = true;
        continue;
      }
      for (auto& next : successors_full(cur)) {
        if (me.depth.count(next)) continue;
        if (other.depth.count(next)) return true;
        if (me.depth.size() >= o.max_join_states) {
          me.cut = true;
          return false;
        }
        me.depth.emplace(next, layer + 1);
        me.queue.push_back(std::move(next));
      }
    }
    return false;
  };
  while (!a.queue.empty() || !b.queue.empty()) {
    if (!a.queue.empty() && expand(a, b)) return JoinResult::Joined;
    if (!b.queue.empty() && expand(b, a)) return JoinResult::Joined;
    if ((a.cut && a.depth.size() >= o.max_join_states) ||
        (b.cut && b.depth.size() >= o.max_join_states))
      break;
  }
  return a.cut || b.cut ? JoinResult::Truncated : JoinResult::Separate;
}

}  // namespace

Report check_local_confluence(const Sum& s, ConfluenceOptions options) {
  Report rep;
  rep.name = "local-confluence";
  GraphLimits limits;
  limits.max_states = std::max<std::size_t>(options.max_sources, 1);
  ReductionGraph g = reduction_graph(s, Mode::Full, limits);
  std::size_t disjoint = 0, overlap = 0, sources = 0;
  for (std::size_t k = 0; k < g.nodes.size() && sources < options.max_sources; ++k) {
    if (g.status[k] == NodeStatus::Truncated) continue;
    ++sources;
    const Sum& src = g.nodes[k];
    std::vector<Step> distinct;
    for (auto& st : steps(src, Mode::Full)) {
      bool seen = false;
      for (const auto& d : distinct) seen = seen || d.result == st.result;
      if (!seen) distinct.push_back(std::move(st));
    }
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      for (std::size_t j = i + 1; j < distinct.size(); ++j) {
        ++rep.checked;
        const bool ov = overlapping(distinct[i].site, distinct[j].site);
        ++(ov ? overlap : disjoint);
        JoinResult r = join(distinct[i].result, distinct[j].result, options);
        if (r == JoinResult::Joined) continue;
        if (r == JoinResult::Truncated) rep.truncated = true;
        rep.fail(std::string(ov ? "overlapping" : "disjoint") + " pair " +
                 describe(distinct[i].site) + " / " + describe(distinct[j].site) + " from " +
                 print(src) + (r == JoinResult::Truncated ? " (search truncated)" : " not joined"));
      }
    }
  }
  if (!g.complete && sources >= options.max_sources)
    rep.notes.push_back("checked the first " + std::to_string(sources) + " states only");
  rep.notes.push_back("divergent pairs: " + std::to_string(rep.checked) + " (disjoint " +
                      std::to_string(disjoint) + ", overlapping " + std::to_string(overlap) + ")");
  return rep;
}

// ---------------------------------------------------------------------------
// Environment game

EnvDirective EnvDirective::internal(std::size_t choice, std::optional<RuleTag> rule) {
  EnvDirective d;
  d.kind = Kind::Internal;
  d.choice = choice;
  d.rule = rule;
  return d;
}

EnvDirective EnvDirective::absorb() {
  EnvDirective d;
  d.kind = Kind::Absorb;
  return d;
}

EnvDirective EnvDirective::inject() {
  EnvDirective d;
  d.kind = Kind::Inject;
  return d;
}

std::string print(const EnvDirective& d) {
  switch (d.kind) {
    case EnvDirective::Kind::Absorb: return "absorb";
    case EnvDirective::Kind::Inject: return "inject";
    case EnvDirective::Kind::Internal: break;
  }
  std::string s = "internal";
  if (d.rule) s += std::string(" ") + rule_name(*d.rule);
  return s + " #" + std::to_string(d.choice);
}

ScheduleError::ScheduleError(std::size_t step, const std::string& message)
    : std::runtime_error("schedule step " + std::to_string(step) + ": " + message), step_(step) {}

EnvTrace env_reduce(const Term& m, const EnvSchedule& schedule) {
  EnvTrace trace;
  trace.states.push_back(alpha_canonicalize(m));
  std::size_t next_subst = 0;
  for (std::size_t i = 0; i < schedule.directives.size(); ++i) {
    const EnvDirective& d = schedule.directives[i];
    const Term& cur = trace.states.back();
    Term next;
    switch (d.kind) {
      case EnvDirective::Kind::Absorb:
        if (cur.kind() != TermKind::Up) throw ScheduleError(i, "absorb on " + print(cur));
        trace.emitted.push_back(cur.refs());
        next = cur.body();
        break;
      case EnvDirective::Kind::Inject:
        if (next_subst >= schedule.substs.size())
          throw ScheduleError(i, "no substitution left to inject");
        next = alpha_canonicalize(Term::down(schedule.substs[next_subst++], cur));
        break;
      case EnvDirective::Kind::Internal: {
        Sum s(cur);
        std::vector<RedexSite> sites;
        for (auto& site : decompose(s, Mode::Nd))
          if (!d.rule || site.tag == *d.rule) sites.push_back(std::move(site));
        if (d.choice >= sites.size())
          throw ScheduleError(i, "no internal step " + print(d) + " from " + print(cur));
        next = apply(s, sites[d.choice]).only();
        break;
      }
    }
    trace.steps.push_back(d);
    trace.states.push_back(std::move(next));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Well-behavedness probe

namespace {

struct Move {
  enum Kind { Internal, Absorb, Inject } kind;
  Term next;
  const RefSubst* emitted = nullptr;
};

std::vector<Move> moves(const Term& t, std::size_t injected, const std::vector<RefSubst>& substs) {
  std::vector<Move> out;
  for (auto& n : successors_nd(t)) out.push_back(Move{Move::Internal, std::move(n)});
  if (t.kind() == TermKind::Up) out.push_back(Move{Move::Absorb, t.body(), &t.refs()});
  if (injected < substs.size())
    out.push_back(Move{Move::Inject, alpha_canonicalize(Term::down(substs[injected], t))});
  return out;
}

void record(const RefSubst& u, std::set<Term>& values) {
  for (const auto& [ref, vs] : u.entries())
    for (const auto& v : vs) values.insert(alpha_canonicalize(v));
}

struct StateKey {
  Term term;
  std::size_t injected;
  friend bool operator==(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const { return k.term.hash() * 31 + k.injected; }
};

class Exhaustive {
 public:
  Exhaustive(const std::vector<RefSubst>& substs, std::size_t cap, std::set<Term>& values)
      : substs_(substs), cap_(cap), values_(values) {}

  // Maximum number of absorbs along any schedule from the state.
  std::optional<std::size_t> longest(const StateKey& k) {
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    if (on_stack_.count(k)) {
      cyclic_ = true;
      return std::nullopt;
    }
    if (memo_.size() + on_stack_.size() >= cap_) {
      capped_ = true;
      return std::nullopt;
    }
    on_stack_.insert(k);
    std::size_t best = 0;
    bool ok = true;
    for (auto& mv : moves(k.term, k.injected, substs_)) {
      if (mv.emitted) record(*mv.emitted, values_);
      StateKey nk{mv.next, k.injected + (mv.kind == Move::Inject ? 1 : 0)};
      auto r = longest(nk);
      if (!r) {
        ok = false;
        break;
      }
      best = std::max(best, *r + (mv.kind == Move::Absorb ? 1 : 0));
    }
    on_stack_.erase(k);
    if (!ok) return std::nullopt;
    memo_.emplace(k, best);
    return best;
  }

  bool cyclic() const { return cyclic_; }

 private:
  const std::vector<RefSubst>& substs_;
  std::size_t cap_;
  std::set<Term>& values_;
  std::unordered_map<StateKey, std::size_t, StateKeyHash> memo_;
  std::unordered_set<StateKey, StateKeyHash> on_stack_;
  bool cyclic_ = false;
  bool capped_ = false;
};

}  // namespace

Report ProbeResult::report() const {
  Report rep;
  rep.name = "well-behaved";
  rep.checked = samples;
  rep.truncated = truncated;
  rep.notes.push_back("max upward emissions: " + std::to_string(max_upward_emissions));
  std::string vs;
  for (const auto& v : emitted_values) vs += (vs.empty() ? "" : ", ") + print(v);
  rep.notes.push_back("emitted values: {" + vs + "}");
  rep.notes.push_back(exhaustive ? "all schedules explored" : "sampled schedules only");
  if (unbounded) rep.fail("a schedule revisits a state: emissions may be unbounded");
  return rep;
}

ProbeResult well_behaved_probe(const Term& m, const std::vector<RefSubst>& substs,
                               ProbeOptions options) {
  ProbeResult res;
  std::set<Term> values;
  const Term start = alpha_canonicalize(m);
  std::mt19937_64 rng(options.seed);
  for (std::size_t s = 0; s < options.samples; ++s) {
    Term cur = start;
    std::size_t injected = 0, absorbed = 0, n = 0;
    for (; n < options.step_budget; ++n) {
      auto mv = moves(cur, injected, substs);
      if (mv.empty()) break;
      std::uniform_int_distribution<std::size_t> dist(0, mv.size() - 1);
      Move& pick = mv[dist(rng)];
      if (pick.kind == Move::Absorb) {
        ++absorbed;
        record(*pick.emitted, values);
      }
      if (pick.kind == Move::Inject) ++injected;
      cur = std::move(pick.next);
    }
    if (n == options.step_budget && !moves(cur, injected, substs).empty()) res.truncated = true;
    res.max_upward_emissions = std::max(res.max_upward_emissions, absorbed);
    ++res.samples;
  }
  if (options.exhaustive_states > 0) {
    Exhaustive ex(substs, options.exhaustive_states, values);
    if (auto best = ex.longest(StateKey{start, 0})) {
      res.exhaustive = true;
      res.max_upward_emissions = std::max(res.max_upward_emissions, *best);
    } else if (ex.cyclic()) {
      res.unbounded = true;
    }
  }
  res.emitted_values.assign(values.begin(), values.end());
  return res;
}

}  // namespace lces
