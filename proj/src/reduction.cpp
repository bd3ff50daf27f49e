#include "lces/reduction.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "lces/printer.hpp"

namespace lces {

namespace {

constexpr RuleTag kAllRules[] = {
    RuleTag::BetaV,        RuleTag::Subst_Var,   RuleTag::Subst_Unit,     RuleTag::Subst_App,
    RuleTag::Subst_Lam,    RuleTag::Subst_Get,   RuleTag::Subst_Par,      RuleTag::Subst_SubstR,
    RuleTag::Subst_SubstRUp, RuleTag::Subst_Merge, RuleTag::RDown_Val,    RuleTag::RDown_Par,
    RuleTag::RDown_SwapUp, RuleTag::RDown_Merge, RuleTag::RDown_App,      RuleTag::RDown_Get,
    RuleTag::RUp_Par,      RuleTag::RUp_LApp,    RuleTag::RUp_RApp,       RuleTag::RUp_Top,
    RuleTag::ND_GetPick,   RuleTag::ND_GetSkip,
};

}  // namespace

const char* rule_name(RuleTag tag) {
  switch (tag) {
    case RuleTag::BetaV: return "BetaV";
    case RuleTag::Subst_Var: return "Subst_Var";
    case RuleTag::Subst_Unit: return "Subst_Unit";
    case RuleTag::Subst_App: return "Subst_App";
    case RuleTag::Subst_Lam: return "Subst_Lam";
    case RuleTag::Subst_Get: return "Subst_Get";
    case RuleTag::Subst_Par: return "Subst_Par";
    case RuleTag::Subst_SubstR: return "Subst_SubstR";
    case RuleTag::Subst_SubstRUp: return "Subst_SubstRUp";
    case RuleTag::Subst_Merge: return "Subst_Merge";
    case RuleTag::RDown_Val: return "RDown_Val";
    case RuleTag::RDown_Par: return "RDown_Par";
    case RuleTag::RDown_SwapUp: return "RDown_SwapUp";
    case RuleTag::RDown_Merge: return "RDown_Merge";
    case RuleTag::RDown_App: return "RDown_App";
    case RuleTag::RDown_Get: return "RDown_Get";
    case RuleTag::RUp_Par: return "RUp_Par";
    case RuleTag::RUp_LApp: return "RUp_LApp";
    case RuleTag::RUp_RApp: return "RUp_RApp";
    case RuleTag::RUp_Top: return "RUp_Top";
    case RuleTag::ND_GetPick: return "ND_GetPick";
    case RuleTag::ND_GetSkip: return "ND_GetSkip";
  }
  return "?";
}

std::optional<RuleTag> rule_from_name(std::string_view name) {
  for (RuleTag t : kAllRules)
    if (name == rule_name(t)) return t;
  return std::nullopt;
}

bool is_down_structural(RuleTag tag) {
  switch (tag) {
    case RuleTag::RDown_Val:
    case RuleTag::RDown_Par:
    case RuleTag::RDown_SwapUp:
    case RuleTag::RDown_Merge:
    case RuleTag::RDown_App:
      return true;
    default:
      return false;
  }
}

std::string print(const Path& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(p[i]);
  }
  return out;
}

const char* status_name(TraceStatus s) {
  switch (s) {
    case TraceStatus::NormalForm: return "NormalForm";
    case TraceStatus::Budget: return "Budget";
    case TraceStatus::Cycle: return "Cycle";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Decomposition

namespace {

std::vector<Term> distinct_values(const std::vector<Term>& sorted) {
  std::vector<Term> out;
  for (const auto& v : sorted)
    if (out.empty() || !(out.back() == v)) out.push_back(v);
  return out;
}

struct Decomposer {
  Mode mode;
  std::size_t summand;
  std::size_t digest;
  std::vector<RedexSite>* out;

  void site(const Term& t, const Path& path, RuleTag tag, bool top = false, std::size_t aux = 0) {
    RedexSite s;
    s.summand = summand;
    s.path = path;
    s.tag = tag;
    s.aux = aux;
    s.top_level = top;
    s.redex = t;
    s.source_digest = digest;
    out->push_back(std::move(s));
  }

  void walk(const Term& t, Path& path, bool in_e, bool root) {
    match(t, path, root, in_e);
    switch (t.kind()) {
      case TermKind::Par:
        if (in_e) return;
        for (std::uint32_t i = 0; i < t.child_count(); ++i) {
          path.push_back(i);
          walk(t.child(i), path, false, false);
          path.pop_back();
        }
        return;
      case TermKind::App:
        for (std::uint32_t i = 0; i < 2; ++i) {
          path.push_back(i);
          walk(t.child(i), path, true, false);
          path.pop_back();
        }
        return;
      case TermKind::Down:
      case TermKind::Up:
        path.push_back(0);
        walk(t.body(), path, true, false);
        path.pop_back();
        return;
      default:
        return;
    }
  }

  void match(const Term& t, const Path& path, bool root, bool in_e) {
    switch (t.kind()) {
      case TermKind::App:
        if (t.fun().kind() == TermKind::Lam && t.arg().is_value()) site(t, path, RuleTag::BetaV);
        if (t.fun().kind() == TermKind::Up) site(t, path, RuleTag::RUp_LApp);
        if (t.arg().kind() == TermKind::Up) site(t, path, RuleTag::RUp_RApp);
        return;
      case TermKind::VarSub:
        switch (t.body().kind()) {
          case TermKind::Var: site(t, path, RuleTag::Subst_Var); return;
          case TermKind::Unit: site(t, path, RuleTag::Subst_Unit); return;
          case TermKind::App: site(t, path, RuleTag::Subst_App); return;
          case TermKind::Lam: site(t, path, RuleTag::Subst_Lam); return;
          case TermKind::Get: site(t, path, RuleTag::Subst_Get); return;
          case TermKind::Par: site(t, path, RuleTag::Subst_Par); return;
          case TermKind::Down: site(t, path, RuleTag::Subst_SubstR); return;
          case TermKind::Up: site(t, path, RuleTag::Subst_SubstRUp); return;
          case TermKind::VarSub: site(t, path, RuleTag::Subst_Merge); return;
        }
        return;
      case TermKind::Down:
        switch (t.body().kind()) {
          case TermKind::Var:
          case TermKind::Unit:
          case TermKind::Lam:
            site(t, path, RuleTag::RDown_Val);
            return;
          case TermKind::Par: site(t, path, RuleTag::RDown_Par); return;
          case TermKind::Up: site(t, path, RuleTag::RDown_SwapUp); return;
          case TermKind::Down: site(t, path, RuleTag::RDown_Merge); return;
          case TermKind::App: site(t, path, RuleTag::RDown_App); return;
          case TermKind::Get:
            if (mode == Mode::Full) {
              site(t, path, RuleTag::RDown_Get, true);
            } else {
              if (const auto* vs = t.refs().find(t.body().name())) {
                auto distinct = distinct_values(*vs);
                for (std::size_t i = 0; i < distinct.size(); ++i)
                  site(t, path, RuleTag::ND_GetPick, false, i);
              }
              site(t, path, RuleTag::ND_GetSkip);
            }
            return;
          case TermKind::VarSub:
            return;
        }
        return;
      case TermKind::Up:
        if (root) site(t, path, RuleTag::RUp_Top, true);
        return;
      case TermKind::Par:
        par_sites(t, path, in_e);
        return;
      default:
        return;
    }
  }

  // Inside E the whole ∥ is the redex; at thread level any sibling subset.
  void par_sites(const Term& t, const Path& path, bool in_e) {
    const auto& kids = t.children();
    const std::size_t n = kids.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (kids[i].kind() != TermKind::Up) continue;
      if (i > 0 && kids[i - 1] == kids[i]) continue;  // identical Up already handled
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others.push_back(j);
      if (others.size() > 62) throw UsageError("parallel composition too wide for RUp_Par");
      // runs of equal siblings: [begin, end) in `others`
      std::vector<std::pair<std::size_t, std::size_t>> runs;
      for (std::size_t a = 0; a < others.size();) {
        std::size_t b = a + 1;
        while (b < others.size() && kids[others[b]] == kids[others[a]]) ++b;
        runs.emplace_back(a, b);
        a = b;
      }
      std::vector<std::size_t> take(runs.size(), 0);
      while (true) {
        std::size_t g = 0;
        while (g < runs.size() && take[g] == runs[g].second - runs[g].first) take[g++] = 0;
        if (g == runs.size()) break;
        ++take[g];
        std::uint64_t mask = 0;
        for (std::size_t r = 0; r < runs.size(); ++r)
          for (std::size_t k = 0; k < take[r]; ++k) mask |= 1ULL << (runs[r].first + k);
        if (in_e && mask != (1ULL << others.size()) - 1) continue;
        RedexSite s;
        s.summand = summand;
        s.path = path;
        s.tag = RuleTag::RUp_Par;
        s.up_child = i;
        s.siblings = mask;
        s.redex = t;
        s.source_digest = digest;
        out->push_back(std::move(s));
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Rewriting

std::vector<VarBinding> compose_bindings(const std::vector<VarBinding>& sigma,
                                         const std::vector<VarBinding>& tau) {
  VarSubst composed = compose_var_substs(to_var_subst(sigma), to_var_subst(tau));
  std::map<std::string, std::string> hints;
  for (const auto& b : tau) hints[b.name] = b.hint;
  for (const auto& b : sigma) hints[b.name] = b.hint;
  std::vector<VarBinding> out;
  for (const auto& [name, value] : composed) out.push_back(VarBinding{name, value, hints[name]});
  return out;
}

Term rewrite_local(const Term& t, const RedexSite& site) {
  switch (site.tag) {
    case RuleTag::BetaV: {
      const Term& lam = t.fun();
      std::string hint = lam.hint().empty() ? lam.name() : lam.hint();
      return Term::down(t.refs(), Term::var_sub({VarBinding{lam.name(), t.arg(), hint}},
                                                lam.body()));
    }
    case RuleTag::Subst_Var: {
      for (const auto& b : t.bindings())
        if (b.name == t.body().name()) return b.value;
      return t.body();
    }
    case RuleTag::Subst_Unit:
    case RuleTag::Subst_Get:
      return t.body();
    case RuleTag::Subst_App: {
      const Term& a = t.body();
      VarSubst sigma = to_var_subst(t.bindings());
      return Term::app(Term::var_sub(t.bindings(), a.fun()), Term::var_sub(t.bindings(), a.arg()),
                       meta_apply_ref_subst(sigma, a.refs()));
    }
    case RuleTag::Subst_Lam: {
      const Term& l = t.body();
      return Term::lam(l.name(), l.annotation(), Term::var_sub(t.bindings(), l.body()), l.hint());
    }
    case RuleTag::Subst_Par: {
      std::vector<Term> kids;
      for (const auto& k : t.body().children()) kids.push_back(Term::var_sub(t.bindings(), k));
      return Term::par(std::move(kids));
    }
    case RuleTag::Subst_SubstR:
    case RuleTag::Subst_SubstRUp: {
      const Term& inner = t.body();
      RefSubst v = meta_apply_ref_subst(to_var_subst(t.bindings()), inner.refs());
      Term body = Term::var_sub(t.bindings(), inner.body());
      return site.tag == RuleTag::Subst_SubstR ? Term::down(std::move(v), std::move(body))
                                               : Term::up(std::move(v), std::move(body));
    }
    case RuleTag::Subst_Merge: {
      const Term& inner = t.body();
      return Term::var_sub(compose_bindings(inner.bindings(), t.bindings()), inner.body());
    }
    case RuleTag::RDown_Val:
      return t.body();
    case RuleTag::RDown_Par: {
      std::vector<Term> kids;
      for (const auto& k : t.body().children()) kids.push_back(Term::down(t.refs(), k));
      return Term::par(std::move(kids));
    }
    case RuleTag::RDown_SwapUp: {
      const Term& up = t.body();
      return Term::up(up.refs(), Term::down(t.refs(), up.body()));
    }
    case RuleTag::RDown_Merge: {
      const Term& inner = t.body();
      return Term::down(juxtapose_ref_substs(inner.refs(), t.refs()), inner.body());
    }
    case RuleTag::RDown_App: {
      const Term& a = t.body();
      return Term::app(Term::down(t.refs(), a.fun()), Term::down(t.refs(), a.arg()),
                       juxtapose_ref_substs(a.refs(), t.refs()));
    }
    case RuleTag::ND_GetPick: {
      const auto* vs = t.refs().find(t.body().name());
      if (!vs) throw UsageError("ND_GetPick on an unbound reference");
      auto distinct = distinct_values(*vs);
      if (site.aux >= distinct.size()) throw UsageError("ND_GetPick choice out of range");
      return distinct[site.aux];
    }
    case RuleTag::ND_GetSkip:
      return t.body();
    case RuleTag::RUp_LApp: {
      const Term& up = t.fun();
      return Term::up(up.refs(), Term::app(up.body(), Term::down(up.refs(), t.arg()),
                                           juxtapose_ref_substs(t.refs(), up.refs())));
    }
    case RuleTag::RUp_RApp: {
      const Term& up = t.arg();
      return Term::up(up.refs(), Term::app(Term::down(up.refs(), t.fun()), up.body(),
                                           juxtapose_ref_substs(t.refs(), up.refs())));
    }
    case RuleTag::RUp_Par: {
      const auto& kids = t.children();
      const Term& up = kids.at(site.up_child);
      std::vector<Term> moved, rest;
      std::size_t bit = 0;
      for (std::size_t j = 0; j < kids.size(); ++j) {
        if (j == site.up_child) continue;
        if (site.siblings & (1ULL << bit)) {
          moved.push_back(kids[j]);
        } else {
          rest.push_back(kids[j]);
        }
        ++bit;
      }
      if (moved.empty()) throw UsageError("RUp_Par site without siblings");
      Term inner = Term::par({up.body(), Term::down(up.refs(), Term::par(std::move(moved)))});
      rest.insert(rest.begin(), Term::up(up.refs(), std::move(inner)));
      return Term::par(std::move(rest));
    }
    case RuleTag::RUp_Top:
      return t.body();
    case RuleTag::RDown_Get:
      break;
  }
  throw UsageError(std::string("rule ") + rule_name(site.tag) + " is not a local rewrite");
}

Sum assemble(const Sum& s, std::size_t skip, std::vector<Term> fresh) {
  std::vector<Term> out;
  out.reserve(s.summands().size() + fresh.size());
  for (std::size_t i = 0; i < s.summands().size(); ++i)
    if (i != skip) out.push_back(s.summands()[i]);
  for (auto& t : fresh) out.push_back(alpha_canonicalize(t));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return Sum(std::move(out));
}

}  // namespace

std::vector<RedexSite> decompose(const Sum& s, Mode mode) {
  if (mode == Mode::Nd && !s.is_simple())
    throw UsageError("non-deterministic reduction applies to simple terms only");
  std::vector<RedexSite> out;
  const std::size_t digest = s.hash();
  for (std::size_t k = 0; k < s.summands().size(); ++k) {
    Decomposer d{mode, k, digest, &out};
    Path path;
    d.walk(s.summands()[k], path, false, true);
  }
  return out;
}

Sum apply(const Sum& s, const RedexSite& site) {
  if (site.source_digest != s.hash() || site.summand >= s.summands().size())
    throw UsageError("stale redex site");
  const Term& root = s.summands()[site.summand];
  const Term* at = &root;
  for (auto i : site.path) {
    if (i >= at->child_count()) throw UsageError("stale redex site");
    at = &at->child(i);
  }
  if (!(*at == site.redex)) throw UsageError("stale redex site");

  if (site.tag == RuleTag::RDown_Get) {
    const Term& get = at->body();
    std::vector<Term> fresh{replace_at(root, site.path, get)};
    if (const auto* vs = at->refs().find(get.name()))
      for (const auto& v : distinct_values(*vs)) fresh.push_back(replace_at(root, site.path, v));
    return assemble(s, site.summand, std::move(fresh));
  }
  return assemble(s, site.summand, {replace_at(root, site.path, rewrite_local(*at, site))});
}

std::vector<Step> steps(const Sum& s, Mode mode) {
  std::vector<Step> out;
  for (auto& site : decompose(s, mode)) {
    Sum r = apply(s, site);
    out.push_back(Step{std::move(site), std::move(r)});
  }
  return out;
}

std::vector<Sum> successors_full(const Sum& s) {
  std::vector<Sum> out;
  for (auto& st : steps(s, Mode::Full)) out.push_back(std::move(st.result));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Term> successors_nd(const Term& t) {
  std::vector<Term> out;
  for (auto& st : steps(Sum(alpha_canonicalize(t)), Mode::Nd)) out.push_back(st.result.only());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Strategies and graphs

Trace run(const Sum& s, Strategy strategy, std::uint64_t seed, std::size_t max_steps, Mode mode) {
  Trace trace;
  trace.initial = canonicalize(s);
  std::unordered_set<Sum, SumHash> seen{trace.initial};
  std::mt19937_64 rng(seed);
  Sum current = trace.initial;
  while (true) {
    auto sites = decompose(current, mode);
    if (sites.empty()) {
      trace.status = TraceStatus::NormalForm;
      return trace;
    }
    if (trace.steps.size() >= max_steps) {
      trace.status = TraceStatus::Budget;
      return trace;
    }
    std::size_t pick = 0;
    if (strategy == Strategy::Random) {
      std::uniform_int_distribution<std::size_t> dist(0, sites.size() - 1);
      pick = dist(rng);
    }
    Sum next = apply(current, sites[pick]);
    trace.steps.push_back(Step{sites[pick], next});
    if (!seen.insert(next).second) {
      trace.status = TraceStatus::Cycle;
      return trace;
    }
    current = std::move(next);
  }
}

std::vector<std::size_t> ReductionGraph::normal_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (status[i] == NodeStatus::Normal) out.push_back(i);
  return out;
}

ReductionGraph reduction_graph(const Sum& s, Mode mode, GraphLimits limits) {
  ReductionGraph g;
  std::unordered_map<Sum, std::size_t, SumHash> index;
  Sum start = canonicalize(s);
  if (mode == Mode::Nd && !start.is_simple())
    throw UsageError("non-deterministic reduction applies to simple terms only");
  g.nodes.push_back(start);
  g.status.push_back(NodeStatus::Truncated);
  g.depth.push_back(0);
  index.emplace(start, 0);
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    std::size_t n = queue.front();
    queue.pop_front();
    if (g.depth[n] >= limits.max_depth) {
      if (!decompose(g.nodes[n], mode).empty()) {
        g.complete = false;
        continue;
      }
    }
    auto out = steps(g.nodes[n], mode);
    if (out.empty()) {
      g.status[n] = NodeStatus::Normal;
      continue;
    }
    bool full = true;
    for (auto& st : out) {
      auto it = index.find(st.result);
      std::size_t target;
      if (it != index.end()) {
        target = it->second;
      } else {
        if (g.nodes.size() >= limits.max_states) {
          full = false;
          continue;
        }
        target = g.nodes.size();
        index.emplace(st.result, target);
        g.nodes.push_back(st.result);
        g.status.push_back(NodeStatus::Truncated);
        g.depth.push_back(g.depth[n] + 1);
        queue.push_back(target);
      }
      g.edges.push_back(GraphEdge{n, target, st.site.tag, st.site.path, st.site.summand});
    }
    if (full) {
      g.status[n] = NodeStatus::Expanded;
    } else {
      g.complete = false;
    }
  }
  return g;
}

NormalForms enumerate_normal_forms(const Sum& s, Mode mode, GraphLimits limits) {
  ReductionGraph g = reduction_graph(s, mode, limits);
  NormalForms nf;
  nf.complete = g.complete;
  nf.states = g.nodes.size();
  for (auto i : g.normal_nodes()) nf.forms.push_back(g.nodes[i]);
  std::sort(nf.forms.begin(), nf.forms.end());
  return nf;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string to_dot(const ReductionGraph& g, std::size_t label_width) {
  std::ostringstream os;
  os << "digraph reductions {\n  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    os << "  n" << i << " [label=\"" << dot_escape(truncate(print(g.nodes[i]), label_width))
       << '"';
    if (g.status[i] == NodeStatus::Normal) os << ", peripheries=2";
    if (g.status[i] == NodeStatus::Truncated) os << ", style=dashed";
    os << "];\n";
  }
  for (const auto& e : g.edges)
    os << "  n" << e.from << " -> n" << e.to << " [label=\"" << rule_name(e.tag) << "\"];\n";
  os << "}\n";
  return os.str();
}

std::string trace_to_jsonl(const Trace& t) {
  std::ostringstream os;
  nlohmann::json first{{"step", 0}, {"rule", nullptr}, {"site_path", nullptr},
                       {"term", print(t.initial)}};
  os << first.dump() << '\n';
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& st = t.steps[i];
    nlohmann::json line{{"step", i + 1},
                        {"rule", rule_name(st.site.tag)},
                        {"site_path", std::to_string(st.site.summand) + ":" + print(st.site.path)},
                        {"term", print(st.result)}};
    os << line.dump() << '\n';
  }
  return os.str();
}

}  // namespace lces
