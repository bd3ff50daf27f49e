#include "lces/typing.hpp"

#include <algorithm>
#include <functional>

#include "lces/printer.hpp"

namespace lces {

std::string print(const Judgment& j) {
  return "(" + print(j.type) + ", {" + print(j.effect) + "})";
}

const char* type_error_kind_name(TypeErrorKind k) {
  switch (k) {
    case TypeErrorKind::Stratification: return "stratification";
    case TypeErrorKind::Mismatch: return "mismatch";
    case TypeErrorKind::NotAFunction: return "not-a-function";
    case TypeErrorKind::UnboundReference: return "unbound-reference";
    case TypeErrorKind::UnboundVariable: return "unbound-variable";
    case TypeErrorKind::BehaviorInDomain: return "behavior-in-domain";
    case TypeErrorKind::IllFormedType: return "ill-formed-type";
    case TypeErrorKind::EmptySum: return "empty-sum";
    case TypeErrorKind::NoJoin: return "no-join";
  }
  return "?";
}

TypeError::TypeError(TypeErrorKind kind, std::string rule, std::string message, SourcePos pos)
    : std::runtime_error(rule + ": " + message),
      kind_(kind),
      rule_(std::move(rule)),
      message_(std::move(message)),
      pos_(pos) {}

// ---------------------------------------------------------------------------
// Well-formedness

const Type* lookup_ref(const RefContext& refs, const std::string& r) {
  for (const auto& [name, type] : refs)
    if (name == r) return &type;
  return nullptr;
}

namespace {

bool in_domain(const RefContext& refs, const std::string& r) { return lookup_ref(refs, r) != nullptr; }

bool effect_in_domain(const RefContext& refs, const Effect& e) {
  return std::all_of(e.begin(), e.end(), [&](const std::string& r) { return in_domain(refs, r); });
}

// First reference mentioned by `t` that is missing from `refs`, or "" when
// the type is well formed; `defect` receives a description otherwise.
std::string first_missing(const RefContext& refs, const Type& t, std::string& defect) {
  switch (t.kind()) {
    case TypeKind::Unit:
    case TypeKind::Behavior:
      return {};
    case TypeKind::Arrow: {
      if (t.domain().kind() == TypeKind::Behavior) {
        defect = "B in the domain of a function";
        return {};
      }
      if (auto m = first_missing(refs, t.domain(), defect); !m.empty() || !defect.empty()) return m;
      for (const auto& r : t.effect())
        if (!in_domain(refs, r)) return r;
      return first_missing(refs, t.codomain(), defect);
    }
    case TypeKind::Ref: {
      const Type* declared = lookup_ref(refs, t.ref_name());
      if (!declared) return t.ref_name();
      if (!(*declared == t.content())) {
        defect = "Ref " + t.ref_name() + " content differs from its declaration";
        return {};
      }
      return {};
    }
  }
  return {};
}

}  // namespace

std::optional<StratificationError> check_stratification(const RefContext& refs) {
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& [name, type] = refs[i];
    RefContext prefix(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(i));
    StratificationError err;
    err.index = i;
    err.ref = name;
    if (lookup_ref(prefix, name)) {
      err.message = "reference '" + name + "' declared twice";
      return err;
    }
    if (type.kind() == TypeKind::Behavior) {
      err.message = "reference '" + name + "' cannot hold a behavior";
      return err;
    }
    std::string defect;
    std::string missing = first_missing(prefix, type, defect);
    if (!missing.empty()) {
      err.missing = missing;
      err.message = "type of '" + name + "' mentions '" + missing +
                    "', which is not declared before it";
      return err;
    }
    if (!defect.empty()) {
      err.message = "type of '" + name + "': " + defect;
      return err;
    }
  }
  return std::nullopt;
}

bool well_formed(const RefContext& refs, const Type& t, const Effect& e) {
  std::string defect;
  return effect_in_domain(refs, e) && first_missing(refs, t, defect).empty() && defect.empty();
}

// ---------------------------------------------------------------------------
// Subtyping

bool subtype(const RefContext& refs, const Type& lhs, const Type& rhs) {
  if (lhs == rhs) return true;
  if (lhs.kind() != TypeKind::Arrow || rhs.kind() != TypeKind::Arrow) return false;
  return subtype(refs, rhs.domain(), lhs.domain()) &&
         subtype(refs, Judgment{lhs.codomain(), lhs.effect()},
                 Judgment{rhs.codomain(), rhs.effect()});
}

bool subtype(const RefContext& refs, const Judgment& lhs, const Judgment& rhs) {
  return std::includes(rhs.effect.begin(), rhs.effect.end(), lhs.effect.begin(),
                       lhs.effect.end()) &&
         effect_in_domain(refs, rhs.effect) && subtype(refs, lhs.type, rhs.type);
}

std::optional<Type> join_types(const Type& a, const Type& b) {
  if (a == b) return a;
  if (a.kind() != TypeKind::Arrow || b.kind() != TypeKind::Arrow) return std::nullopt;
  auto dom = meet_types(a.domain(), b.domain());
  auto cod = join_types(a.codomain(), b.codomain());
  if (!dom || !cod) return std::nullopt;
  Effect e = a.effect();
  e.insert(b.effect().begin(), b.effect().end());
  return Type::arrow(*dom, std::move(e), *cod);
}

std::optional<Type> meet_types(const Type& a, const Type& b) {
  if (a == b) return a;
  if (a.kind() != TypeKind::Arrow || b.kind() != TypeKind::Arrow) return std::nullopt;
  auto dom = join_types(a.domain(), b.domain());
  auto cod = meet_types(a.codomain(), b.codomain());
  if (!dom || !cod) return std::nullopt;
  Effect e;
  std::set_intersection(a.effect().begin(), a.effect().end(), b.effect().begin(),
                        b.effect().end(), std::inserter(e, e.end()));
  return Type::arrow(*dom, std::move(e), *cod);
}

// ---------------------------------------------------------------------------
// Inference

namespace {

class Inferrer {
 public:
  explicit Inferrer(const RefContext& refs) : refs_(refs) {}

  Judgment infer(const VarContext& gamma, const Term& t) {
    switch (t.kind()) {
      case TermKind::Var: {
        auto it = gamma.find(t.name());
        if (it == gamma.end())
          throw TypeError(TypeErrorKind::UnboundVariable, "var",
                          "unbound variable '" + t.name() + "'", t.pos());
        return {it->second, {}};
      }
      case TermKind::Unit:
        return {Type::unit(), {}};
      case TermKind::Lam: {
        const Type& a = t.annotation();
        if (a.kind() == TypeKind::Behavior)
          throw TypeError(TypeErrorKind::BehaviorInDomain, "lam",
                          "B cannot be the type of a λ-bound variable", t.pos());
        if (!well_formed(refs_, a))
          throw TypeError(TypeErrorKind::IllFormedType, "lam",
                          "annotation " + print(a) + " is not well formed", t.pos());
        VarContext inner = gamma;
        inner[t.name()] = a;
        Judgment body = infer(inner, t.body());
        return {Type::arrow(a, body.effect, body.type), {}};
      }
      case TermKind::App: {
        Judgment f = infer(gamma, t.fun());
        if (f.type.kind() != TypeKind::Arrow)
          throw TypeError(TypeErrorKind::NotAFunction, "app",
                          "applied term has type " + print(f.type), t.pos());
        Judgment a = infer(gamma, t.arg());
        if (!subtype(refs_, a.type, f.type.domain()))
          throw TypeError(TypeErrorKind::Mismatch, "app",
                          "argument of type " + print(a.type) + " where " +
                              print(f.type.domain()) + " is expected",
                          t.arg().pos());
        check_refs(gamma, t.refs(), t.pos());
        Effect e = f.type.effect();
        e.insert(f.effect.begin(), f.effect.end());
        e.insert(a.effect.begin(), a.effect.end());
        for (const auto& [r, vs] : t.refs().entries()) e.insert(r);
        return {f.type.codomain(), std::move(e)};
      }
      case TermKind::Get: {
        const Type* a = lookup_ref(refs_, t.name());
        if (!a)
          throw TypeError(TypeErrorKind::UnboundReference, "get",
                          "reference '" + t.name() + "' is not declared", t.pos());
        return {*a, {t.name()}};
      }
      case TermKind::VarSub: {
        VarContext inner = gamma;
        for (const auto& b : t.bindings()) inner[b.name] = infer(gamma, b.value).type;
        return infer(inner, t.body());
      }
      case TermKind::Down:
      case TermKind::Up: {
        Judgment body = infer(gamma, t.body());
        check_refs(gamma, t.refs(), t.pos());
        for (const auto& [r, vs] : t.refs().entries()) body.effect.insert(r);
        return body;
      }
      case TermKind::Par: {
        Judgment j{Type::behavior(), {}};
        for (const auto& k : t.children()) {
          Judgment c = infer(gamma, k);
          j.effect.insert(c.effect.begin(), c.effect.end());
        }
        return j;
      }
    }
    throw UsageError("unknown term kind");
  }

 private:
  void check_refs(const VarContext& gamma, const RefSubst& v, SourcePos pos) {
    for (const auto& [r, values] : v.entries()) {
      const Type* a = lookup_ref(refs_, r);
      if (!a)
        throw TypeError(TypeErrorKind::UnboundReference, "subst-r",
                        "reference '" + r + "' is not declared", pos);
      for (const auto& value : values) {
        Judgment j = infer(gamma, value);
        if (!subtype(refs_, j.type, *a))
          throw TypeError(TypeErrorKind::Mismatch, "subst-r",
                          "value of type " + print(j.type) + " stored in '" + r + "' : " +
                              print(*a),
                          value.pos().line ? value.pos() : pos);
      }
    }
  }

  const RefContext& refs_;
};

}  // namespace

Judgment infer(const RefContext& refs, const VarContext& gamma, const Term& t) {
  Inferrer inf(refs);
  return inf.infer(gamma, t);
}

Judgment infer(const RefContext& refs, const VarContext& gamma, const Sum& s) {
  if (s.is_zero()) throw TypeError(TypeErrorKind::EmptySum, "sum", "the empty sum has no type");
  Inferrer inf(refs);
  std::optional<Judgment> acc;
  for (const auto& t : s.summands()) {
    Judgment j = inf.infer(gamma, t);
    if (!acc) {
      acc = j;
      continue;
    }
    auto joined = join_types(acc->type, j.type);
    if (!joined)
      throw TypeError(TypeErrorKind::NoJoin, "sum",
                      "summands of types " + print(acc->type) + " and " + print(j.type) +
                          " have no common supertype",
                      t.pos());
    acc->type = *joined;
    acc->effect.insert(j.effect.begin(), j.effect.end());
  }
  return *acc;
}

Judgment infer(const RefContext& refs, const Sum& s) { return infer(refs, VarContext{}, s); }

// ---------------------------------------------------------------------------
// Metatheory checks

Report check_subject_reduction(const RefContext& refs, const Sum& s, Mode mode,
                               GraphLimits limits) {
  Report rep;
  rep.name = "subject-reduction";
  Judgment root;
  try {
    root = infer(refs, canonicalize(s));
  } catch (const TypeError& e) {
    rep.fail(std::string("initial term is not typable: ") + e.what());
    return rep;
  }
  rep.notes.push_back("initial judgment " + print(root));
  ReductionGraph g = reduction_graph(s, mode, limits);
  rep.truncated = !g.complete;
  std::vector<std::optional<Judgment>> types(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    try {
      types[i] = infer(refs, g.nodes[i]);
    } catch (const TypeError& e) {
      rep.fail("state not typable: " + truncate(print(g.nodes[i]), 120) + ": " + e.what());
      continue;
    }
    if (!subtype(refs, *types[i], root))
      rep.fail("state " + truncate(print(g.nodes[i]), 120) + " has " + print(*types[i]) +
               ", not below " + print(root));
  }
  for (const auto& e : g.edges) {
    ++rep.checked;
    if (!types[e.from] || !types[e.to]) continue;
    if (!subtype(refs, *types[e.to], *types[e.from]))
      rep.fail(std::string(rule_name(e.tag)) + " step from " +
               truncate(print(g.nodes[e.from]), 80) + " raises " + print(*types[e.from]) +
               " to " + print(*types[e.to]));
  }
  return rep;
}

bool is_stuck_leaf(const Term& t) {
  if (t.kind() == TermKind::Get) return true;
  if (t.kind() != TermKind::App) return false;
  const Term& f = t.fun();
  const Term& a = t.arg();
  bool fs = is_stuck_leaf(f), as = is_stuck_leaf(a);
  return (fs && a.is_value()) || (f.is_value() && as) || (fs && as);
}

Report check_progress(const RefContext& refs, const Sum& s) {
  Report rep;
  rep.name = "progress";
  Sum c = canonicalize(s);
  try {
    Judgment j = infer(refs, c);
    if (j.type.kind() == TypeKind::Behavior)
      rep.notes.push_back("term has type B; progress is stated for A-types, checked per thread");
  } catch (const TypeError& e) {
    rep.fail(std::string("term is not typable: ") + e.what());
    return rep;
  }
  if (!decompose(c).empty()) rep.fail("term is not a normal form: " + truncate(print(c), 120));
  if (!free_names(c).variables.empty()) rep.notes.push_back("term has free variables");
  for (const auto& summand : c.summands()) {
    std::vector<Term> leaves;
    if (summand.kind() == TermKind::Par) {
      leaves = summand.children();
    } else {
      leaves.push_back(summand);
    }
    for (const auto& leaf : leaves) {
      ++rep.checked;
      if (!leaf.is_value() && !is_stuck_leaf(leaf))
        rep.fail("thread is neither a value nor a stuck read: " + truncate(print(leaf), 120));
    }
  }
  return rep;
}

}  // namespace lces
