#include "gen.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "lces/printer.hpp"

namespace lces::testing {

namespace {

std::vector<std::string> keys(const Effect& e) { return {e.begin(), e.end()}; }

Effect domain_of(const RefContext& refs) {
  Effect e;
  for (const auto& [r, t] : refs) e.insert(r);
  return e;
}

}  // namespace

TermGen::TermGen(std::uint64_t seed, GenOptions opts) : rng_(seed), opts_(opts) {}

std::size_t TermGen::below(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
}

bool TermGen::chance(double p) { return std::bernoulli_distribution(p)(rng_); }

std::string TermGen::fresh() { return "x" + std::to_string(counter_++); }

Effect TermGen::subset(const Effect& e) {
  Effect out;
  for (const auto& r : e)
    if (chance(0.4)) out.insert(r);
  return out;
}

Type TermGen::small_type(const Effect& allowed, std::size_t depth) {
  if (depth == 0 || chance(0.6)) return Type::unit();
  Type dom = chance(0.8) ? Type::unit() : Type::arrow(Type::unit(), {}, Type::unit());
  return Type::arrow(dom, subset(allowed), Type::unit());
}

RefContext TermGen::refs() {
  static const char* names[] = {"r", "s", "u", "w"};
  const std::size_t n = 1 + below(std::min<std::size_t>(opts_.max_refs, 4));
  RefContext out;
  Effect earlier;
  for (std::size_t i = 0; i < n; ++i) {
    Type t = chance(0.4) ? Type::unit() : Type::arrow(Type::unit(), subset(earlier), Type::unit());
    out.emplace_back(names[i], t);
    earlier.insert(names[i]);
  }
  return out;
}

Term TermGen::value(const RefContext& refs, const VarContext& gamma, const Type& a,
                    std::size_t depth) {
  std::vector<std::string> vars;
  for (const auto& [x, t] : gamma)
    if (t == a) vars.push_back(x);
  if (!vars.empty() && chance(0.35)) return Term::var(vars[below(vars.size())]);
  if (a.kind() == TypeKind::Unit) return Term::unit();
  if (a.kind() != TypeKind::Arrow) throw UsageError("no values of type " + print(a));
  std::string x = fresh();
  VarContext inner = gamma;
  inner[x] = a.domain();
  Term body = gen(refs, inner, a.codomain(), a.effect(), depth > 0 ? depth - 1 : 0);
  return Term::lam(x, a.domain(), body, "x");
}

Term TermGen::gen(const RefContext& refs, const VarContext& gamma, const Type& t,
                  const Effect& allowed, std::size_t depth) {
  if (t.kind() == TypeKind::Behavior) {
    if (depth > 2 && !allowed.empty() && chance(0.3)) {
      auto rs = keys(allowed);
      const std::string& r = rs[below(rs.size())];
      Term v = value(refs, gamma, *lookup_ref(refs, r), depth - 2);
      Term body = gen(refs, gamma, t, allowed, depth - 1);
      return chance(0.5) ? Term::down(RefSubst::single(r, {v}), body)
                         : Term::up(RefSubst::single(r, {v}), body);
    }
    std::vector<Term> kids;
    const std::size_t n = 2 + below(2);
    for (std::size_t i = 0; i < n; ++i)
      kids.push_back(gen(refs, gamma, small_type(allowed, 1), allowed, depth > 1 ? depth - 1 : 1));
    return Term::par(std::move(kids));
  }
  if (depth <= 1) return value(refs, gamma, t, 0);

  std::vector<std::string> readable;
  for (const auto& r : allowed)
    if (*lookup_ref(refs, r) == t) readable.push_back(r);
  auto rs = keys(allowed);

  enum Choice { Value, Get, App, Down, Up, Sub };
  std::vector<std::pair<Choice, double>> options{{Value, 1.0}, {App, 2.0}, {Sub, 0.6}};
  if (!readable.empty()) options.emplace_back(Get, 1.5);
  if (!rs.empty()) {
    options.emplace_back(Down, 1.5);
    options.emplace_back(Up, 1.0);
  }
  double total = 0;
  for (const auto& o : options) total += o.second;
  double pick = std::uniform_real_distribution<double>(0, total)(rng_);
  Choice c = options.back().first;
  for (const auto& o : options) {
    if (pick < o.second) {
      c = o.first;
      break;
    }
    pick -= o.second;
  }

  switch (c) {
    case Value:
      return value(refs, gamma, t, depth - 1);
    case Get:
      return Term::get(readable[below(readable.size())]);
    case App: {
      Type dom = small_type(allowed, depth - 2);
      Type fun_type = Type::arrow(dom, subset(allowed), t);
      Term fun = gen(refs, gamma, fun_type, allowed, depth - 1);
      Term arg = gen(refs, gamma, dom, allowed, depth - 1);
      RefSubst lsub;
      if (!rs.empty() && chance(0.2)) {
        const std::string& r = rs[below(rs.size())];
        lsub.add(r, value(refs, gamma, *lookup_ref(refs, r), depth - 2));
      }
      return Term::app(fun, arg, lsub);
    }
    case Down:
    case Up: {
      const std::string& r = rs[below(rs.size())];
      RefSubst v;
      v.add(r, value(refs, gamma, *lookup_ref(refs, r), depth - 2));
      if (chance(0.25)) v.add(r, value(refs, gamma, *lookup_ref(refs, r), depth - 2));
      Term body = gen(refs, gamma, t, allowed, depth - 1);
      return c == Down ? Term::down(v, body) : Term::up(v, body);
    }
    case Sub: {
      Type a = small_type(domain_of(refs), depth - 2);
      std::string x = fresh();
      Term v = value(refs, gamma, a, depth - 2);
      VarContext inner = gamma;
      inner[x] = a;
      return Term::var_sub({VarBinding{x, v, "y"}}, gen(refs, inner, t, allowed, depth - 1));
    }
  }
  return value(refs, gamma, t, depth - 1);
}

Term TermGen::term(const RefContext& refs) {
  const Effect all = domain_of(refs);
  while (true) {
    Type t;
    switch (below(3)) {
      case 0: t = Type::unit(); break;
      case 1: t = Type::arrow(Type::unit(), subset(all), Type::unit()); break;
      default: t = Type::behavior(); break;
    }
    Term out = alpha_canonicalize(gen(refs, {}, t, all, 1 + below(opts_.max_depth)));
    if (out.size() <= opts_.max_size && out.depth() <= opts_.max_depth) return out;
  }
}

VarSubst TermGen::var_subst(std::size_t size) {
  static const char* names[] = {"x", "y", "z", "w"};
  VarSubst out;
  for (std::size_t i = 0; i < size; ++i) {
    std::string x = names[below(4)];
    Term v;
    switch (below(4)) {
      case 0: v = Term::unit(); break;
      case 1: v = Term::var(names[below(4)]); break;
      case 2: v = Term::lam("a", Type::unit(), Term::var(names[below(4)]), "a"); break;
      default:
        v = Term::lam("a", Type::unit(),
                      Term::app(Term::var(names[below(4)]), Term::var(chance(0.5) ? "a" : names[below(4)])),
                      "a");
    }
    out[x] = v;
  }
  return out;
}

RefSubst TermGen::ref_subst(const std::vector<std::string>& refs, std::size_t size) {
  static const Term pool[] = {Term::unit(), Term::lam("a", Type::unit(), Term::var("a"), "a"),
                              Term::var("x")};
  RefSubst out;
  for (std::size_t i = 0; i < size; ++i) out.add(refs[below(refs.size())], pool[below(3)]);
  return out;
}

std::vector<TypedTerm> typed_corpus(std::size_t count, std::uint64_t seed, GenOptions opts) {
  TermGen gen(seed, opts);
  std::vector<TypedTerm> out;
  std::set<std::string> seen;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > count * 200) throw std::runtime_error("corpus generator stalled");
    RefContext refs = gen.refs();
    Term t = gen.term(refs);
    std::string key;
    for (const auto& [r, ty] : refs) key += r + ":" + print(ty) + ";";
    key += print(t);
    if (!seen.insert(key).second) continue;
    out.push_back(TypedTerm{refs, t});
  }
  return out;
}

// ---------------------------------------------------------------------------
// λ_C programs

namespace {

class ProgramGen {
 public:
  ProgramGen(std::uint64_t seed, LCGenOptions opts) : rng_(seed), opts_(opts) {}

  TypedProgram program() {
    TypedProgram p;
    p.refs = refs();
    refs_ = p.refs;
    Effect all;
    for (const auto& [r, t] : p.refs) all.insert(r);
    const std::size_t threads = 1 + below(opts_.max_threads);
    for (std::size_t i = 0; i < threads; ++i)
      p.program.threads.push_back(term({}, Type::unit(), all, 1 + below(opts_.max_depth)));
    const std::size_t stores = below(opts_.max_stores + 1);
    for (std::size_t i = 0; i < stores; ++i) {
      const auto& [r, t] = p.refs[below(p.refs.size())];
      p.program.stores.emplace_back(r, value({}, t, 1 + below(2)));
    }
    p.program = canonicalize(p.program);
    return p;
  }

 private:
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  RefContext refs() {
    RefContext out{{"r", chance(0.5) ? Type::unit() : Type::arrow(Type::unit(), {}, Type::unit())}};
    if (chance(0.5)) out.emplace_back("s", Type::arrow(Type::unit(), {"r"}, Type::unit()));
    return out;
  }

  LCTerm value(const VarContext& gamma, const Type& a, std::size_t depth) {
    std::vector<std::string> vars;
    for (const auto& [x, t] : gamma)
      if (t == a) vars.push_back(x);
    if (!vars.empty() && chance(0.4)) return LCTerm::var(vars[below(vars.size())]);
    if (a.kind() == TypeKind::Unit) return LCTerm::unit();
    std::string x = "x" + std::to_string(counter_++);
    VarContext inner = gamma;
    inner[x] = a.domain();
    return LCTerm::lam(x, a.domain(), term(inner, a.codomain(), a.effect(), depth ? depth - 1 : 0),
                       "x");
  }

  LCTerm term(const VarContext& gamma, const Type& t, const Effect& allowed, std::size_t depth) {
    if (depth <= 1) return value(gamma, t, 0);
    std::vector<std::string> readable, writable;
    for (const auto& r : allowed) {
      writable.push_back(r);
      if (*lookup_ref(refs_, r) == t) readable.push_back(r);
    }
    const std::size_t k = below(10);
    if (k < 3 && !readable.empty()) return LCTerm::get(readable[below(readable.size())]);
    if (k < 5 && t.kind() == TypeKind::Unit && !writable.empty()) {
      const std::string& r = writable[below(writable.size())];
      return LCTerm::set(r, value(gamma, *lookup_ref(refs_, r), depth - 1));
    }
    if (k < 8) {
      Type dom = chance(0.7) ? Type::unit() : Type::arrow(Type::unit(), {}, Type::unit());
      Effect latent;
      for (const auto& r : allowed)
        if (chance(0.5)) latent.insert(r);
      LCTerm fun = term(gamma, Type::arrow(dom, latent, t), allowed, depth - 1);
      LCTerm arg = term(gamma, dom, allowed, depth - 1);
      return LCTerm::app(fun, arg);
    }
    return value(gamma, t, depth - 1);
  }

  std::mt19937_64 rng_;
  LCGenOptions opts_;
  RefContext refs_;
  std::size_t counter_ = 0;
};

}  // namespace

std::vector<TypedProgram> lc_corpus(std::size_t count, std::uint64_t seed, LCGenOptions opts) {
  std::vector<TypedProgram> out;
  std::set<std::string> seen;
  ProgramGen gen(seed, opts);
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > count * 200) throw std::runtime_error("program generator stalled");
    TypedProgram p = gen.program();
    std::string key = print(p.program);
    for (const auto& [r, t] : p.refs) key += ";" + r + ":" + print(t);
    if (!seen.insert(key).second) continue;
    try {
      infer(p.refs, Sum(translate(p.program)));
    } catch (const TypeError&) {
      continue;
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive small terms

std::vector<Term> small_terms(std::size_t depth, const std::vector<RefSubst>& pool) {
  std::vector<Term> all{Term::unit()};
  std::set<std::string> refs;
  for (const auto& p : pool)
    for (const auto& [r, vs] : p.entries()) refs.insert(r);
  for (const auto& r : refs) all.push_back(Term::get(r));
  std::unordered_set<Term, TermHash> seen(all.begin(), all.end());
  for (std::size_t d = 2; d <= depth; ++d) {
    const std::vector<Term> prev = all;
    auto add = [&](Term t) {
      t = alpha_canonicalize(t);
      if (seen.insert(t).second) all.push_back(t);
    };
    for (const auto& t : prev)
      for (const auto& p : pool) {
        add(Term::down(p, t));
        add(Term::up(p, t));
      }
    for (std::size_t i = 0; i < prev.size(); ++i) {
      for (std::size_t j = 0; j < prev.size(); ++j) add(Term::app(prev[i], prev[j]));
      for (std::size_t j = i; j < prev.size(); ++j) add(Term::par({prev[i], prev[j]}));
    }
  }
  return all;
}

}  // namespace lces::testing
