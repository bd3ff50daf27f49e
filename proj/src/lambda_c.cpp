#include "lces/lambda_c.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lces/printer.hpp"
#include "lces/reduction.hpp"

namespace lces {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 12) + (seed >> 4));
}

}  // namespace

// ---------------------------------------------------------------------------
// Terms

LCTerm LCTerm::make(LCNode n) {
  n.hash = static_cast<std::size_t>(n.kind) * 0x2545F4914F6CDD1DULL + 7;
  n.hash = mix(n.hash, std::hash<std::string>{}(n.name));
  for (const auto& k : n.kids) n.hash = mix(n.hash, k.hash());
  return LCTerm(std::make_shared<const LCNode>(std::move(n)));
}

LCTerm LCTerm::var(std::string name) {
  LCNode n;
  n.kind = LCKind::Var;
  n.name = std::move(name);
  return make(std::move(n));
}

LCTerm LCTerm::unit() {
  LCNode n;
  n.kind = LCKind::Unit;
  return make(std::move(n));
}

LCTerm LCTerm::lam(std::string binder, Type annotation, LCTerm body, std::string hint) {
  LCNode n;
  n.kind = LCKind::Lam;
  n.name = std::move(binder);
  n.annotation = std::move(annotation);
  n.hint = std::move(hint);
  n.kids.push_back(std::move(body));
  return make(std::move(n));
}

LCTerm LCTerm::app(LCTerm fun, LCTerm arg) {
  LCNode n;
  n.kind = LCKind::App;
  n.kids = {std::move(fun), std::move(arg)};
  return make(std::move(n));
}

LCTerm LCTerm::set(std::string ref, LCTerm value) {
  LCNode n;
  n.kind = LCKind::Set;
  n.name = std::move(ref);
  n.kids.push_back(std::move(value));
  return make(std::move(n));
}

LCTerm LCTerm::get(std::string ref) {
  LCNode n;
  n.kind = LCKind::Get;
  n.name = std::move(ref);
  return make(std::move(n));
}

LCTerm LCTerm::par(std::vector<LCTerm> threads) {
  if (threads.empty()) throw UsageError("parallel composition needs at least one thread");
  if (threads.size() == 1) return std::move(threads.front());
  LCNode n;
  n.kind = LCKind::Par;
  n.kids = std::move(threads);
  return make(std::move(n));
}

LCKind LCTerm::kind() const { return node_->kind; }
bool LCTerm::is_value() const {
  return kind() == LCKind::Var || kind() == LCKind::Unit || kind() == LCKind::Lam;
}
const std::string& LCTerm::name() const { return node_->name; }
const std::string& LCTerm::hint() const { return node_->hint; }
const Type& LCTerm::annotation() const { return node_->annotation; }
const LCTerm& LCTerm::body() const { return node_->kids.at(0); }
const LCTerm& LCTerm::fun() const { return node_->kids.at(0); }
const LCTerm& LCTerm::arg() const { return node_->kids.at(1); }
const LCTerm& LCTerm::value() const { return node_->kids.at(0); }
const std::vector<LCTerm>& LCTerm::children() const { return node_->kids; }
std::size_t LCTerm::hash() const { return node_->hash; }

std::strong_ordering compare(const LCTerm& a, const LCTerm& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (!a.node_) return std::strong_ordering::less;
  if (!b.node_) return std::strong_ordering::greater;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  if (auto c = a.name() <=> b.name(); c != 0) return c;
  if (a.kind() == LCKind::Lam)
    if (auto c = compare(a.annotation(), b.annotation()); c != 0) return c;
  const auto& x = a.children();
  const auto& y = b.children();
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (auto c = compare(x[i], y[i]); c != 0) return c;
  return x.size() <=> y.size();
}

std::size_t LCProgramHash::operator()(const LCProgram& p) const {
  std::size_t h = 0xabcdef;
  for (const auto& t : p.threads) h = mix(h, t.hash());
  h = mix(h, 0x5151);
  for (const auto& [r, v] : p.stores) h = mix(mix(h, std::hash<std::string>{}(r)), v.hash());
  return h;
}

// ---------------------------------------------------------------------------
// Canonical forms and substitution

namespace {

LCTerm canon(const LCTerm& t, std::size_t level,
             std::vector<std::pair<std::string, std::string>>& scope) {
  switch (t.kind()) {
    case LCKind::Var:
      for (auto it = scope.rbegin(); it != scope.rend(); ++it)
        if (it->first == t.name()) return LCTerm::var(it->second);
      return t;
    case LCKind::Unit:
    case LCKind::Get:
      return t;
    case LCKind::Lam: {
      std::string fresh = canonical_name(level);
      std::string hint = is_canonical_name(t.name()) ? t.hint() : t.name();
      scope.emplace_back(t.name(), fresh);
      LCTerm body = canon(t.body(), level + 1, scope);
      scope.pop_back();
      return LCTerm::lam(fresh, t.annotation(), body, hint);
    }
    case LCKind::App:
      return LCTerm::app(canon(t.fun(), level, scope), canon(t.arg(), level, scope));
    case LCKind::Set:
      return LCTerm::set(t.name(), canon(t.value(), level, scope));
    case LCKind::Par: {
      std::vector<LCTerm> kids;
      for (const auto& k : t.children()) {
        LCTerm c = canon(k, level, scope);
        if (c.kind() == LCKind::Par) {
          kids.insert(kids.end(), c.children().begin(), c.children().end());
        } else {
          kids.push_back(c);
        }
      }
      std::sort(kids.begin(), kids.end());
      return LCTerm::par(std::move(kids));
    }
  }
  return t;
}

void lc_names(const LCTerm& t, std::set<std::string>& out) {
  if (t.kind() == LCKind::Var || t.kind() == LCKind::Lam) out.insert(t.name());
  for (const auto& k : t.children()) lc_names(k, out);
}

void lc_free(const LCTerm& t, std::vector<std::string>& bound, std::set<std::string>& out) {
  switch (t.kind()) {
    case LCKind::Var:
      if (std::find(bound.begin(), bound.end(), t.name()) == bound.end()) out.insert(t.name());
      return;
    case LCKind::Lam:
      bound.push_back(t.name());
      lc_free(t.body(), bound, out);
      bound.pop_back();
      return;
    default:
      for (const auto& k : t.children()) lc_free(k, bound, out);
  }
}

LCTerm rebuild(const LCTerm& t, std::vector<LCTerm> kids) {
  switch (t.kind()) {
    case LCKind::Lam: return LCTerm::lam(t.name(), t.annotation(), kids[0], t.hint());
    case LCKind::App: return LCTerm::app(kids[0], kids[1]);
    case LCKind::Set: return LCTerm::set(t.name(), kids[0]);
    case LCKind::Par: return LCTerm::par(std::move(kids));
    default: return t;
  }
}

LCTerm lc_rename(const LCTerm& t, const std::string& from, const std::string& to) {
  if (t.kind() == LCKind::Var) return t.name() == from ? LCTerm::var(to) : t;
  if (t.kind() == LCKind::Lam && t.name() == from) return t;
  if (t.children().empty()) return t;
  std::vector<LCTerm> kids;
  for (const auto& k : t.children()) kids.push_back(lc_rename(k, from, to));
  return rebuild(t, std::move(kids));
}

}  // namespace

LCTerm lc_canonicalize(const LCTerm& t, std::size_t level) {
  std::vector<std::pair<std::string, std::string>> scope;
  return canon(t, level, scope);
}

LCProgram canonicalize(const LCProgram& p) {
  LCProgram out;
  for (const auto& t : p.threads) {
    LCTerm c = lc_canonicalize(t);
    if (c.kind() == LCKind::Par) {
      out.threads.insert(out.threads.end(), c.children().begin(), c.children().end());
    } else {
      out.threads.push_back(c);
    }
  }
  for (const auto& [r, v] : p.stores) out.stores.emplace_back(r, lc_canonicalize(v));
  std::sort(out.threads.begin(), out.threads.end());
  std::sort(out.stores.begin(), out.stores.end());
  return out;
}

LCTerm lc_substitute(const LCTerm& t, const std::string& x, const LCTerm& v) {
  switch (t.kind()) {
    case LCKind::Var:
      return t.name() == x ? v : t;
    case LCKind::Unit:
    case LCKind::Get:
      return t;
    case LCKind::Lam: {
      if (t.name() == x) return t;
      std::set<std::string> fv;
      std::vector<std::string> bound;
      lc_free(v, bound, fv);
      std::string binder = t.name();
      LCTerm body = t.body();
      if (fv.count(binder)) {
        std::set<std::string> avoid = fv;
        lc_names(body, avoid);
        avoid.insert(x);
        std::string fresh = fresh_name(binder, avoid);
        body = lc_rename(body, binder, fresh);
        binder = fresh;
      }
      return LCTerm::lam(binder, t.annotation(), lc_substitute(body, x, v), t.hint());
    }
    default: {
      std::vector<LCTerm> kids;
      for (const auto& k : t.children()) kids.push_back(lc_substitute(k, x, v));
      return rebuild(t, std::move(kids));
    }
  }
}

// ---------------------------------------------------------------------------
// Dynamics

namespace {

// Reducts of `t` at weak call-by-value positions, with the store entry a
// step adds (empty reference when none).
void lc_local_steps(const LCTerm& t, const std::vector<Store>& stores,
                    std::vector<std::pair<LCTerm, std::optional<Store>>>& out) {
  switch (t.kind()) {
    case LCKind::App: {
      if (t.fun().kind() == LCKind::Lam && t.arg().is_value())
        out.emplace_back(lc_substitute(t.fun().body(), t.fun().name(), t.arg()), std::nullopt);
      std::vector<std::pair<LCTerm, std::optional<Store>>> inner;
      lc_local_steps(t.fun(), stores, inner);
      for (auto& [r, s] : inner) out.emplace_back(LCTerm::app(r, t.arg()), s);
      inner.clear();
      lc_local_steps(t.arg(), stores, inner);
      for (auto& [r, s] : inner) out.emplace_back(LCTerm::app(t.fun(), r), s);
      return;
    }
    case LCKind::Set:
      out.emplace_back(LCTerm::unit(), Store{t.name(), t.value()});
      return;
    case LCKind::Get:
      for (const auto& [r, v] : stores)
        if (r == t.name()) out.emplace_back(v, std::nullopt);
      return;
    default:
      return;
  }
}

}  // namespace

std::vector<LCProgram> lc_successors(const LCProgram& p) {
  std::vector<LCProgram> out;
  for (std::size_t i = 0; i < p.threads.size(); ++i) {
    if (i > 0 && p.threads[i] == p.threads[i - 1]) continue;
    std::vector<std::pair<LCTerm, std::optional<Store>>> local;
    lc_local_steps(p.threads[i], p.stores, local);
    for (auto& [reduct, store] : local) {
      LCProgram q = p;
      q.threads[i] = reduct;
      if (store) q.stores.push_back(*store);
      out.push_back(canonicalize(q));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

class LCPrinter {
 public:
  explicit LCPrinter(std::set<std::string> free) : taken_(free.begin(), free.end()) {}

  void term(std::ostream& os, const LCTerm& t, bool tail) {
    switch (t.kind()) {
      case LCKind::Var:
        os << resolve(t.name());
        return;
      case LCKind::Unit:
        os << '*';
        return;
      case LCKind::Get:
        os << "get(" << t.name() << ')';
        return;
      case LCKind::Set:
        os << "set(" << t.name() << ", ";
        par(os, t.value(), true);
        os << ')';
        return;
      case LCKind::Lam: {
        if (!tail) os << '(';
        std::string s = fresh(t.hint().empty() ? t.name() : t.hint());
        scope_.emplace_back(t.name(), s);
        taken_.push_back(s);
        os << '\\' << s << ':' << print(t.annotation()) << ". ";
        par(os, t.body(), true);
        scope_.pop_back();
        taken_.pop_back();
        if (!tail) os << ')';
        return;
      }
      case LCKind::App: {
        os << '(';
        term(os, t.fun(), false);
        os << ' ';
        if (t.arg().kind() == LCKind::Par) {
          os << '(';
          par(os, t.arg(), true);
          os << ')';
        } else {
          term(os, t.arg(), true);
        }
        os << ')';
        return;
      }
      case LCKind::Par:
        os << '(';
        par(os, t, true);
        os << ')';
        return;
    }
  }

  void par(std::ostream& os, const LCTerm& t, bool tail) {
    if (t.kind() != LCKind::Par) {
      term(os, t, tail);
      return;
    }
    for (std::size_t i = 0; i < t.children().size(); ++i) {
      if (i) os << " || ";
      term(os, t.children()[i], tail && i + 1 == t.children().size());
    }
  }

 private:
  std::string fresh(std::string stem) {
    if (stem.empty() || is_canonical_name(stem)) stem = "x";
    auto used = [&](const std::string& n) {
      return std::find(taken_.begin(), taken_.end(), n) != taken_.end() || n == "get" ||
             n == "set";
    };
    if (!used(stem)) return stem;
    for (std::size_t i = 1;; ++i)
      if (!used(stem + std::to_string(i))) return stem + std::to_string(i);
  }

  std::string resolve(const std::string& n) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == n) return it->second;
    return n;
  }

  std::vector<std::string> taken_;
  std::vector<std::pair<std::string, std::string>> scope_;
};

std::set<std::string> lc_free_vars(const LCTerm& t) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  lc_free(t, bound, out);
  return out;
}

}  // namespace

std::string print(const LCTerm& t) {
  LCPrinter p(lc_free_vars(t));
  std::ostringstream os;
  p.par(os, t, true);
  return os.str();
}

std::string print(const LCProgram& p) {
  std::string out;
  auto add = [&](const std::string& s) {
    if (!out.empty()) out += " || ";
    out += s;
  };
  for (std::size_t i = 0; i < p.threads.size(); ++i) {
    const LCTerm& t = p.threads[i];
    std::string s = print(t);
    if (t.kind() == LCKind::Lam && (i + 1 < p.threads.size() || !p.stores.empty())) s = "(" + s + ")";
    add(s);
  }
  for (const auto& [r, v] : p.stores) {
    std::string s = print(v);
    if (v.kind() == LCKind::Lam && &v != &p.stores.back().second) s = "(" + s + ")";
    add(r + " <= " + s);
  }
  return out.empty() ? "*" : out;
}

// ---------------------------------------------------------------------------
// Translation

namespace {

Term set_encoding(const std::string& r, const Term& value, const RefSubst& lsub) {
  std::string x = fresh_name("x", all_variable_names(value));
  Term up = Term::up(RefSubst::single(r, {value}), Term::unit());
  return Term::app(Term::lam(x, Type::unit(), up, x), Term::unit(), lsub);
}

Term translate_under(const LCTerm& t, const RefSubst& vs) {
  switch (t.kind()) {
    case LCKind::Var:
    case LCKind::Unit:
    case LCKind::Lam:
      return embed(t);
    case LCKind::App:
      return Term::app(translate_under(t.fun(), vs), translate_under(t.arg(), vs), vs);
    case LCKind::Set:
      return set_encoding(t.name(), embed(t.value()), vs);
    case LCKind::Get:
      return vs.empty() ? Term::get(t.name()) : Term::down(vs, Term::get(t.name()));
    case LCKind::Par: {
      std::vector<Term> kids;
      for (const auto& k : t.children()) kids.push_back(translate_under(k, vs));
      return Term::par(std::move(kids));
    }
  }
  throw UsageError("unknown λ_C term");
}

}  // namespace

Term embed(const LCTerm& t) {
  switch (t.kind()) {
    case LCKind::Var: return Term::var(t.name());
    case LCKind::Unit: return Term::unit();
    case LCKind::Lam: return Term::lam(t.name(), t.annotation(), embed(t.body()), t.hint());
    case LCKind::App: return Term::app(embed(t.fun()), embed(t.arg()));
    case LCKind::Set: return set_encoding(t.name(), embed(t.value()), RefSubst{});
    case LCKind::Get: return Term::get(t.name());
    case LCKind::Par: {
      std::vector<Term> kids;
      for (const auto& k : t.children()) kids.push_back(embed(k));
      return Term::par(std::move(kids));
    }
  }
  throw UsageError("unknown λ_C term");
}

RefSubst store_substitution(const LCProgram& p) {
  RefSubst v;
  for (const auto& [r, value] : p.stores) v.add(r, embed(value));
  return v;
}

Term translate(const LCProgram& p) {
  RefSubst vs = store_substitution(p);
  std::vector<Term> threads;
  for (const auto& t : p.threads) threads.push_back(translate_under(t, vs));
  if (threads.empty()) return Term::unit();
  return Term::par(std::move(threads));
}

// ---------------------------------------------------------------------------
// Substitution relation

namespace {

bool related(const Term& a, const Term& b, std::size_t level);

template <typename Rel>
bool match_multiset(const std::vector<Term>& a, const std::vector<Term>& b, Rel rel) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  std::function<bool(std::size_t)> go = [&](std::size_t i) {
    if (i == a.size()) return true;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      if (j > 0 && !used[j - 1] && b[j] == b[j - 1]) continue;  // symmetric choice
      if (!rel(a[i], b[j])) continue;
      used[j] = true;
      if (go(i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return go(0);
}

bool refs_related(const RefSubst& a, const RefSubst& b, std::size_t level) {
  if (a.entries().size() != b.entries().size()) return false;
  auto ia = a.entries().begin();
  auto ib = b.entries().begin();
  for (; ia != a.entries().end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (!match_multiset(ia->second, ib->second,
                        [&](const Term& x, const Term& y) { return related(x, y, level); }))
      return false;
  }
  return true;
}

bool lam_body_related(const Term& body, const Term& target, std::size_t level) {
  std::vector<const Term*> stack;
  const Term* cur = &body;
  while (cur->kind() == TermKind::VarSub) {
    stack.push_back(cur);
    cur = &cur->body();
  }
  if (related(body, target, level)) return true;
  // strip the outermost n layers and discharge them, innermost first
  for (std::size_t n = 1; n <= stack.size(); ++n) {
    Term residual = stack[n - 1]->body();
    for (std::size_t k = n; k-- > 0;)
      residual = substitute(residual, to_var_subst(stack[k]->bindings()));
    if (related(alpha_canonicalize(residual, level), target, level)) return true;
  }
  return false;
}

bool related(const Term& a, const Term& b, std::size_t level) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case TermKind::Var:
    case TermKind::Unit:
    case TermKind::Get:
      return a == b;
    case TermKind::Lam:
      return a.annotation() == b.annotation() && a.name() == b.name() &&
             lam_body_related(a.body(), b.body(), level + 1);
    case TermKind::Down:
    case TermKind::Up:
      return refs_related(a.refs(), b.refs(), level) && related(a.body(), b.body(), level);
    case TermKind::App:
      return refs_related(a.refs(), b.refs(), level) && related(a.fun(), b.fun(), level) &&
             related(a.arg(), b.arg(), level);
    case TermKind::Par:
      return match_multiset(a.children(), b.children(), [&](const Term& x, const Term& y) {
        return related(x, y, level);
      });
    case TermKind::VarSub: {
      const auto& x = a.bindings();
      const auto& y = b.bindings();
      if (x.size() != y.size()) return false;
      const std::size_t k = x.size();
      std::vector<std::size_t> perm(k);
      for (std::size_t i = 0; i < k; ++i) perm[i] = i;
      do {
        bool ok = true;
        for (std::size_t i = 0; i < k && ok; ++i) ok = related(x[i].value, y[perm[i]].value, level);
        if (!ok) continue;
        // give a's binders the names of their partners in b
        Term body = a.body();
        for (std::size_t i = 0; i < k; ++i) body = rename_free(body, x[i].name, "%" + x[i].name);
        for (std::size_t i = 0; i < k; ++i) body = rename_free(body, "%" + x[i].name, y[perm[i]].name);
        if (related(body, b.body(), level + k)) return true;
      } while (std::next_permutation(perm.begin(), perm.end()));
      return false;
    }
  }
  return false;
}

}  // namespace

bool subst_related(const Term& m, const Term& n) {
  return related(alpha_canonicalize(m), alpha_canonicalize(n), 0);
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

bool administrative(RuleTag tag) {
  return is_down_structural(tag) || (tag >= RuleTag::Subst_Var && tag <= RuleTag::Subst_Merge);
}

Term settle(Term t, std::size_t& steps) {
  while (true) {
    Sum s(t);
    bool moved = false;
    for (const auto& site : decompose(s, Mode::Nd)) {
      if (!administrative(site.tag)) continue;
      t = apply(s, site).only();
      ++steps;
      moved = true;
      break;
    }
    if (!moved) return t;
  }
}

}  // namespace

Report check_simulation(const LCProgram& p, SimulationLimits limits) {
  Report rep;
  rep.name = "simulation";
  LCProgram start = canonicalize(p);
  std::unordered_set<LCProgram, LCProgramHash> seen{start};
  std::deque<LCProgram> queue{start};
  while (!queue.empty()) {
    LCProgram cur = std::move(queue.front());
    queue.pop_front();
    auto succ = lc_successors(cur);
    if (succ.empty()) continue;
    std::vector<Term> targets;
    for (const auto& q : succ) {
      targets.push_back(alpha_canonicalize(translate(q)));
      if (seen.size() < limits.max_lc_states) {
        if (seen.insert(q).second) queue.push_back(q);
      } else if (!seen.count(q)) {
        rep.truncated = true;
      }
    }
    std::vector<bool> matched(targets.size(), false);
    std::size_t remaining = targets.size();
    // Search over states closed under the administrative steps (variable
    // substitution and downward propagation other than reads); every such
    // step still counts against the budget.
    std::size_t used = 0;
    Term source = settle(alpha_canonicalize(translate(cur)), used);
    std::unordered_map<Term, std::size_t, TermHash> depth{{source, used}};
    std::deque<Term> frontier{source};
    auto visit = [&](const Term& m) {
      for (std::size_t j = 0; j < targets.size(); ++j)
        if (!matched[j] && related(m, targets[j], 0)) {
          matched[j] = true;
          --remaining;
        }
    };
    visit(source);
    bool search_truncated = false;
    while (remaining > 0 && !frontier.empty()) {
      Term m = std::move(frontier.front());
      frontier.pop_front();
      const std::size_t d = depth[m];
      if (d >= limits.step_budget) continue;
      for (const auto& step : successors_nd(m)) {
        std::size_t extra = 1;
        Term next = settle(step, extra);
        if (d + extra > limits.step_budget || depth.count(next)) continue;
        if (depth.size() >= limits.max_nd_states) {
          search_truncated = true;
          break;
        }
        depth.emplace(next, d + extra);
        frontier.push_back(next);
        visit(next);
        if (remaining == 0) break;
      }
    }
    rep.checked += targets.size();
    for (std::size_t j = 0; j < targets.size(); ++j)
      if (!matched[j])
        rep.fail("step " + print(cur) + "  ->  " + print(succ[j]) + " not simulated" +
                 (search_truncated ? " (search truncated)" : ""));
  }
  return rep;
}

}  // namespace lces
