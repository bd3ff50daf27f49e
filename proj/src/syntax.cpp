#include "lces/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace lces {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  // boost::hash_combine constant, 64-bit variant
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 12) + (seed >> 4));
}

std::size_t hash_string(const std::string& s) { return std::hash<std::string>{}(s); }

template <typename T>
std::strong_ordering compare_vectors(const std::vector<T>& a, const std::vector<T>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = compare(a[i], b[i]); c != 0) return c;
  }
  return a.size() <=> b.size();
}

}  // namespace

// ---------------------------------------------------------------------------
// Type

struct Type::Node {
  TypeKind kind = TypeKind::Unit;
  Effect effect;
  std::string ref;
  Type a;  // domain or content
  Type b;  // codomain
  Node() : a(nullptr), b(nullptr) {}
};

Type::Type() : node_(nullptr) {}

Type Type::unit() { return Type(); }

Type Type::behavior() {
  static const std::shared_ptr<const Node> node = [] {
    auto n = std::make_shared<Node>();
    n->kind = TypeKind::Behavior;
    return std::shared_ptr<const Node>(n);
  }();
  return Type(node);
}

Type Type::arrow(Type domain, Effect effect, Type codomain) {
  auto n = std::make_shared<Node>();
  n->kind = TypeKind::Arrow;
  n->effect = std::move(effect);
  n->a = std::move(domain);
  n->b = std::move(codomain);
  return Type(std::shared_ptr<const Node>(std::move(n)));
}

Type Type::ref(std::string ref, Type content) {
  auto n = std::make_shared<Node>();
  n->kind = TypeKind::Ref;
  n->ref = std::move(ref);
  n->a = std::move(content);
  return Type(std::shared_ptr<const Node>(std::move(n)));
}

// A null node stands for Unit so that default construction is cheap.
TypeKind Type::kind() const { return node_ ? node_->kind : TypeKind::Unit; }

const Type& Type::domain() const {
  if (kind() != TypeKind::Arrow) throw UsageError("domain() of a non-arrow type");
  return node_->a;
}
const Effect& Type::effect() const {
  if (kind() != TypeKind::Arrow) throw UsageError("effect() of a non-arrow type");
  return node_->effect;
}
const Type& Type::codomain() const {
  if (kind() != TypeKind::Arrow) throw UsageError("codomain() of a non-arrow type");
  return node_->b;
}
const std::string& Type::ref_name() const {
  if (kind() != TypeKind::Ref) throw UsageError("ref_name() of a non-reference type");
  return node_->ref;
}
const Type& Type::content() const {
  if (kind() != TypeKind::Ref) throw UsageError("content() of a non-reference type");
  return node_->a;
}

std::strong_ordering compare(const Type& a, const Type& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  switch (a.kind()) {
    case TypeKind::Unit:
    case TypeKind::Behavior:
      return std::strong_ordering::equal;
    case TypeKind::Arrow:
      if (auto c = compare(a.domain(), b.domain()); c != 0) return c;
      if (auto c = a.effect() <=> b.effect(); c != 0) return c;
      return compare(a.codomain(), b.codomain());
    case TypeKind::Ref:
      if (auto c = a.ref_name() <=> b.ref_name(); c != 0) return c;
      return compare(a.content(), b.content());
  }
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// RefSubst

RefSubst::RefSubst(Map entries) : entries_(std::move(entries)) {
  for (auto& [ref, values] : entries_) std::sort(values.begin(), values.end());
}

RefSubst RefSubst::single(std::string ref, std::vector<Term> values) {
  Map m;
  m.emplace(std::move(ref), std::move(values));
  return RefSubst(std::move(m));
}

const std::vector<Term>* RefSubst::find(const std::string& ref) const {
  auto it = entries_.find(ref);
  return it == entries_.end() ? nullptr : &it->second;
}

Effect RefSubst::domain() const {
  Effect d;
  for (const auto& [ref, values] : entries_) d.insert(ref);
  return d;
}

std::size_t RefSubst::value_count() const {
  std::size_t n = 0;
  for (const auto& [ref, values] : entries_) n += values.size();
  return n;
}

void RefSubst::add(const std::string& ref, Term value) {
  auto& values = entries_[ref];
  values.insert(std::upper_bound(values.begin(), values.end(), value), std::move(value));
}

std::strong_ordering compare(const RefSubst& a, const RefSubst& b) {
  auto ia = a.entries_.begin();
  auto ib = b.entries_.begin();
  for (; ia != a.entries_.end() && ib != b.entries_.end(); ++ia, ++ib) {
    if (auto c = ia->first <=> ib->first; c != 0) return c;
    if (auto c = compare_vectors(ia->second, ib->second); c != 0) return c;
  }
  if (ia != a.entries_.end()) return std::strong_ordering::greater;
  if (ib != b.entries_.end()) return std::strong_ordering::less;
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// Term

namespace {

std::size_t hash_type(const Type& t) {
  std::size_t h = static_cast<std::size_t>(t.kind()) + 17;
  switch (t.kind()) {
    case TypeKind::Arrow:
      h = mix(h, hash_type(t.domain()));
      for (const auto& r : t.effect()) h = mix(h, hash_string(r));
      h = mix(h, hash_type(t.codomain()));
      break;
    case TypeKind::Ref:
      h = mix(h, hash_string(t.ref_name()));
      h = mix(h, hash_type(t.content()));
      break;
    default:
      break;
  }
  return h;
}

void account_refs(TermNode& n, const RefSubst& refs) {
  for (const auto& [ref, values] : refs.entries()) {
    n.hash = mix(n.hash, hash_string(ref));
    n.hash = mix(n.hash, values.size());
    for (const auto& v : values) {
      n.hash = mix(n.hash, v.hash());
      n.size += v.size();
      n.depth = std::max(n.depth, v.depth() + 1);
    }
  }
}

}  // namespace

Term Term::make(TermNode n) {
  n.hash = static_cast<std::size_t>(n.kind) * 0x100000001b3ULL + 1;
  n.size = 1;
  n.depth = 1;
  switch (n.kind) {
    case TermKind::Var:
    case TermKind::Get:
      n.hash = mix(n.hash, hash_string(n.name));
      break;
    case TermKind::Unit:
      break;
    case TermKind::Lam:
      n.hash = mix(n.hash, hash_string(n.name));
      n.hash = mix(n.hash, hash_type(n.annotation));
      break;
    case TermKind::VarSub:
      for (const auto& b : n.bindings) {
        n.hash = mix(n.hash, hash_string(b.name));
        n.hash = mix(n.hash, b.value.hash());
        n.size += b.value.size();
        n.depth = std::max(n.depth, b.value.depth() + 1);
      }
      break;
    case TermKind::App:
    case TermKind::Down:
    case TermKind::Up:
      account_refs(n, n.refs);
      break;
    case TermKind::Par:
      break;
  }
  for (const auto& k : n.kids) {
    n.hash = mix(n.hash, k.hash());
    n.size += k.size();
    n.depth = std::max(n.depth, k.depth() + 1);
  }
  return Term(std::make_shared<const TermNode>(std::move(n)));
}

Term Term::var(std::string name, SourcePos pos) {
  TermNode n;
  n.kind = TermKind::Var;
  n.name = std::move(name);
  n.pos = pos;
  return make(std::move(n));
}

Term Term::unit(SourcePos pos) {
  TermNode n;
  n.kind = TermKind::Unit;
  n.pos = pos;
  return make(std::move(n));
}

Term Term::lam(std::string binder, Type annotation, Term body, std::string hint, SourcePos pos) {
  TermNode n;
  n.kind = TermKind::Lam;
  n.name = std::move(binder);
  n.annotation = std::move(annotation);
  n.hint = std::move(hint);
  n.kids.push_back(std::move(body));
  n.pos = pos;
  return make(std::move(n));
}

Term Term::var_sub(std::vector<VarBinding> bindings, Term body, SourcePos pos) {
  TermNode n;
  n.kind = TermKind::VarSub;
  n.bindings = std::move(bindings);
  n.kids.push_back(std::move(body));
  n.pos = pos;
  return make(std::move(n));
}

Term Term::app(Term fun, Term arg, RefSubst lsub, SourcePos pos) {
  TermNode n;
  n.kind = TermKind::App;
  n.refs = std::move(lsub);
  n.kids.push_back(std::move(fun));
  n.kids.push_back(std::move(arg));
  n.pos = pos;
  return make(std::move(n));
}

Term Term::app(Term fun, Term arg) { return app(std::move(fun), std::move(arg), RefSubst{}); }

Term Term::get(std::string ref, SourcePos pos) {
  TermNode n;
  n.kind = TermKind::Get;
  n.name = std::move(ref);
  n.pos = pos;
  return make(std::move(n));
}

Term Term::down(RefSubst refs, Term body, SourcePos pos) {
  TermNode n;
  n.kind = TermKind::Down;
  n.refs = std::move(refs);
  n.kids.push_back(std::move(body));
  n.pos = pos;
  return make(std::move(n));
}

Term Term::up(RefSubst refs, Term body, SourcePos pos) {
  TermNode n;
  n.kind = TermKind::Up;
  n.refs = std::move(refs);
  n.kids.push_back(std::move(body));
  n.pos = pos;
  return make(std::move(n));
}

Term Term::par(std::vector<Term> children, SourcePos pos) {
  if (children.empty()) throw UsageError("parallel composition needs at least one thread");
  if (children.size() == 1) return std::move(children.front());
  TermNode n;
  n.kind = TermKind::Par;
  n.kids = std::move(children);
  n.pos = pos;
  return make(std::move(n));
}

TermKind Term::kind() const { return node_->kind; }

bool Term::is_value() const {
  const auto k = kind();
  return k == TermKind::Var || k == TermKind::Unit || k == TermKind::Lam;
}

const std::string& Term::name() const { return node_->name; }
const std::string& Term::hint() const { return node_->hint; }
const Type& Term::annotation() const { return node_->annotation; }
const std::vector<VarBinding>& Term::bindings() const { return node_->bindings; }
const RefSubst& Term::refs() const { return node_->refs; }

const Term& Term::body() const {
  switch (kind()) {
    case TermKind::Lam:
    case TermKind::VarSub:
    case TermKind::Down:
    case TermKind::Up:
      return node_->kids[0];
    default:
      throw UsageError("body() of a term without body");
  }
}

const Term& Term::fun() const {
  if (kind() != TermKind::App) throw UsageError("fun() of a non-application");
  return node_->kids[0];
}

const Term& Term::arg() const {
  if (kind() != TermKind::App) throw UsageError("arg() of a non-application");
  return node_->kids[1];
}

const std::vector<Term>& Term::children() const { return node_->kids; }

const Term& Term::child(std::size_t i) const {
  if (i >= node_->kids.size()) throw UsageError("child index out of range");
  return node_->kids[i];
}

std::size_t Term::child_count() const { return node_->kids.size(); }
SourcePos Term::pos() const { return node_->pos; }
std::size_t Term::hash() const { return node_->hash; }
std::size_t Term::size() const { return node_->size; }
std::size_t Term::depth() const { return node_->depth; }

std::strong_ordering compare(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (!a.node_) return std::strong_ordering::less;
  if (!b.node_) return std::strong_ordering::greater;
  const TermNode& x = *a.node_;
  const TermNode& y = *b.node_;
  if (auto c = x.kind <=> y.kind; c != 0) return c;
  if (x.hash == y.hash && x.size != y.size) return x.size <=> y.size;
  switch (x.kind) {
    case TermKind::Var:
    case TermKind::Get:
      return x.name <=> y.name;
    case TermKind::Unit:
      return std::strong_ordering::equal;
    case TermKind::Lam:
      if (auto c = x.name <=> y.name; c != 0) return c;
      if (auto c = compare(x.annotation, y.annotation); c != 0) return c;
      break;
    case TermKind::VarSub: {
      if (auto c = x.bindings.size() <=> y.bindings.size(); c != 0) return c;
      for (std::size_t i = 0; i < x.bindings.size(); ++i) {
        if (auto c = x.bindings[i].name <=> y.bindings[i].name; c != 0) return c;
        if (auto c = compare(x.bindings[i].value, y.bindings[i].value); c != 0) return c;
      }
      break;
    }
    case TermKind::App:
    case TermKind::Down:
    case TermKind::Up:
      if (auto c = compare(x.refs, y.refs); c != 0) return c;
      break;
    case TermKind::Par:
      break;
  }
  return compare_vectors(x.kids, y.kids);
}

// ---------------------------------------------------------------------------
// Sum

Sum::Sum(Term t) { summands_.push_back(std::move(t)); }
Sum::Sum(std::vector<Term> summands) : summands_(std::move(summands)) {}

const Term& Sum::only() const {
  if (summands_.size() != 1) throw UsageError("expected a simple term, got a sum");
  return summands_.front();
}

std::size_t Sum::hash() const {
  std::size_t h = 0x51ed270b27u;
  for (const auto& t : summands_) h = mix(h, t.hash());
  return h;
}

std::strong_ordering compare(const Sum& a, const Sum& b) {
  return compare_vectors(a.summands_, b.summands_);
}

// ---------------------------------------------------------------------------
// Canonicalization

bool is_canonical_name(const std::string& name) { return !name.empty() && name[0] == '#'; }

std::string canonical_name(std::size_t level) { return "#" + std::to_string(level); }

namespace {

class Canonicalizer {
 public:
  Term run(const Term& t, std::size_t level) {
    switch (t.kind()) {
      case TermKind::Var: {
        const std::string& resolved = lookup(t.name());
        if (resolved == t.name()) return t;
        return Term::var(resolved, t.pos());
      }
      case TermKind::Unit:
      case TermKind::Get:
        return t;
      case TermKind::Lam: {
        std::string fresh = canonical_name(level);
        std::string hint = is_canonical_name(t.name()) ? t.hint() : t.name();
        scope_.emplace_back(t.name(), fresh);
        Term body = run(t.body(), level + 1);
        scope_.pop_back();
        return Term::lam(std::move(fresh), t.annotation(), std::move(body), std::move(hint),
                         t.pos());
      }
      case TermKind::VarSub:
        return run_var_sub(t, level);
      case TermKind::App:
        return Term::app(run(t.fun(), level), run(t.arg(), level), run_refs(t.refs(), level),
                         t.pos());
      case TermKind::Down:
        return Term::down(run_refs(t.refs(), level), run(t.body(), level), t.pos());
      case TermKind::Up:
        return Term::up(run_refs(t.refs(), level), run(t.body(), level), t.pos());
      case TermKind::Par: {
        std::vector<Term> kids;
        for (const auto& k : t.children()) {
          Term c = run(k, level);
          if (c.kind() == TermKind::Par) {
            kids.insert(kids.end(), c.children().begin(), c.children().end());
          } else {
            kids.push_back(std::move(c));
          }
        }
        std::sort(kids.begin(), kids.end());
        return Term::par(std::move(kids), t.pos());
      }
    }
    return t;
  }

 private:
  const std::string& lookup(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->first == name) return it->second;
    }
    return name;
  }

  RefSubst run_refs(const RefSubst& refs, std::size_t level) {
    RefSubst::Map m;
    for (const auto& [ref, values] : refs.entries()) {
      auto& out = m[ref];
      for (const auto& v : values) out.push_back(run(v, level));
    }
    return RefSubst(std::move(m));
  }

  Term run_var_sub(const Term& t, std::size_t level) {
    const auto& bs = t.bindings();
    const std::size_t k = bs.size();
    std::vector<Term> values;
    values.reserve(k);
    for (const auto& b : bs) values.push_back(run(b.value, level));

    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    // Entries with equal values are interchangeable; try every assignment of
    // names inside each tie group and keep the least body.
    std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) in order
    std::size_t combos = 1;
    for (std::size_t i = 0; i < k;) {
      std::size_t j = i + 1;
      while (j < k && values[order[j]] == values[order[i]]) ++j;
      if (j - i > 1) {
        groups.emplace_back(i, j);
        for (std::size_t f = 2; f <= j - i; ++f) combos *= f;
      }
      i = j;
    }
    const bool exhaustive = combos <= 720;

    Term best_body;
    std::vector<std::size_t> best_order = order;
    auto attempt = [&](const std::vector<std::size_t>& ord) {
      for (std::size_t pos = 0; pos < k; ++pos) {
        scope_.emplace_back(bs[ord[pos]].name, canonical_name(level + pos));
      }
      Term body = run(t.body(), level + k);
      scope_.resize(scope_.size() - k);
      if (!best_body.valid() || body < best_body) {
        best_body = std::move(body);
        best_order = ord;
      }
    };

    if (groups.empty() || !exhaustive) {
      attempt(order);
    } else {
      std::vector<std::size_t> ord = order;
      for (auto [b, e] : groups) std::sort(ord.begin() + b, ord.begin() + e);
      std::function<void(std::size_t)> rec = [&](std::size_t g) {
        if (g == groups.size()) {
          attempt(ord);
          return;
        }
        auto [b, e] = groups[g];
        std::sort(ord.begin() + b, ord.begin() + e);
        do {
          rec(g + 1);
        } while (std::next_permutation(ord.begin() + b, ord.begin() + e));
      };
      rec(0);
    }

    std::vector<VarBinding> out;
    out.reserve(k);
    for (std::size_t pos = 0; pos < k; ++pos) {
      const VarBinding& src = bs[best_order[pos]];
      std::string hint = is_canonical_name(src.name) ? src.hint : src.name;
      out.push_back(VarBinding{canonical_name(level + pos), values[best_order[pos]], hint});
    }
    return Term::var_sub(std::move(out), std::move(best_body), t.pos());
  }

  std::vector<std::pair<std::string, std::string>> scope_;
};

}  // namespace

Term alpha_canonicalize(const Term& t, std::size_t level) {
  Canonicalizer c;
  return c.run(t, level);
}

Sum canonicalize(const Sum& s) {
  std::vector<Term> out;
  out.reserve(s.summands().size());
  for (const auto& t : s.summands()) out.push_back(alpha_canonicalize(t));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return Sum(std::move(out));
}

bool term_equal(const Term& a, const Term& b) {
  return alpha_canonicalize(a) == alpha_canonicalize(b);
}

bool term_equal(const Sum& a, const Sum& b) { return canonicalize(a) == canonicalize(b); }

// ---------------------------------------------------------------------------
// Names

namespace {

void collect_open(const Term& t, std::vector<std::string>& bound, std::set<std::string>& out,
                  bool var_sub_binds) {
  auto is_bound = [&](const std::string& n) {
    return std::find(bound.begin(), bound.end(), n) != bound.end();
  };
  auto refs = [&](const RefSubst& r) {
    for (const auto& [ref, values] : r.entries())
      for (const auto& v : values) collect_open(v, bound, out, var_sub_binds);
  };
  switch (t.kind()) {
    case TermKind::Var:
      if (!is_bound(t.name())) out.insert(t.name());
      return;
    case TermKind::Unit:
    case TermKind::Get:
      return;
    case TermKind::Lam:
      bound.push_back(t.name());
      collect_open(t.body(), bound, out, var_sub_binds);
      bound.pop_back();
      return;
    case TermKind::VarSub:
      for (const auto& b : t.bindings()) collect_open(b.value, bound, out, var_sub_binds);
      if (var_sub_binds) {
        for (const auto& b : t.bindings()) bound.push_back(b.name);
        collect_open(t.body(), bound, out, var_sub_binds);
        bound.resize(bound.size() - t.bindings().size());
      } else {
        collect_open(t.body(), bound, out, var_sub_binds);
      }
      return;
    case TermKind::App:
    case TermKind::Down:
    case TermKind::Up:
      refs(t.refs());
      for (const auto& k : t.children()) collect_open(k, bound, out, var_sub_binds);
      return;
    case TermKind::Par:
      for (const auto& k : t.children()) collect_open(k, bound, out, var_sub_binds);
      return;
  }
}

void collect_refs(const Term& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case TermKind::Get:
      out.insert(t.name());
      break;
    case TermKind::VarSub:
      for (const auto& b : t.bindings()) collect_refs(b.value, out);
      break;
    case TermKind::App:
    case TermKind::Down:
    case TermKind::Up:
      for (const auto& [ref, values] : t.refs().entries()) {
        out.insert(ref);
        for (const auto& v : values) collect_refs(v, out);
      }
      break;
    default:
      break;
  }
  for (const auto& k : t.children()) collect_refs(k, out);
}

void collect_all_names(const Term& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case TermKind::Var:
    case TermKind::Lam:
      out.insert(t.name());
      break;
    case TermKind::VarSub:
      for (const auto& b : t.bindings()) {
        out.insert(b.name);
        collect_all_names(b.value, out);
      }
      break;
    case TermKind::App:
    case TermKind::Down:
    case TermKind::Up:
      for (const auto& [ref, values] : t.refs().entries())
        for (const auto& v : values) collect_all_names(v, out);
      break;
    default:
      break;
  }
  for (const auto& k : t.children()) collect_all_names(k, out);
}

}  // namespace

FreeNames free_names(const Term& t) {
  FreeNames out;
  std::vector<std::string> bound;
  collect_open(t, bound, out.variables, /*var_sub_binds=*/false);
  collect_refs(t, out.references);
  return out;
}

FreeNames free_names(const Sum& s) {
  FreeNames out;
  for (const auto& t : s.summands()) {
    FreeNames f = free_names(t);
    out.variables.insert(f.variables.begin(), f.variables.end());
    out.references.insert(f.references.begin(), f.references.end());
  }
  return out;
}

std::set<std::string> open_variables(const Term& t) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  collect_open(t, bound, out, /*var_sub_binds=*/true);
  return out;
}

std::set<std::string> all_variable_names(const Term& t) {
  std::set<std::string> out;
  collect_all_names(t, out);
  return out;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string stem = base;
  while (!stem.empty() && (std::isdigit(static_cast<unsigned char>(stem.back())) || stem.back() == '\''))
    stem.pop_back();
  if (stem.empty() || is_canonical_name(stem)) stem = "v";
  if (!avoid.count(stem)) return stem;
  for (std::size_t i = 1;; ++i) {
    std::string candidate = stem + std::to_string(i);
    if (!avoid.count(candidate)) return candidate;
  }
}

Term rename_free(const Term& t, const std::string& from, const std::string& to) {
  auto refs = [&](const RefSubst& r) {
    RefSubst::Map m;
    for (const auto& [ref, values] : r.entries()) {
      auto& out = m[ref];
      for (const auto& v : values) out.push_back(rename_free(v, from, to));
    }
    return RefSubst(std::move(m));
  };
  switch (t.kind()) {
    case TermKind::Var:
      return t.name() == from ? Term::var(to, t.pos()) : t;
    case TermKind::Unit:
    case TermKind::Get:
      return t;
    case TermKind::Lam:
      if (t.name() == from) return t;
      return Term::lam(t.name(), t.annotation(), rename_free(t.body(), from, to), t.hint(),
                       t.pos());
    case TermKind::VarSub: {
      std::vector<VarBinding> bs;
      bool shadows = false;
      for (const auto& b : t.bindings()) {
        bs.push_back(VarBinding{b.name, rename_free(b.value, from, to), b.hint});
        shadows = shadows || b.name == from;
      }
      Term body = shadows ? t.body() : rename_free(t.body(), from, to);
      return Term::var_sub(std::move(bs), std::move(body), t.pos());
    }
    case TermKind::App:
      return Term::app(rename_free(t.fun(), from, to), rename_free(t.arg(), from, to),
                       refs(t.refs()), t.pos());
    case TermKind::Down:
      return Term::down(refs(t.refs()), rename_free(t.body(), from, to), t.pos());
    case TermKind::Up:
      return Term::up(refs(t.refs()), rename_free(t.body(), from, to), t.pos());
    case TermKind::Par: {
      std::vector<Term> kids;
      for (const auto& k : t.children()) kids.push_back(rename_free(k, from, to));
      return Term::par(std::move(kids), t.pos());
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Substitutions

VarSubst to_var_subst(const std::vector<VarBinding>& bindings) {
  VarSubst s;
  for (const auto& b : bindings) s.emplace(b.name, b.value);
  return s;
}

std::vector<VarBinding> to_bindings(const VarSubst& sigma) {
  std::vector<VarBinding> out;
  for (const auto& [name, value] : sigma) {
    out.push_back(VarBinding{name, value, is_canonical_name(name) ? std::string() : name});
  }
  return out;
}

namespace {

std::set<std::string> range_open_variables(const VarSubst& sigma) {
  std::set<std::string> out;
  for (const auto& [name, value] : sigma) {
    auto fv = open_variables(value);
    out.insert(fv.begin(), fv.end());
  }
  return out;
}

std::set<std::string> avoid_set(const Term& body, const VarSubst& sigma) {
  std::set<std::string> avoid = all_variable_names(body);
  for (const auto& [name, value] : sigma) {
    avoid.insert(name);
    auto names = all_variable_names(value);
    avoid.insert(names.begin(), names.end());
  }
  return avoid;
}

}  // namespace

Term meta_apply_value(const VarSubst& sigma, const Term& value) {
  switch (value.kind()) {
    case TermKind::Var: {
      auto it = sigma.find(value.name());
      return it == sigma.end() ? value : it->second;
    }
    case TermKind::Unit:
      return value;
    case TermKind::Lam: {
      if (sigma.empty()) return value;
      std::string binder = value.name();
      Term body = value.body();
      if (sigma.count(binder) || range_open_variables(sigma).count(binder)) {
        std::string fresh = fresh_name(binder, avoid_set(body, sigma));
        body = rename_free(body, binder, fresh);
        binder = fresh;
      }
      std::string hint = value.hint().empty() && !is_canonical_name(value.name()) ? value.name()
                                                                                 : value.hint();
      return Term::lam(binder, value.annotation(), Term::var_sub(to_bindings(sigma), body),
                       std::move(hint), value.pos());
    }
    default:
      throw UsageError("meta_apply_value expects a value");
  }
}

VarSubst compose_var_substs(const VarSubst& sigma, const VarSubst& tau) {
  VarSubst out;
  for (const auto& [name, value] : sigma) out.emplace(name, meta_apply_value(tau, value));
  for (const auto& [name, value] : tau) out.emplace(name, value);  // no-op when σ defines it
  return out;
}

RefSubst juxtapose_ref_substs(const RefSubst& v, const RefSubst& w) {
  RefSubst::Map m = v.entries();
  for (const auto& [ref, values] : w.entries()) {
    auto& out = m[ref];
    out.insert(out.end(), values.begin(), values.end());
  }
  return RefSubst(std::move(m));
}

RefSubst meta_apply_ref_subst(const VarSubst& sigma, const RefSubst& v) {
  if (sigma.empty()) return v;
  RefSubst::Map m;
  for (const auto& [ref, values] : v.entries()) {
    auto& out = m[ref];
    for (const auto& value : values) out.push_back(meta_apply_value(sigma, value));
  }
  return RefSubst(std::move(m));
}

bool ref_subst_included(const RefSubst& small, const RefSubst& big) {
  for (const auto& [ref, values] : small.entries()) {
    if (values.empty()) continue;
    const auto* other = big.find(ref);
    if (!other) return false;
    // both sides are sorted multisets
    std::size_t j = 0;
    for (const auto& v : values) {
      while (j < other->size() && (*other)[j] < v) ++j;
      if (j == other->size() || !((*other)[j] == v)) return false;
      ++j;
    }
  }
  return true;
}

Term substitute(const Term& t, const VarSubst& sigma) {
  if (sigma.empty()) return t;
  auto refs = [&](const RefSubst& r) {
    RefSubst::Map m;
    for (const auto& [ref, values] : r.entries()) {
      auto& out = m[ref];
      for (const auto& v : values) out.push_back(substitute(v, sigma));
    }
    return RefSubst(std::move(m));
  };
  switch (t.kind()) {
    case TermKind::Var: {
      auto it = sigma.find(t.name());
      return it == sigma.end() ? t : it->second;
    }
    case TermKind::Unit:
    case TermKind::Get:
      return t;
    case TermKind::Lam: {
      VarSubst inner = sigma;
      inner.erase(t.name());
      if (inner.empty()) return t;
      std::string binder = t.name();
      Term body = t.body();
      if (range_open_variables(inner).count(binder)) {
        std::string fresh = fresh_name(binder, avoid_set(body, inner));
        body = rename_free(body, binder, fresh);
        binder = fresh;
      }
      return Term::lam(binder, t.annotation(), substitute(body, inner), t.hint(), t.pos());
    }
    case TermKind::VarSub: {
      std::vector<VarBinding> bs;
      VarSubst inner = sigma;
      for (const auto& b : t.bindings()) {
        bs.push_back(VarBinding{b.name, substitute(b.value, sigma), b.hint});
        inner.erase(b.name);
      }
      Term body = t.body();
      if (!inner.empty()) {
        auto captured = range_open_variables(inner);
        for (auto& b : bs) {
          if (!captured.count(b.name)) continue;
          std::string fresh = fresh_name(b.name, avoid_set(body, inner));
          body = rename_free(body, b.name, fresh);
          b.name = fresh;
        }
        body = substitute(body, inner);
      }
      return Term::var_sub(std::move(bs), std::move(body), t.pos());
    }
    case TermKind::App:
      return Term::app(substitute(t.fun(), sigma), substitute(t.arg(), sigma), refs(t.refs()),
                       t.pos());
    case TermKind::Down:
      return Term::down(refs(t.refs()), substitute(t.body(), sigma), t.pos());
    case TermKind::Up:
      return Term::up(refs(t.refs()), substitute(t.body(), sigma), t.pos());
    case TermKind::Par: {
      std::vector<Term> kids;
      for (const auto& k : t.children()) kids.push_back(substitute(k, sigma));
      return Term::par(std::move(kids), t.pos());
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Paths

Term with_child(const Term& t, std::size_t index, Term replacement) {
  switch (t.kind()) {
    case TermKind::Lam:
      return Term::lam(t.name(), t.annotation(), std::move(replacement), t.hint(), t.pos());
    case TermKind::VarSub:
      return Term::var_sub(t.bindings(), std::move(replacement), t.pos());
    case TermKind::App:
      if (index == 0) return Term::app(std::move(replacement), t.arg(), t.refs(), t.pos());
      return Term::app(t.fun(), std::move(replacement), t.refs(), t.pos());
    case TermKind::Down:
      return Term::down(t.refs(), std::move(replacement), t.pos());
    case TermKind::Up:
      return Term::up(t.refs(), std::move(replacement), t.pos());
    case TermKind::Par: {
      std::vector<Term> kids = t.children();
      kids.at(index) = std::move(replacement);
      return Term::par(std::move(kids), t.pos());
    }
    default:
      throw UsageError("with_child on a leaf");
  }
}

Term replace_at(const Term& root, const std::vector<std::uint32_t>& path, Term replacement) {
  std::function<Term(const Term&, std::size_t)> go = [&](const Term& t, std::size_t depth) {
    if (depth == path.size()) return replacement;
    return with_child(t, path[depth], go(t.child(path[depth]), depth + 1));
  };
  return go(root, 0);
}

const Term& subterm_at(const Term& root, const std::vector<std::uint32_t>& path) {
  const Term* t = &root;
  for (auto i : path) t = &t->child(i);
  return *t;
}

}  // namespace lces
