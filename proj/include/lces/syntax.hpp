#pragma once

// Abstract syntax of the concurrent call-by-value calculus with explicit
// substitutions: values, terms and sums, plus the meta-operations on
// variable and reference substitutions.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lces {

/// Raised when an operation is called outside its contract (stale redex
/// site, invalid occurrence, non-simple term in nd mode, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using Effect = std::set<std::string>;

enum class TypeKind : std::uint8_t { Unit, Behavior, Arrow, Ref };

/// Types of the stratified type-and-effect system. `Behavior` is the opaque
/// type of parallel compositions; every other type is a value type.
class Type {
 public:
  Type();  // Unit

  static Type unit();
  static Type behavior();
  static Type arrow(Type domain, Effect effect, Type codomain);
  static Type ref(std::string ref, Type content);

  TypeKind kind() const;
  bool is_value_type() const { return kind() != TypeKind::Behavior; }

  // Arrow
  const Type& domain() const;
  const Effect& effect() const;
  const Type& codomain() const;
  // Ref
  const std::string& ref_name() const;
  const Type& content() const;

  friend std::strong_ordering compare(const Type& a, const Type& b);
  friend bool operator==(const Type& a, const Type& b) { return compare(a, b) == 0; }
  friend std::strong_ordering operator<=>(const Type& a, const Type& b) { return compare(a, b); }

 private:
  struct Node;
  explicit Type(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

enum class TermKind : std::uint8_t { Var, Unit, Lam, VarSub, App, Get, Down, Up, Par };

struct SourcePos {
  std::uint32_t line = 0;
  std::uint32_t col = 0;
};

struct TermNode;
class RefSubst;
struct VarBinding;

/// Immutable, shared term handle. Structural comparison ignores surface
/// name hints and source positions.
class Term {
 public:
  Term() = default;

  static Term var(std::string name, SourcePos pos = {});
  static Term unit(SourcePos pos = {});
  static Term lam(std::string binder, Type annotation, Term body, std::string hint = {},
                  SourcePos pos = {});
  static Term var_sub(std::vector<VarBinding> bindings, Term body, SourcePos pos = {});
  static Term app(Term fun, Term arg, RefSubst lsub, SourcePos pos = {});
  static Term app(Term fun, Term arg);
  static Term get(std::string ref, SourcePos pos = {});
  static Term down(RefSubst refs, Term body, SourcePos pos = {});
  static Term up(RefSubst refs, Term body, SourcePos pos = {});
  /// A single child is returned as is; nested Par children are kept as given
  /// (canonicalization flattens them).
  static Term par(std::vector<Term> children, SourcePos pos = {});

  bool valid() const { return node_ != nullptr; }
  TermKind kind() const;
  bool is_value() const;

  const std::string& name() const;  // Var, Lam binder, Get reference
  const std::string& hint() const;  // Lam
  const Type& annotation() const;   // Lam
  const std::vector<VarBinding>& bindings() const;  // VarSub
  const RefSubst& refs() const;     // App (λ-substitution), Down, Up
  const Term& body() const;         // Lam, VarSub, Down, Up
  const Term& fun() const;          // App
  const Term& arg() const;          // App
  const std::vector<Term>& children() const;  // Par
  /// Child addressed by a path index: App 0/1, Lam/VarSub/Down/Up 0, Par i.
  const Term& child(std::size_t i) const;
  std::size_t child_count() const;

  SourcePos pos() const;
  std::size_t hash() const;
  std::size_t size() const;
  std::size_t depth() const;
  const TermNode* node() const { return node_.get(); }

  friend std::strong_ordering compare(const Term& a, const Term& b);
  friend bool operator==(const Term& a, const Term& b) { return compare(a, b) == 0; }
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) { return compare(a, b); }

 private:
  explicit Term(std::shared_ptr<const TermNode> node) : node_(std::move(node)) {}
  static Term make(TermNode node);
  std::shared_ptr<const TermNode> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

/// Finite map from references to finite multisets of values. Multisets are
/// kept as sorted vectors so that equal multisets compare equal.
class RefSubst {
 public:
  using Map = std::map<std::string, std::vector<Term>>;

  RefSubst() = default;
  explicit RefSubst(Map entries);

  static RefSubst single(std::string ref, std::vector<Term> values);

  bool empty() const { return entries_.empty(); }
  bool defines(const std::string& ref) const { return entries_.count(ref) != 0; }
  /// nullptr when undefined at `ref`.
  const std::vector<Term>* find(const std::string& ref) const;
  const Map& entries() const { return entries_; }
  Effect domain() const;
  std::size_t value_count() const;

  void add(const std::string& ref, Term value);

  friend std::strong_ordering compare(const RefSubst& a, const RefSubst& b);
  friend bool operator==(const RefSubst& a, const RefSubst& b) { return compare(a, b) == 0; }

 private:
  Map entries_;
};

struct VarBinding {
  std::string name;
  Term value;
  std::string hint;
};

/// Finite partial function from variables to values.
using VarSubst = std::map<std::string, Term>;

struct TermNode {
  TermKind kind = TermKind::Unit;
  std::string name;
  std::string hint;
  Type annotation;
  std::vector<VarBinding> bindings;
  RefSubst refs;
  std::vector<Term> kids;
  SourcePos pos;
  std::size_t hash = 0;
  std::size_t size = 1;
  std::size_t depth = 1;
};

/// A finite set of summands; the empty set is 0.
class Sum {
 public:
  Sum() = default;
  Sum(Term t);  // NOLINT: a term is a one-summand sum
  explicit Sum(std::vector<Term> summands);

  static Sum zero() { return Sum(); }

  const std::vector<Term>& summands() const { return summands_; }
  bool is_zero() const { return summands_.empty(); }
  bool is_simple() const { return summands_.size() == 1; }
  const Term& only() const;
  std::size_t hash() const;

  friend std::strong_ordering compare(const Sum& a, const Sum& b);
  friend bool operator==(const Sum& a, const Sum& b) { return compare(a, b) == 0; }
  friend std::strong_ordering operator<=>(const Sum& a, const Sum& b) { return compare(a, b); }

 private:
  std::vector<Term> summands_;
};

struct SumHash {
  std::size_t operator()(const Sum& s) const { return s.hash(); }
};

// ---------------------------------------------------------------------------
// Canonical forms

/// True for names produced by canonicalization for bound variables.
bool is_canonical_name(const std::string& name);
std::string canonical_name(std::size_t level);

/// Renames bound variables (λ binders and {σ}ˢ domains) to level-indexed
/// names, flattens and sorts every ∥ spine, and orders multisets. Free
/// variables and references are untouched. `level` is the number of binders
/// enclosing the term; names #0..#level-1 are left alone as free.
Term alpha_canonicalize(const Term& t, std::size_t level = 0);
Sum canonicalize(const Sum& s);
bool term_equal(const Term& a, const Term& b);
bool term_equal(const Sum& a, const Sum& b);

// ---------------------------------------------------------------------------
// Substitution meta-operations

/// σ̄V: pushes σ under a λ binder (capture-avoiding), looks up variables.
Term meta_apply_value(const VarSubst& sigma, const Term& value);
/// (σ,τ): τ is the outer substitution.
VarSubst compose_var_substs(const VarSubst& sigma, const VarSubst& tau);
/// (𝒱,𝒲): pointwise multiset union.
RefSubst juxtapose_ref_substs(const RefSubst& v, const RefSubst& w);
RefSubst meta_apply_ref_subst(const VarSubst& sigma, const RefSubst& v);
/// Pointwise multiset inclusion `small ⊆ big`.
bool ref_subst_included(const RefSubst& small, const RefSubst& big);

VarSubst to_var_subst(const std::vector<VarBinding>& bindings);
std::vector<VarBinding> to_bindings(const VarSubst& sigma);

/// Ordinary capture-avoiding substitution of the whole term (also under λ
/// and inside explicit substitutions). Used to discharge pending
/// substitutions when comparing terms.
Term substitute(const Term& t, const VarSubst& sigma);

struct FreeNames {
  std::set<std::string> variables;
  std::set<std::string> references;
};

/// Free variables respecting λ binders only ({σ}ˢ domains do not bind) and
/// every reference occurring anywhere.
FreeNames free_names(const Term& t);
FreeNames free_names(const Sum& s);
/// Free variables respecting both λ binders and {σ}ˢ domains.
std::set<std::string> open_variables(const Term& t);
/// Every identifier occurring in the term, bound or free.
std::set<std::string> all_variable_names(const Term& t);

/// Replaces the free occurrences of `from` by the variable `to`; `to` must
/// not occur in `t`.
Term rename_free(const Term& t, const std::string& from, const std::string& to);
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

/// Rebuilds `t` with the child at `index` replaced.
Term with_child(const Term& t, std::size_t index, Term replacement);
/// Rebuilds `root` with the node at `path` replaced.
Term replace_at(const Term& root, const std::vector<std::uint32_t>& path, Term replacement);
const Term& subterm_at(const Term& root, const std::vector<std::uint32_t>& path);

}  // namespace lces
