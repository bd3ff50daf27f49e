#pragma once

// The source calculus λ_C: weak call-by-value with set/get on global
// cumulative stores and parallel threads, its translation into λ_cES and
// the simulation check relating the two.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lces/report.hpp"
#include "lces/syntax.hpp"

namespace lces {

enum class LCKind : std::uint8_t { Var, Unit, Lam, App, Set, Get, Par };

struct LCNode;

class LCTerm {
 public:
  LCTerm() = default;

  static LCTerm var(std::string name);
  static LCTerm unit();
  static LCTerm lam(std::string binder, Type annotation, LCTerm body, std::string hint = {});
  static LCTerm app(LCTerm fun, LCTerm arg);
  static LCTerm set(std::string ref, LCTerm value);
  static LCTerm get(std::string ref);
  static LCTerm par(std::vector<LCTerm> threads);

  bool valid() const { return node_ != nullptr; }
  LCKind kind() const;
  bool is_value() const;
  const std::string& name() const;  // Var, Lam binder, Set/Get reference
  const std::string& hint() const;
  const Type& annotation() const;
  const LCTerm& body() const;   // Lam
  const LCTerm& fun() const;    // App
  const LCTerm& arg() const;    // App
  const LCTerm& value() const;  // Set
  const std::vector<LCTerm>& children() const;
  std::size_t hash() const;

  friend std::strong_ordering compare(const LCTerm& a, const LCTerm& b);
  friend bool operator==(const LCTerm& a, const LCTerm& b) { return compare(a, b) == 0; }
  friend std::strong_ordering operator<=>(const LCTerm& a, const LCTerm& b) {
    return compare(a, b);
  }

 private:
  explicit LCTerm(std::shared_ptr<const LCNode> n) : node_(std::move(n)) {}
  static LCTerm make(LCNode n);
  std::shared_ptr<const LCNode> node_;
};

struct LCNode {
  LCKind kind = LCKind::Unit;
  std::string name;
  std::string hint;
  Type annotation;
  std::vector<LCTerm> kids;
  std::size_t hash = 0;
};

using Store = std::pair<std::string, LCTerm>;

/// A program: threads and store entries, both kept as sorted multisets.
struct LCProgram {
  std::vector<LCTerm> threads;
  std::vector<Store> stores;

  friend std::strong_ordering operator<=>(const LCProgram&, const LCProgram&) = default;
  friend bool operator==(const LCProgram&, const LCProgram&) = default;
};

struct LCProgramHash {
  std::size_t operator()(const LCProgram& p) const;
};

/// Level-indexed binder names, flattened and sorted threads and stores.
LCProgram canonicalize(const LCProgram& p);
LCTerm lc_canonicalize(const LCTerm& t, std::size_t level = 0);
LCTerm lc_substitute(const LCTerm& t, const std::string& x, const LCTerm& v);

std::vector<LCProgram> lc_successors(const LCProgram& p);

std::string print(const LCTerm& t);
std::string print(const LCProgram& p);

/// Literal embedding of a λ_C term with no store in scope.
Term embed(const LCTerm& t);
/// Translation of a whole program: applications and reads not under a λ
/// receive the store substitution; set(r, V) becomes
/// [𝒱_S]L((\x:Unit. [r -> {V}]^ *) *).
Term translate(const LCProgram& p);
RefSubst store_substitution(const LCProgram& p);

/// The relation m ⇝s n: equal up to variable substitutions still pending
/// under λ in m. Both terms are canonicalized first.
bool subst_related(const Term& m, const Term& n);

struct SimulationLimits {
  std::size_t step_budget = 64;        // →nd depth per λ_C step
  std::size_t max_nd_states = 20000;   // per λ_C step
  std::size_t max_lc_states = 2000;    // λ_C states explored
};

Report check_simulation(const LCProgram& p, SimulationLimits limits = {});

}  // namespace lces
