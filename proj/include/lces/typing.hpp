#pragma once

// Stratified type-and-effect system: reference contexts, subtyping and
// syntax-directed inference, plus the subject-reduction and progress
// checks over reduction graphs.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lces/reduction.hpp"
#include "lces/report.hpp"
#include "lces/syntax.hpp"

namespace lces {

/// Ordered reference context; the order is the stratification order.
using RefContext = std::vector<std::pair<std::string, Type>>;
using VarContext = std::map<std::string, Type>;

struct Judgment {
  Type type;
  Effect effect;
  friend bool operator==(const Judgment&, const Judgment&) = default;
};

std::string print(const Judgment& j);

enum class TypeErrorKind {
  Stratification,
  Mismatch,
  NotAFunction,
  UnboundReference,
  UnboundVariable,
  BehaviorInDomain,
  IllFormedType,
  EmptySum,
  NoJoin,
};

const char* type_error_kind_name(TypeErrorKind k);

class TypeError : public std::runtime_error {
 public:
  TypeError(TypeErrorKind kind, std::string rule, std::string message, SourcePos pos = {});

  TypeErrorKind kind() const { return kind_; }
  /// Name of the typing rule that failed, e.g. "app" or "get".
  const std::string& rule() const { return rule_; }
  const std::string& message() const { return message_; }
  SourcePos pos() const { return pos_; }

 private:
  TypeErrorKind kind_;
  std::string rule_;
  std::string message_;
  SourcePos pos_;
};

struct StratificationError {
  std::size_t index = 0;   // offending entry
  std::string ref;         // its name
  std::string missing;     // the reference it may not mention (empty: other defect)
  std::string message;
};

std::optional<StratificationError> check_stratification(const RefContext& refs);

const Type* lookup_ref(const RefContext& refs, const std::string& r);

/// R ⊢ α and e ⊆ dom(R). A-types are required for arrow domains and
/// reference contents.
bool well_formed(const RefContext& refs, const Type& t, const Effect& e = {});

bool subtype(const RefContext& refs, const Type& lhs, const Type& rhs);
bool subtype(const RefContext& refs, const Judgment& lhs, const Judgment& rhs);

/// Least common supertype / greatest common subtype under structural
/// subtyping; nullopt when the shapes differ.
std::optional<Type> join_types(const Type& a, const Type& b);
std::optional<Type> meet_types(const Type& a, const Type& b);

Judgment infer(const RefContext& refs, const VarContext& gamma, const Term& t);
Judgment infer(const RefContext& refs, const VarContext& gamma, const Sum& s);
Judgment infer(const RefContext& refs, const Sum& s);

/// Every edge of the reduction graph of `s` must lead to a term whose
/// inferred judgment is below the source's.
Report check_subject_reduction(const RefContext& refs, const Sum& s, Mode mode = Mode::Full,
                               GraphLimits limits = {});

/// Each ∥-leaf of each summand of a normal form must be a value or a stuck
/// read/application.
Report check_progress(const RefContext& refs, const Sum& s);
bool is_stuck_leaf(const Term& t);

}  // namespace lces
