#pragma once

// Metatheory probes: skeletons and reachability, the preorders ⊑ and ⋈,
// the local-confluence checker, and the environment-reduction game used to
// probe well-behavedness.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lces/reduction.hpp"
#include "lces/report.hpp"
#include "lces/syntax.hpp"

namespace lces {

/// Removes every Down not under a λ and empties the λ-substitutions of the
/// applications there, which downward steps extend. The result is canonical.
Term skeleton(const Term& t);

enum class OccurrenceKind { Get, App };

struct Occurrence {
  Path path;
  OccurrenceKind kind = OccurrenceKind::Get;
  std::string ref;  // Get only
};

/// Get and App occurrences not under a λ, in pre-order.
std::vector<Occurrence> occurrences(const Term& t);

/// Merge of the Down substitutions in scope of `o`, with the variable
/// substitutions on the path pushed into them. Throws UsageError when `o`
/// does not address a Get or App outside every λ.
RefSubst reach(const Term& t, const Occurrence& o);

/// M ⊑ N.
bool preorder_leq(const Term& m, const Term& n);

/// Reading of the App clause of ⋈. Symmetric compares each side with its
/// own λ-substitution; Literal pairs them crosswise as printed in the
/// definition.
enum class BoundReading { Symmetric, Literal };

/// M ⋈_V N.
bool preorder_bounded(const Term& m, const Term& n, const RefSubst& bound,
                      BoundReading reading = BoundReading::Symmetric);

struct SearchLimits {
  std::size_t depth = 32;
  std::size_t max_states = 20000;
};

/// For every →nd reduct m' of m, looks for n →* n' with m' ⊑ n'.
Report check_simulation_preorder(const Term& m, const Term& n, SearchLimits limits = {});

struct ConfluenceOptions {
  std::size_t join_budget = 32;
  std::size_t max_join_states = 20000;  // per side of one pair
  std::size_t max_sources = 64;         // graph states whose divergences are checked
};

/// Every pair of distinct one-step full reducts of the sum, and of the
/// states reachable from it up to `max_sources`, must have a common reduct.
Report check_local_confluence(const Sum& s, ConfluenceOptions options = {});

// ---------------------------------------------------------------------------
// Environment game

struct EnvDirective {
  enum class Kind { Internal, Absorb, Inject };
  Kind kind = Kind::Internal;
  /// Internal: restrict to sites with this rule, then take the choice-th.
  std::optional<RuleTag> rule;
  std::size_t choice = 0;

  static EnvDirective internal(std::size_t choice = 0, std::optional<RuleTag> rule = {});
  static EnvDirective absorb();
  static EnvDirective inject();
};

std::string print(const EnvDirective& d);

struct EnvSchedule {
  std::vector<RefSubst> substs;  // consumed in order by inject
  std::vector<EnvDirective> directives;
};

struct EnvTrace {
  std::vector<Term> states;          // states[0] is the start
  std::vector<EnvDirective> steps;   // steps[i] leads from states[i]
  std::vector<RefSubst> emitted;     // absorbed Up substitutions in order
};

class ScheduleError : public std::runtime_error {
 public:
  ScheduleError(std::size_t step, const std::string& message);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

EnvTrace env_reduce(const Term& m, const EnvSchedule& schedule);

struct ProbeOptions {
  std::size_t step_budget = 200;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  /// Exhaustive exploration of all schedules is attempted up to this many
  /// distinct states.
  std::size_t exhaustive_states = 20000;
};

struct ProbeResult {
  std::size_t max_upward_emissions = 0;
  std::vector<Term> emitted_values;  // canonical, sorted, distinct
  std::size_t samples = 0;
  bool exhaustive = false;   // every schedule was covered
  bool unbounded = false;    // exhaustive search met a cycle
  bool truncated = false;    // a sample hit the step budget

  Report report() const;
};

ProbeResult well_behaved_probe(const Term& m, const std::vector<RefSubst>& substs,
                               ProbeOptions options = {});

}  // namespace lces
