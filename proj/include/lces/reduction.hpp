#pragma once

// Small-step reduction: redex decomposition through sum, thread and
// applicative contexts, rule application, the →nd variant, strategies,
// traces and reduction graphs.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lces/syntax.hpp"

namespace lces {

enum class RuleTag : std::uint8_t {
  BetaV,
  Subst_Var,
  Subst_Unit,
  Subst_App,
  Subst_Lam,
  Subst_Get,
  Subst_Par,
  Subst_SubstR,
  Subst_SubstRUp,
  Subst_Merge,
  RDown_Val,
  RDown_Par,
  RDown_SwapUp,
  RDown_Merge,
  RDown_App,
  RDown_Get,
  RUp_Par,
  RUp_LApp,
  RUp_RApp,
  RUp_Top,
  ND_GetPick,
  ND_GetSkip,
};

const char* rule_name(RuleTag tag);
std::optional<RuleTag> rule_from_name(std::string_view name);
/// Downward rules other than the read rule: the ones that leave skeletons
/// and reachability sets alone.
bool is_down_structural(RuleTag tag);

enum class Mode { Full, Nd };

using Path = std::vector<std::uint32_t>;

std::string print(const Path& p);

struct RedexSite {
  std::size_t summand = 0;  // 𝐒: index into the canonical summand list
  Path path;                // C and E: child indices from the summand root
  RuleTag tag = RuleTag::BetaV;
  /// ND_GetPick: index among the distinct values of 𝒱(r).
  std::size_t aux = 0;
  /// RUp_Par: Par-child index of the Up node and the sibling selection
  /// (bit i set when the i-th sibling, in child order skipping the Up,
  /// moves under the Up).
  std::size_t up_child = 0;
  std::uint64_t siblings = 0;
  bool top_level = false;   // rewrites at the summand level
  Term redex;
  std::size_t source_digest = 0;
};

/// Every redex site of the canonical sum `s`, in the fixed order used by
/// the leftmost strategy: summands in order, pre-order positions, rule
/// tags, then auxiliary choices. In Nd mode the read rule is replaced by
/// the pick/skip pair and `s` must be simple.
std::vector<RedexSite> decompose(const Sum& s, Mode mode = Mode::Full);

/// Applies a site produced by decompose on the same sum; the result is
/// canonical. Throws UsageError when the site does not belong to `s`.
Sum apply(const Sum& s, const RedexSite& site);

struct Step {
  RedexSite site;
  Sum result;
};

std::vector<Step> steps(const Sum& s, Mode mode = Mode::Full);
/// Distinct canonical one-step reducts.
std::vector<Sum> successors_full(const Sum& s);
std::vector<Term> successors_nd(const Term& t);

enum class Strategy { Leftmost, Random };
enum class TraceStatus { NormalForm, Budget, Cycle };
const char* status_name(TraceStatus s);

struct Trace {
  Sum initial;
  std::vector<Step> steps;
  TraceStatus status = TraceStatus::NormalForm;
  const Sum& final_state() const { return steps.empty() ? initial : steps.back().result; }
};

Trace run(const Sum& s, Strategy strategy, std::uint64_t seed, std::size_t max_steps,
          Mode mode = Mode::Full);

struct GraphLimits {
  std::size_t max_states = 20000;
  std::size_t max_depth = 1000000;
};

struct NormalForms {
  std::vector<Sum> forms;   // sorted, canonical
  bool complete = true;
  std::size_t states = 0;
};

NormalForms enumerate_normal_forms(const Sum& s, Mode mode, GraphLimits limits = {});

enum class NodeStatus { Expanded, Normal, Truncated };

struct GraphEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  RuleTag tag = RuleTag::BetaV;
  Path path;
  std::size_t summand = 0;
};

struct ReductionGraph {
  std::vector<Sum> nodes;  // nodes[0] is the start
  std::vector<NodeStatus> status;
  std::vector<std::size_t> depth;
  std::vector<GraphEdge> edges;
  bool complete = true;

  std::vector<std::size_t> normal_nodes() const;
};

ReductionGraph reduction_graph(const Sum& s, Mode mode, GraphLimits limits = {});

std::string to_dot(const ReductionGraph& g, std::size_t label_width = 60);
/// One JSON object per line: {"step", "rule", "site_path", "term"}.
std::string trace_to_jsonl(const Trace& t);

}  // namespace lces
