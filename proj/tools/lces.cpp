// Command-line driver for .lces and .lc files.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lces/analysis.hpp"
#include "lces/lambda_c.hpp"
#include "lces/parser.hpp"
#include "lces/printer.hpp"
#include "lces/reduction.hpp"
#include "lces/typing.hpp"

using namespace lces;
using nlohmann::json;

namespace {

struct Globals {
  bool json = false;
  bool pretty = false;
};

Globals g;
std::string current_file;  // for diagnostics

std::string show(const Sum& s) { return print(s, PrintOptions{g.pretty}); }

void diagnostic(const std::string& file, SourcePos pos, const std::string& rule,
                const std::string& message) {
  if (g.json) {
    json j{{"file", file}, {"line", pos.line}, {"col", pos.col}, {"rule", rule},
           {"message", message}};
    std::cout << j.dump() << '\n';
  } else {
    std::cerr << file << ':' << pos.line << ':' << pos.col << ": " << rule << ": " << message
              << '\n';
  }
}

bool is_lc(const std::string& path) {
  return path.size() >= 3 && path.compare(path.size() - 3, 3, ".lc") == 0;
}

SourceFile load(const std::string& path) {
  current_file = path;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), is_lc(path) ? Dialect::Lc : Dialect::Lces);
}

/// The λ_cES sum a file denotes: the body, or the translation of a program.
Sum denotation(const SourceFile& f) {
  if (f.program) return Sum(translate(*f.program));
  return canonicalize(f.body);
}

Term simple(const SourceFile& f, const std::string& path) {
  Sum s = denotation(f);
  if (!s.is_simple()) throw UsageError(path + " must hold a single term, not a sum");
  return s.only();
}

Mode parse_mode(const std::string& m) { return m == "nd" ? Mode::Nd : Mode::Full; }

std::string refs_directive(const RefContext& refs) {
  if (refs.empty()) return "";
  std::string out = "refs ";
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (i) out += "; ";
    out += refs[i].first + " : " + print(refs[i].second);
  }
  return out + ".\n";
}

int emit_report(const Report& rep) {
  if (g.json) {
    std::cout << rep.json() << '\n';
  } else {
    std::cout << rep.text();
  }
  return rep.ok() ? 0 : 1;
}

// ---------------------------------------------------------------------------

int cmd_check(const std::string& path) {
  SourceFile f = load(path);
  if (auto err = check_stratification(f.refs)) {
    diagnostic(path, {1, 1}, "stratification", err->message);
    return 1;
  }
  Judgment j = infer(f.refs, denotation(f));
  if (f.expected && !subtype(f.refs, j, *f.expected)) {
    diagnostic(path, {1, 1}, "expect",
               "inferred " + print(j) + " is not below the expected " + print(*f.expected));
    return 1;
  }
  if (g.json) {
    std::cout << json{{"file", path}, {"type", print(j.type)}, {"effect", print(j.effect)}}.dump()
              << '\n';
  } else {
    std::cout << print(j) << '\n';
  }
  return 0;
}

struct RunArgs {
  std::string strategy = "leftmost";
  std::uint64_t seed = 0;
  std::size_t max_steps = 1000;
  std::string mode = "full";
  std::string trace;
};

int cmd_run(const std::string& path, const RunArgs& a) {
  SourceFile f = load(path);
  Strategy st = a.strategy == "random" ? Strategy::Random : Strategy::Leftmost;
  Trace t = run(denotation(f), st, a.seed, a.max_steps, parse_mode(a.mode));
  if (!a.trace.empty()) {
    std::ofstream out(a.trace);
    if (!out) throw UsageError("cannot write " + a.trace);
    out << trace_to_jsonl(t);
  }
  if (g.json) {
    std::cout << json{{"status", status_name(t.status)},
                      {"steps", t.steps.size()},
                      {"final", print(t.final_state())}}
                     .dump()
              << '\n';
  } else {
    std::cout << "status: " << status_name(t.status) << "\nsteps: " << t.steps.size()
              << "\nfinal: " << show(t.final_state()) << '\n';
  }
  return 0;
}

struct GraphArgs {
  std::string mode = "full";
  std::size_t max_states = 20000;
  std::size_t max_depth = 1000000;
  std::string dot;
  std::size_t width = 60;
};

int cmd_enumerate(const std::string& path, const GraphArgs& a) {
  SourceFile f = load(path);
  NormalForms nf =
      enumerate_normal_forms(denotation(f), parse_mode(a.mode), {a.max_states, a.max_depth});
  if (g.json) {
    json forms = json::array();
    for (const auto& s : nf.forms) forms.push_back(print(s));
    std::cout << json{{"normal_forms", forms}, {"complete", nf.complete}, {"states", nf.states}}
                     .dump()
              << '\n';
  } else {
    for (const auto& s : nf.forms) std::cout << show(s) << '\n';
    std::cout << "complete: " << (nf.complete ? "true" : "false") << " (" << nf.states
              << " states)\n";
  }
  return 0;
}

int cmd_graph(const std::string& path, const GraphArgs& a) {
  SourceFile f = load(path);
  ReductionGraph gr =
      reduction_graph(denotation(f), parse_mode(a.mode), {a.max_states, a.max_depth});
  std::string dot = to_dot(gr, a.width);
  if (a.dot.empty() || a.dot == "-") {
    std::cout << dot;
  } else {
    std::ofstream out(a.dot);
    if (!out) throw UsageError("cannot write " + a.dot);
    out << dot;
    std::cout << gr.nodes.size() << " states, " << gr.edges.size() << " edges, "
              << (gr.complete ? "complete" : "truncated") << '\n';
  }
  return 0;
}

int cmd_translate(const std::string& path, const std::string& output) {
  SourceFile f = load(path);
  if (!f.program) throw UsageError(path + " is not a λ_C program");
  std::string text = refs_directive(f.refs) + "term " + print(translate(*f.program)) + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output);
    if (!out) throw UsageError("cannot write " + output);
    out << text;
  }
  return 0;
}

int cmd_compare(const std::string& pa, const std::string& pb, const std::string& bound,
                bool literal) {
  Term m = simple(load(pa), pa);
  Term n = simple(load(pb), pb);
  bool leq = preorder_leq(m, n);
  json j{{"leq", leq}};
  std::string text = std::string("leq: ") + (leq ? "true" : "false") + "\n";
  if (!bound.empty()) {
    bool b = preorder_bounded(m, n, parse_ref_subst(bound),
                              literal ? BoundReading::Literal : BoundReading::Symmetric);
    j["bounded"] = b;
    text += std::string("bounded: ") + (b ? "true" : "false") + "\n";
  }
  if (g.json) {
    std::cout << j.dump() << '\n';
  } else {
    std::cout << text;
  }
  return 0;
}

struct MetaArgs {
  std::string suite = "sr";
  std::size_t max_states = 20000;
  std::size_t budget = 32;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  std::string mode = "nd";
  std::vector<std::string> substs;
  std::string with;
};

int cmd_meta(const std::string& path, const MetaArgs& a) {
  SourceFile f = load(path);
  if (a.suite == "sr") {
    return emit_report(
        check_subject_reduction(f.refs, denotation(f), parse_mode(a.mode), {a.max_states}));
  }
  if (a.suite == "progress") {
    NormalForms nf = enumerate_normal_forms(denotation(f), Mode::Full, {a.max_states});
    Report rep;
    rep.name = "progress";
    rep.truncated = !nf.complete;
    for (const auto& s : nf.forms) rep.merge(check_progress(f.refs, s));
    return emit_report(rep);
  }
  if (a.suite == "confluence") {
    ConfluenceOptions o;
    o.join_budget = a.budget;
    o.max_join_states = a.max_states;
    return emit_report(check_local_confluence(denotation(f), o));
  }
  if (a.suite == "simulation") {
    if (f.program) {
      SimulationLimits lim;
      lim.step_budget = a.budget;
      lim.max_nd_states = a.max_states;
      return emit_report(check_simulation(*f.program, lim));
    }
    if (a.with.empty()) throw UsageError("simulation on a .lces file needs --with FILE");
    return emit_report(check_simulation_preorder(simple(f, path), simple(load(a.with), a.with),
                                                 {a.budget, a.max_states}));
  }
  if (a.suite == "wb") {
    std::vector<RefSubst> substs;
    for (const auto& s : a.substs) substs.push_back(parse_ref_subst(s));
    ProbeOptions o;
    o.step_budget = std::max<std::size_t>(a.budget, 1) * 8;
    o.samples = a.samples;
    o.seed = a.seed;
    o.exhaustive_states = a.max_states;
    return emit_report(well_behaved_probe(simple(f, path), substs, o).report());
  }
  throw UsageError("unknown suite " + a.suite);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduction, typing and analysis for λ_cES terms and λ_C programs"};
  app.require_subcommand(1);
  app.add_flag("--json", g.json, "Machine-readable output");
  app.add_flag("--pretty", g.pretty, "Unicode notation in printed terms");

  std::string file, file_b, output, bound;
  bool literal = false;
  RunArgs ra;
  GraphArgs ga;
  MetaArgs ma;

  auto* check = app.add_subcommand("check", "Check stratification and infer the type");
  check->add_option("FILE", file)->required();

  auto* runc = app.add_subcommand("run", "Reduce with a strategy");
  runc->add_option("FILE", file)->required();
  runc->add_option("--strategy", ra.strategy)->check(CLI::IsMember({"leftmost", "random"}));
  runc->add_option("--seed", ra.seed);
  runc->add_option("--max-steps", ra.max_steps);
  runc->add_option("--mode", ra.mode)->check(CLI::IsMember({"full", "nd"}));
  runc->add_option("--trace", ra.trace, "Write the trace as JSON lines");

  auto add_limits = [&](CLI::App* c) {
    c->add_option("--mode", ga.mode)->check(CLI::IsMember({"full", "nd"}));
    c->add_option("--max-states", ga.max_states);
    c->add_option("--max-depth", ga.max_depth);
  };
  auto* enumerate = app.add_subcommand("enumerate", "List the reachable normal forms");
  enumerate->add_option("FILE", file)->required();
  add_limits(enumerate);

  auto* graph = app.add_subcommand("graph", "Export the reduction graph in DOT");
  graph->add_option("FILE", file)->required();
  graph->add_option("--dot", ga.dot, "Output file ('-' for stdout)");
  graph->add_option("--label-width", ga.width);
  add_limits(graph);

  auto* trans = app.add_subcommand("translate", "Translate a λ_C program");
  trans->add_option("FILE", file)->required();
  trans->add_option("-o,--output", output);

  auto* compare = app.add_subcommand("compare", "Decide the term preorders");
  compare->add_option("FILE_A", file)->required();
  compare->add_option("FILE_B", file_b)->required();
  compare->add_option("--bound", bound, "Reference substitution bounding the difference");
  compare->add_flag("--literal", literal, "Crosswise reading of the application clause");

  auto* meta = app.add_subcommand("meta", "Run an analysis suite");
  meta->add_option("FILE", file)->required();
  meta->add_option("--suite", ma.suite)
      ->check(CLI::IsMember({"sr", "progress", "confluence", "simulation", "wb"}));
  meta->add_option("--max-states", ma.max_states);
  meta->add_option("--budget", ma.budget, "Step budget of searches");
  meta->add_option("--samples", ma.samples);
  meta->add_option("--seed", ma.seed);
  meta->add_option("--mode", ma.mode)->check(CLI::IsMember({"full", "nd"}));
  meta->add_option("--subst", ma.substs, "Substitution offered by the environment (repeatable)");
  meta->add_option("--with", ma.with, "Upper term for the preorder simulation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*check) return cmd_check(file);
    if (*runc) return cmd_run(file, ra);
    if (*enumerate) return cmd_enumerate(file, ga);
    if (*graph) return cmd_graph(file, ga);
    if (*trans) return cmd_translate(file, output);
    if (*compare) return cmd_compare(file, file_b, bound, literal);
    if (*meta) return cmd_meta(file, ma);
  } catch (const ParseError& e) {
    diagnostic(current_file, {e.line(), e.col()}, "parse", e.message());
    return 1;
  } catch (const TypeError& e) {
    diagnostic(current_file, e.pos(), e.rule(), e.message());
    return 1;
  } catch (const UsageError& e) {
    diagnostic(current_file.empty() ? file : current_file, {0, 0}, "usage", e.what());
    return 2;
  }
  return 0;
}
