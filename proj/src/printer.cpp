#include "lces/printer.hpp"

#include <cctype>
#include <sstream>
#include <vector>

namespace lces {

namespace {

bool needs_parens_as_domain(const Type& t) {
  return t.kind() == TypeKind::Arrow || t.kind() == TypeKind::Ref;
}

void print_type(std::ostream& os, const Type& t, const PrintOptions& opts) {
  switch (t.kind()) {
    case TypeKind::Unit:
      os << "Unit";
      return;
    case TypeKind::Behavior:
      os << (opts.unicode ? "𝐁" : "B");
      return;
    case TypeKind::Ref:
      os << "Ref " << t.ref_name() << ' ';
      if (t.content().kind() == TypeKind::Arrow || t.content().kind() == TypeKind::Ref) {
        os << '(';
        print_type(os, t.content(), opts);
        os << ')';
      } else {
        print_type(os, t.content(), opts);
      }
      return;
    case TypeKind::Arrow:
      if (needs_parens_as_domain(t.domain())) {
        os << '(';
        print_type(os, t.domain(), opts);
        os << ')';
      } else {
        print_type(os, t.domain(), opts);
      }
      os << " -{" << print(t.effect()) << (opts.unicode ? "}→ " : "}> ");
      print_type(os, t.codomain(), opts);
      return;
  }
}

class TermPrinter {
 public:
  TermPrinter(const PrintOptions& opts, std::set<std::string> free) : opts_(opts) {
    for (const auto& n : free) taken_.push_back(n);
  }

  // `tail`: nothing that could be absorbed by a λ body follows this term.
  void term(std::ostream& os, const Term& t, bool tail) {
    switch (t.kind()) {
      case TermKind::Var:
        os << resolve(t.name());
        return;
      case TermKind::Unit:
        os << '*';
        return;
      case TermKind::Get:
        os << "get " << t.name();
        return;
      case TermKind::Lam: {
        if (!tail) os << '(';
        std::string surface = bind(t.name(), t.hint().empty() ? t.name() : t.hint());
        os << (opts_.unicode ? "λ" : "\\") << surface << ':' << print(t.annotation(), opts_)
           << ". ";
        par_level(os, t.body(), true);
        unbind();
        if (!tail) os << ')';
        return;
      }
      case TermKind::VarSub: {
        std::vector<std::string> surfaces;
        std::ostringstream head;
        head << '{';
        for (std::size_t i = 0; i < t.bindings().size(); ++i) {
          const auto& b = t.bindings()[i];
          if (i) head << ", ";
          // values are printed outside the scope of the new names
          std::ostringstream v;
          par_level(v, b.value, true);
          surfaces.push_back(fresh_surface(b.hint.empty() ? b.name : b.hint, surfaces));
          head << surfaces.back() << " := " << v.str();
        }
        head << (opts_.unicode ? "}ˢ " : "}s ");
        os << head.str();
        for (std::size_t i = 0; i < t.bindings().size(); ++i) push(t.bindings()[i].name, surfaces[i]);
        prefix_body(os, t.body(), tail);
        for (std::size_t i = 0; i < t.bindings().size(); ++i) unbind();
        return;
      }
      case TermKind::App: {
        os << '(';
        const Term& f = t.fun();
        bool wrap = f.kind() == TermKind::VarSub || f.kind() == TermKind::Down ||
                    f.kind() == TermKind::Up || f.kind() == TermKind::Par;
        if (wrap) os << '(';
        term(os, f, wrap);
        if (wrap) os << ')';
        os << ' ';
        const Term& a = t.arg();
        if (a.kind() == TermKind::Par) {
          os << '(';
          par_level(os, a, true);
          os << ')';
        } else {
          term(os, a, true);
        }
        os << ')';
        if (!t.refs().empty()) {
          os << '[';
          refs(os, t.refs());
          os << (opts_.unicode ? "]λ" : "]L");
        }
        return;
      }
      case TermKind::Down:
      case TermKind::Up:
        os << '[';
        refs(os, t.refs());
        if (t.kind() == TermKind::Down) {
          os << (opts_.unicode ? "]↓ " : "]v ");
        } else {
          os << (opts_.unicode ? "]↑ " : "]^ ");
        }
        prefix_body(os, t.body(), tail);
        return;
      case TermKind::Par:
        os << '(';
        par_level(os, t, true);
        os << ')';
        return;
    }
  }

  void par_level(std::ostream& os, const Term& t, bool tail) {
    if (t.kind() != TermKind::Par) {
      term(os, t, tail);
      return;
    }
    const auto& kids = t.children();
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (i) os << (opts_.unicode ? " ∥ " : " || ");
      if (kids[i].kind() == TermKind::Par) {
        os << '(';
        par_level(os, kids[i], true);
        os << ')';
      } else {
        term(os, kids[i], tail && i + 1 == kids.size());
      }
    }
  }

  void refs(std::ostream& os, const RefSubst& v) {
    bool first = true;
    for (const auto& [ref, values] : v.entries()) {
      if (!first) os << "; ";
      first = false;
      os << ref << (opts_.unicode ? " ↦ {" : " -> {");
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ", ";
        par_level(os, values[i], true);
      }
      os << '}';
    }
  }

 private:
  // Body of a prefix form: parsed as an application sequence, so a ∥
  // must be parenthesized.
  void prefix_body(std::ostream& os, const Term& body, bool tail) {
    if (body.kind() == TermKind::Par) {
      os << '(';
      par_level(os, body, true);
      os << ')';
    } else {
      term(os, body, tail);
    }
  }

  std::string fresh_surface(const std::string& base, const std::vector<std::string>& extra) {
    std::string stem = base;
    if (stem.empty() || is_canonical_name(stem)) stem = "x";
    auto used = [&](const std::string& n) {
      for (const auto& s : taken_)
        if (s == n) return true;
      for (const auto& s : extra)
        if (s == n) return true;
      return n == "get" || n == "set" || n == "refs" || n == "term" || n == "expect";
    };
    if (!used(stem)) return stem;
    while (!stem.empty() && std::isdigit(static_cast<unsigned char>(stem.back()))) stem.pop_back();
    if (stem.empty()) stem = "x";
    for (std::size_t i = 1;; ++i) {
      std::string c = stem + std::to_string(i);
      if (!used(c)) return c;
    }
  }

  std::string bind(const std::string& name, const std::string& hint) {
    std::string s = fresh_surface(hint, {});
    push(name, s);
    return s;
  }

  void push(const std::string& name, const std::string& surface) {
    scope_.emplace_back(name, surface);
    taken_.push_back(surface);
  }

  void unbind() {
    scope_.pop_back();
    taken_.pop_back();
  }

  std::string resolve(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == name) return it->second;
    return name;
  }

  const PrintOptions& opts_;
  std::vector<std::string> taken_;
  std::vector<std::pair<std::string, std::string>> scope_;
};

}  // namespace

std::string print(const Type& t, const PrintOptions& opts) {
  std::ostringstream os;
  print_type(os, t, opts);
  return os.str();
}

std::string print(const Effect& e) {
  std::string out;
  for (const auto& r : e) {
    if (!out.empty()) out += ",";
    out += r;
  }
  return out;
}

std::string print(const Term& t, const PrintOptions& opts) {
  TermPrinter p(opts, open_variables(t));
  std::ostringstream os;
  p.par_level(os, t, true);
  return os.str();
}

std::string print(const Sum& s, const PrintOptions& opts) {
  if (s.is_zero()) return "0";
  std::string out;
  for (const auto& t : s.summands()) {
    if (!out.empty()) out += " + ";
    out += print(t, opts);
  }
  return out;
}

std::string print(const RefSubst& v, const PrintOptions& opts) {
  std::set<std::string> free;
  for (const auto& [ref, values] : v.entries())
    for (const auto& x : values) {
      auto f = open_variables(x);
      free.insert(f.begin(), f.end());
    }
  TermPrinter p(opts, free);
  std::ostringstream os;
  os << '[';
  p.refs(os, v);
  os << ']';
  return os.str();
}

std::string truncate(const std::string& s, std::size_t width) {
  if (width < 4 || s.size() <= width) return s;
  return s.substr(0, width - 3) + "...";
}

}  // namespace lces
