#pragma once

// Surface syntax of .lces and .lc files.
//
//   file   ::= ("refs" decl (";" decl)* ".")? ("expect" "(" type "," "{" idents? "}" ")" ".")?
//              "term"? body
//   sum    ::= "0" | par ("+" par)*
//   par    ::= app ("||" app)*
//   app    ::= prefix+                                  (left-associative juxtaposition)
//   prefix ::= "[" rbinds "]v" app | "[" rbinds "]^" app | "{" bindings "}s" app | atom
//   atom   ::= ident | "*" | "get" ident | "get" "(" ident ")" | "\" ident ":" type "." par
//            | "(" par ")" ("[" rbinds "]L")?
//   type   ::= tatom ("-{" idents? "}>" type | "->" type)?
//   tatom  ::= "Unit" | "B" | "Ref" ident tatom | "(" type ")"
//
// The λ_C dialect replaces prefix forms by "set" "(" ident "," value ")" and
// store threads "ident <= value". "--" starts a line comment.

#include <optional>
#include <stdexcept>
#include <string>

#include "lces/lambda_c.hpp"
#include "lces/syntax.hpp"
#include "lces/typing.hpp"

namespace lces {

enum class Dialect { Lces, Lc };

class ParseError : public std::runtime_error {
 public:
  ParseError(std::uint32_t line, std::uint32_t col, const std::string& message);
  std::uint32_t line() const { return line_; }
  std::uint32_t col() const { return col_; }
  const std::string& message() const { return message_; }

 private:
  std::uint32_t line_;
  std::uint32_t col_;
  std::string message_;
};

struct SourceFile {
  RefContext refs;
  std::optional<Judgment> expected;
  Sum body;                            // Lces dialect
  std::optional<LCProgram> program;    // Lc dialect
};

SourceFile parse(const std::string& text, Dialect dialect = Dialect::Lces);

/// Convenience: a single summand-free term (no directives).
Term parse_term(const std::string& text);
Sum parse_sum(const std::string& text);
Type parse_type(const std::string& text);
RefContext parse_refs(const std::string& text);  // "r : Unit; s : ..."
/// "r -> {*}; s -> {}" with or without surrounding brackets.
RefSubst parse_ref_subst(const std::string& text);
LCProgram parse_program(const std::string& text);

}  // namespace lces
