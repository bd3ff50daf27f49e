#include "lces/parser.hpp"

#include <cctype>

namespace lces {

ParseError::ParseError(std::uint32_t line, std::uint32_t col, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + message),
      line_(line),
      col_(col),
      message_(message) {}

namespace {

enum class Tok {
  Ident,
  Star,
  Lambda,
  LParen,
  RParen,
  LBracket,
  RBracket,
  RBrDown,
  RBrUp,
  RBrL,
  LBrace,
  RBrace,
  RBraceS,
  RBraceArrow,
  DashBrace,
  Arrow,
  Assign,
  Colon,
  Dot,
  Comma,
  Semi,
  Bar,
  Plus,
  Zero,
  Store,
  End,
};

const char* tok_text(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Star: return "'*'";
    case Tok::Lambda: return "'\\'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::RBrDown: return "']v'";
    case Tok::RBrUp: return "']^'";
    case Tok::RBrL: return "']L'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::RBraceS: return "'}s'";
    case Tok::RBraceArrow: return "'}>'";
    case Tok::DashBrace: return "'-{'";
    case Tok::Arrow: return "'->'";
    case Tok::Assign: return "':='";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Bar: return "'||'";
    case Tok::Plus: return "'+'";
    case Tok::Zero: return "'0'";
    case Tok::Store: return "'<='";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  std::uint32_t line = 1, col = 1;
  std::size_t i = 0;
  auto at = [&](std::size_t k) { return k < src.size() ? src[k] : '\0'; };
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '-' && at(i + 1) == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourcePos pos{line, col};
    auto emit = [&](Tok k, std::size_t n) {
      out.push_back(Token{k, src.substr(i, n), pos});
      advance(n);
    };
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      emit(Tok::Ident, j - i);
      continue;
    }
    if (src.compare(i, 2, "λ") == 0) {
      emit(Tok::Lambda, 2);
      continue;
    }
    switch (c) {
      case '*': emit(Tok::Star, 1); continue;
      case '\\': emit(Tok::Lambda, 1); continue;
      case '(': emit(Tok::LParen, 1); continue;
      case ')': emit(Tok::RParen, 1); continue;
      case '[': emit(Tok::LBracket, 1); continue;
      case ']':
        if ((at(i + 1) == 'v' || at(i + 1) == 'L') && !ident_char(at(i + 2))) {
          emit(at(i + 1) == 'v' ? Tok::RBrDown : Tok::RBrL, 2);
        } else if (at(i + 1) == '^') {
          emit(Tok::RBrUp, 2);
        } else {
          emit(Tok::RBracket, 1);
        }
        continue;
      case '{': emit(Tok::LBrace, 1); continue;
      case '}':
        if (at(i + 1) == 's' && !ident_char(at(i + 2))) {
          emit(Tok::RBraceS, 2);
        } else if (at(i + 1) == '>') {
          emit(Tok::RBraceArrow, 2);
        } else {
          emit(Tok::RBrace, 1);
        }
        continue;
      case '-':
        if (at(i + 1) == '{') {
          emit(Tok::DashBrace, 2);
          continue;
        }
        if (at(i + 1) == '>') {
          emit(Tok::Arrow, 2);
          continue;
        }
        break;
      case ':':
        if (at(i + 1) == '=') {
          emit(Tok::Assign, 2);
        } else {
          emit(Tok::Colon, 1);
        }
        continue;
      case '.': emit(Tok::Dot, 1); continue;
      case ',': emit(Tok::Comma, 1); continue;
      case ';': emit(Tok::Semi, 1); continue;
      case '|':
        if (at(i + 1) == '|') {
          emit(Tok::Bar, 2);
          continue;
        }
        break;
      case '+': emit(Tok::Plus, 1); continue;
      case '0':
        if (!ident_char(at(i + 1))) {
          emit(Tok::Zero, 1);
          continue;
        }
        break;
      case '<':
        if (at(i + 1) == '=') {
          emit(Tok::Store, 2);
          continue;
        }
        break;
      default:
        break;
    }
    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
  }
  out.push_back(Token{Tok::End, "", SourcePos{line, col}});
  return out;
}

bool is_keyword(const std::string& s) {
  return s == "get" || s == "set" || s == "refs" || s == "term" || s == "expect";
}

class Parser {
 public:
  Parser(std::vector<Token> toks, Dialect d) : toks_(std::move(toks)), dialect_(d) {}

  SourceFile file() {
    SourceFile f;
    if (peek_ident("refs")) {
      next();
      f.refs = ref_decls();
      expect(Tok::Dot);
    }
    if (peek_ident("expect")) {
      next();
      expect(Tok::LParen);
      Judgment j;
      j.type = type();
      expect(Tok::Comma);
      j.effect = effect_set();
      expect(Tok::RParen);
      expect(Tok::Dot);
      f.expected = j;
    }
    if (peek_ident("term")) next();
    if (dialect_ == Dialect::Lces) {
      f.body = sum();
    } else {
      f.program = program();
    }
    expect(Tok::End);
    return f;
  }

  RefContext ref_decls() {
    RefContext refs;
    do {
      std::string r = ident();
      expect(Tok::Colon);
      refs.emplace_back(r, type());
    } while (accept(Tok::Semi));
    return refs;
  }

  Effect effect_set() {
    Effect e;
    expect(Tok::LBrace);
    if (!check(Tok::RBrace)) {
      do {
        e.insert(ident());
      } while (accept(Tok::Comma));
    }
    expect(Tok::RBrace);
    return e;
  }

  Type type() {
    Type dom = type_atom();
    if (accept(Tok::Arrow)) return Type::arrow(dom, {}, type());
    if (accept(Tok::DashBrace)) {
      Effect e;
      if (!check(Tok::RBraceArrow)) {
        do {
          e.insert(ident());
        } while (accept(Tok::Comma));
      }
      expect(Tok::RBraceArrow);
      return Type::arrow(dom, std::move(e), type());
    }
    return dom;
  }

  Type type_atom() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      next();
      Type inner = type();
      expect(Tok::RParen);
      return inner;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "Unit") {
        next();
        return Type::unit();
      }
      if (t.text == "B") {
        next();
        return Type::behavior();
      }
      if (t.text == "Ref") {
        next();
        std::string r = ident();
        return Type::ref(r, type_atom());
      }
    }
    error(t, "expected a type");
  }

  Sum sum() {
    std::vector<Term> summands;
    do {
      if (accept(Tok::Zero)) continue;
      summands.push_back(par());
    } while (accept(Tok::Plus));
    return Sum(std::move(summands));
  }

  Term par() {
    SourcePos pos = peek().pos;
    std::vector<Term> kids{app()};
    while (accept(Tok::Bar)) kids.push_back(app());
    return Term::par(std::move(kids), pos);
  }

  Term app() {
    SourcePos pos = peek().pos;
    Term acc = prefix();
    while (starts_prefix()) acc = Term::app(acc, prefix(), RefSubst{}, pos);
    return acc;
  }

  bool starts_prefix() const {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Ident:
        return t.text == "get" || !is_keyword(t.text);
      case Tok::Star:
      case Tok::Lambda:
      case Tok::LParen:
      case Tok::LBracket:
      case Tok::LBrace:
        return true;
      default:
        return false;
    }
  }

  Term prefix() {
    const Token& t = peek();
    SourcePos pos = t.pos;
    if (t.kind == Tok::LBracket) {
      next();
      RefSubst v = rbinds();
      if (accept(Tok::RBrDown)) return Term::down(std::move(v), app(), pos);
      if (accept(Tok::RBrUp)) return Term::up(std::move(v), app(), pos);
      error(peek(), "expected ']v' or ']^'");
    }
    if (t.kind == Tok::LBrace) {
      next();
      std::vector<VarBinding> bs;
      do {
        std::string x = ident();
        expect(Tok::Assign);
        Term v = value();
        for (const auto& b : bs)
          if (b.name == x) error(t, "variable '" + x + "' bound twice in substitution");
        bs.push_back(VarBinding{x, v, x});
      } while (accept(Tok::Comma));
      if (!accept(Tok::RBraceS)) expect(Tok::RBrace);
      return Term::var_sub(std::move(bs), app(), pos);
    }
    return atom();
  }

  RefSubst rbinds() {
    RefSubst::Map m;
    if (check(Tok::Ident)) {
      do {
        const Token& at = peek();
        std::string r = ident();
        if (m.count(r)) error(at, "reference '" + r + "' bound twice in substitution");
        expect(Tok::Arrow);
        expect(Tok::LBrace);
        auto& values = m[r];
        if (!check(Tok::RBrace)) {
          do {
            values.push_back(value());
          } while (accept(Tok::Comma));
        }
        expect(Tok::RBrace);
      } while (accept(Tok::Semi));
    }
    return RefSubst(std::move(m));
  }

  Term value() {
    const Token& t = peek();
    Term v = par();
    if (!v.is_value()) error(t, "expected a value");
    return v;
  }

  Term atom() {
    const Token& t = peek();
    SourcePos pos = t.pos;
    switch (t.kind) {
      case Tok::Star:
        next();
        return Term::unit(pos);
      case Tok::Ident: {
        if (t.text == "get") {
          next();
          if (accept(Tok::LParen)) {
            std::string r = ident();
            expect(Tok::RParen);
            return Term::get(r, pos);
          }
          return Term::get(ident(), pos);
        }
        if (is_keyword(t.text)) error(t, "unexpected keyword '" + t.text + "'");
        next();
        return Term::var(t.text, pos);
      }
      case Tok::Lambda: {
        next();
        std::string x = ident();
        expect(Tok::Colon);
        Type a = type();
        expect(Tok::Dot);
        return Term::lam(x, a, par(), x, pos);
      }
      case Tok::LParen: {
        next();
        Term inner = par();
        expect(Tok::RParen);
        if (check(Tok::LBracket) && bracket_closes_with(Tok::RBrL)) {
          const Token& lb = next();
          RefSubst v = rbinds();
          expect(Tok::RBrL);
          if (inner.kind() != TermKind::App) error(lb, "a λ-substitution must follow an application");
          if (!inner.refs().empty()) error(lb, "application already carries a λ-substitution");
          return Term::app(inner.fun(), inner.arg(), std::move(v), inner.pos());
        }
        return inner;
      }
      default:
        error(t, std::string("unexpected ") + tok_text(t.kind));
    }
  }

  bool bracket_closes_with(Tok closer) const {
    int depth = 0;
    for (std::size_t k = pos_; k < toks_.size(); ++k) {
      switch (toks_[k].kind) {
        case Tok::LBracket:
          ++depth;
          break;
        case Tok::RBracket:
        case Tok::RBrDown:
        case Tok::RBrUp:
        case Tok::RBrL:
          if (--depth == 0) return toks_[k].kind == closer;
          break;
        case Tok::End:
          return false;
        default:
          break;
      }
    }
    return false;
  }

  // λ_C dialect

  LCProgram program() {
    LCProgram p;
    do {
      if (check(Tok::Ident) && peek_at(1).kind == Tok::Store) {
        std::string r = ident();
        next();
        const Token& t = peek();
        LCTerm v = lc_app();
        if (!v.is_value()) error(t, "expected a value");
        p.stores.emplace_back(r, v);
      } else {
        p.threads.push_back(lc_app());
      }
    } while (accept(Tok::Bar));
    return p;
  }

  LCTerm lc_par() {
    std::vector<LCTerm> kids{lc_app()};
    // a store thread ends the composition
    while (check(Tok::Bar) && !(peek_at(1).kind == Tok::Ident && peek_at(2).kind == Tok::Store)) {
      next();
      kids.push_back(lc_app());
    }
    return LCTerm::par(std::move(kids));
  }

  LCTerm lc_app() {
    LCTerm acc = lc_atom();
    while (lc_starts_atom()) acc = LCTerm::app(acc, lc_atom());
    return acc;
  }

  bool lc_starts_atom() const {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Ident:
        return (t.text == "get" || t.text == "set" || !is_keyword(t.text)) &&
               peek_at(1).kind != Tok::Store;
      case Tok::Star:
      case Tok::Lambda:
      case Tok::LParen:
        return true;
      default:
        return false;
    }
  }

  LCTerm lc_value() {
    const Token& t = peek();
    LCTerm v = lc_par();
    if (!v.is_value()) error(t, "expected a value");
    return v;
  }

  LCTerm lc_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Star:
        next();
        return LCTerm::unit();
      case Tok::Ident: {
        if (t.text == "get") {
          next();
          if (accept(Tok::LParen)) {
            std::string r = ident();
            expect(Tok::RParen);
            return LCTerm::get(r);
          }
          return LCTerm::get(ident());
        }
        if (t.text == "set") {
          next();
          expect(Tok::LParen);
          std::string r = ident();
          expect(Tok::Comma);
          LCTerm v = lc_value();
          expect(Tok::RParen);
          return LCTerm::set(r, v);
        }
        if (is_keyword(t.text)) error(t, "unexpected keyword '" + t.text + "'");
        next();
        return LCTerm::var(t.text);
      }
      case Tok::Lambda: {
        next();
        std::string x = ident();
        expect(Tok::Colon);
        Type a = type();
        expect(Tok::Dot);
        return LCTerm::lam(x, a, lc_par(), x);
      }
      case Tok::LParen: {
        next();
        LCTerm inner = lc_par();
        expect(Tok::RParen);
        return inner;
      }
      default:
        error(t, std::string("unexpected ") + tok_text(t.kind));
    }
  }

  // token helpers

  const Token& peek() const { return toks_[pos_]; }
  const Token& peek_at(std::size_t k) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool check(Tok k) const { return peek().kind == k; }
  bool peek_ident(const char* word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }
  bool accept(Tok k) {
    if (!check(k)) return false;
    next();
    return true;
  }
  void expect(Tok k) {
    if (!accept(k)) {
      error(peek(), std::string("expected ") + tok_text(k) + ", found " +
                        (peek().kind == Tok::Ident ? "'" + peek().text + "'" : tok_text(peek().kind)));
    }
  }
  std::string ident() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || is_keyword(t.text)) error(t, "expected an identifier");
    next();
    return t.text;
  }
  [[noreturn]] void error(const Token& t, const std::string& msg) const {
    throw ParseError(t.pos.line, t.pos.col, msg);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Dialect dialect_;
};

}  // namespace

SourceFile parse(const std::string& text, Dialect dialect) {
  Parser p(lex(text), dialect);
  return p.file();
}

Term parse_term(const std::string& text) {
  Parser p(lex(text), Dialect::Lces);
  Term t = p.par();
  p.expect(Tok::End);
  return t;
}

Sum parse_sum(const std::string& text) {
  Parser p(lex(text), Dialect::Lces);
  Sum s = p.sum();
  p.expect(Tok::End);
  return s;
}

Type parse_type(const std::string& text) {
  Parser p(lex(text), Dialect::Lces);
  Type t = p.type();
  p.expect(Tok::End);
  return t;
}

RefContext parse_refs(const std::string& text) {
  Parser p(lex(text), Dialect::Lces);
  if (p.check(Tok::End)) return {};
  RefContext r = p.ref_decls();
  p.accept(Tok::Dot);
  p.expect(Tok::End);
  return r;
}

RefSubst parse_ref_subst(const std::string& text) {
  Parser p(lex(text), Dialect::Lces);
  bool bracketed = p.accept(Tok::LBracket);
  RefSubst v = p.rbinds();
  if (bracketed) p.expect(Tok::RBracket);
  p.expect(Tok::End);
  return v;
}

LCProgram parse_program(const std::string& text) {
  Parser p(lex(text), Dialect::Lc);
  LCProgram prog = p.program();
  p.expect(Tok::End);
  return prog;
}

}  // namespace lces
