#include "pdm/tpl/parser.hpp"

#include <cctype>
#include <utility>

namespace pdm::tpl {

namespace {

enum class TokKind {
  Atom, Var, Int, Str,
  LParen, RParen, Comma, Dot, Neck,  // ":-"
  CmpOp,                             // > < >= =< == \==
  Minus,
  End,
};

struct Token {
  TokKind kind;
  std::string text;
  Int number;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_layout();
    Token t;
    t.line = line_;
    t.col = col_;
    if (eof()) {
      t.kind = TokKind::End;
      return t;
    }
    char c = peek();
    if (std::islower(static_cast<unsigned char>(c))) {
      t.kind = TokKind::Atom;
      t.text = read_identifier();
      return t;
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = TokKind::Var;
      t.text = read_identifier();
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = TokKind::Int;
      t.number = read_integer();
      return t;
    }
    switch (c) {
      case '"':
        t.kind = TokKind::Str;
        t.text = read_string();
        return t;
      case '(': advance(); t.kind = TokKind::LParen; return t;
      case ')': advance(); t.kind = TokKind::RParen; return t;
      case ',': advance(); t.kind = TokKind::Comma; return t;
      case '.': advance(); t.kind = TokKind::Dot; return t;
      case ':':
        advance();
        if (!eof() && peek() == '-') {
          advance();
          t.kind = TokKind::Neck;
          return t;
        }
        throw SyntaxError("expected ':-'", t.line, t.col);
      case '>':
        advance();
        t.kind = TokKind::CmpOp;
        t.text = ">";
        if (!eof() && peek() == '=') { advance(); t.text = ">="; }
        return t;
      case '<':
        advance();
        t.kind = TokKind::CmpOp;
        t.text = "<";
        return t;
      case '=':
        advance();
        if (!eof() && peek() == '<') { advance(); t.kind = TokKind::CmpOp; t.text = "=<"; return t; }
        if (!eof() && peek() == '=') { advance(); t.kind = TokKind::CmpOp; t.text = "=="; return t; }
        throw SyntaxError("'=' is not an operator; use ==, =< or >=", t.line, t.col);
      case '\\':
        advance();
        if (!eof() && peek() == '=') {
          advance();
          if (!eof() && peek() == '=') {
            advance();
            t.kind = TokKind::CmpOp;
            t.text = "\\==";
            return t;
          }
        }
        throw SyntaxError("expected '\\=='", t.line, t.col);
      case '-':
        advance();
        t.kind = TokKind::Minus;
        return t;
      default:
        throw SyntaxError(std::string("unexpected character '") + c + "'",
                          t.line, t.col);
    }
  }

 private:
  bool eof() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_layout() {
    while (!eof()) {
      char c = peek();
      if (c == '%') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string read_identifier() {
    std::string out;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                      peek() == '_')) {
      out.push_back(peek());
      advance();
    }
    return out;
  }

  Int read_integer() {
    std::string digits;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      digits.push_back(peek());
      advance();
    }
    return Int(digits);
  }

  std::string read_string() {
    int sline = line_, scol = col_;
    advance();  // opening quote
    std::string out;
    while (true) {
      if (eof()) throw SyntaxError("unterminated string", sline, scol);
      char c = peek();
      if (c == '"') {
        advance();
        return out;
      }
      if (c == '\\') {
        advance();
        if (eof()) throw SyntaxError("unterminated escape", line_, col_);
        char e = peek();
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          default:
            throw SyntaxError(std::string("unknown escape '\\") + e + "'",
                              line_, col_);
        }
        advance();
        continue;
      }
      out.push_back(c);
      advance();
    }
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { shift(); }

  std::vector<Clause> parse_clauses() {
    std::vector<Clause> out;
    while (tok_.kind != TokKind::End) out.push_back(parse_clause());
    return out;
  }

  Term parse_single_term() {
    Term t = parse_expr();
    if (tok_.kind == TokKind::Dot) shift();
    expect(TokKind::End, "end of input");
    return t;
  }

 private:
  Token tok_;
  Lexer lexer_;

  void shift() { tok_ = lexer_.next(); }

  void expect(TokKind kind, const char* what) {
    if (tok_.kind != kind) {
      throw SyntaxError(std::string("expected ") + what, tok_.line, tok_.col);
    }
  }

  Clause parse_clause() {
    Token head_tok = tok_;
    Term head = parse_expr();
    if (head.kind() != Term::Kind::Atom &&
        head.kind() != Term::Kind::Compound) {
      throw SyntaxError("clause head must be an atom or compound term",
                        head_tok.line, head_tok.col);
    }
    if (head.kind() == Term::Kind::Compound &&
        is_comparison_functor(head.name())) {
      throw SyntaxError("comparison operators cannot be redefined",
                        head_tok.line, head_tok.col);
    }
    Clause clause{std::move(head), {}};
    if (tok_.kind == TokKind::Neck) {
      shift();
      clause.body.push_back(parse_expr());
      while (tok_.kind == TokKind::Comma) {
        shift();
        clause.body.push_back(parse_expr());
      }
    }
    expect(TokKind::Dot, "'.' at end of clause");
    shift();
    return clause;
  }

  // expr := operand (cmpop operand)?   (comparisons do not chain)
  Term parse_expr() {
    Term lhs = parse_operand();
    if (tok_.kind == TokKind::CmpOp) {
      std::string op = tok_.text;
      shift();
      Term rhs = parse_operand();
      return Term::compound(op, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Term parse_operand() {
    switch (tok_.kind) {
      case TokKind::Int: {
        Int v = tok_.number;
        shift();
        return Term::integer(std::move(v));
      }
      case TokKind::Minus: {
        shift();
        expect(TokKind::Int, "integer after '-'");
        Int v = -tok_.number;
        shift();
        return Term::integer(std::move(v));
      }
      case TokKind::Str: {
        std::string s = tok_.text;
        shift();
        return Term::text(std::move(s));
      }
      case TokKind::Var: {
        std::string n = tok_.text;
        shift();
        return Term::variable(std::move(n));
      }
      case TokKind::Atom: {
        std::string n = tok_.text;
        shift();
        if (tok_.kind != TokKind::LParen) return Term::atom(std::move(n));
        shift();
        std::vector<Term> args;
        args.push_back(parse_expr());
        while (tok_.kind == TokKind::Comma) {
          shift();
          args.push_back(parse_expr());
        }
        expect(TokKind::RParen, "')'");
        shift();
        return Term::compound(std::move(n), std::move(args));
      }
      case TokKind::LParen: {
        shift();
        Term inner = parse_expr();
        expect(TokKind::RParen, "')'");
        shift();
        return inner;
      }
      default:
        throw SyntaxError("expected a term", tok_.line, tok_.col);
    }
  }
};

}  // namespace

Policy parse_policy(std::string_view source, std::string id,
                    std::optional<EntryPoint> entry) {
  Parser parser(source);
  std::vector<Clause> clauses = parser.parse_clauses();
  if (clauses.empty()) throw SyntaxError("policy has no clauses", 1, 1);

  EntryPoint ep = entry.value_or(EntryPoint{});
  bool found = false;
  for (const Clause& c : clauses) {
    if (c.head.name() == ep.name && c.head.arity() == ep.arity) {
      found = true;
      break;
    }
  }
  if (!found) {
    throw Error("MissingEntryPoint",
                "policy '" + id + "' defines no " + ep.name + "/" +
                    std::to_string(ep.arity) + " clause");
  }
  return Policy{std::move(id), std::string(source), std::move(clauses), ep};
}

Term parse_term(std::string_view source) {
  Parser parser(source);
  return parser.parse_single_term();
}

}  // namespace pdm::tpl
