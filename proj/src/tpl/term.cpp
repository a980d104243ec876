#include "pdm/tpl/term.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace pdm::tpl {

Term Term::atom(std::string name) {
  return Term(std::make_shared<const Rep>(
      Rep{Kind::Atom, std::move(name), Int(0), {}}));
}

Term Term::variable(std::string name) {
  return Term(std::make_shared<const Rep>(
      Rep{Kind::Variable, std::move(name), Int(0), {}}));
}

Term Term::integer(Int value) {
  return Term(std::make_shared<const Rep>(
      Rep{Kind::Integer, {}, std::move(value), {}}));
}

Term Term::text(std::string value) {
  return Term(std::make_shared<const Rep>(
      Rep{Kind::Text, std::move(value), Int(0), {}}));
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  return Term(std::make_shared<const Rep>(
      Rep{Kind::Compound, std::move(functor), Int(0), std::move(args)}));
}

bool Term::operator==(const Term& other) const {
  if (rep_ == other.rep_) return true;
  if (rep_->kind != other.rep_->kind) return false;
  switch (rep_->kind) {
    case Kind::Atom:
    case Kind::Variable:
    case Kind::Text:
      return rep_->sym == other.rep_->sym;
    case Kind::Integer:
      return rep_->num == other.rep_->num;
    case Kind::Compound:
      return rep_->sym == other.rep_->sym && rep_->args == other.rep_->args;
  }
  return false;
}

bool Term::is_ground() const {
  switch (rep_->kind) {
    case Kind::Variable:
      return false;
    case Kind::Compound:
      return std::all_of(rep_->args.begin(), rep_->args.end(),
                         [](const Term& t) { return t.is_ground(); });
    default:
      return true;
  }
}

void Term::collect_variables(std::vector<std::string>& out) const {
  switch (rep_->kind) {
    case Kind::Variable:
      if (std::find(out.begin(), out.end(), rep_->sym) == out.end()) {
        out.push_back(rep_->sym);
      }
      break;
    case Kind::Compound:
      for (const Term& a : rep_->args) a.collect_variables(out);
      break;
    default:
      break;
  }
}

Term substitute(const Term& t, const Bindings& b) {
  switch (t.kind()) {
    case Term::Kind::Variable: {
      auto it = b.find(t.name());
      return it == b.end() ? t : it->second;
    }
    case Term::Kind::Compound: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(substitute(a, b));
      return Term::compound(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

bool Clause::operator==(const Clause& other) const {
  return head == other.head && body == other.body;
}

bool is_comparison_functor(const std::string& name) {
  static const std::array<const char*, 6> ops = {">", "<", ">=",
                                                 "=<", "==", "\\=="};
  return std::any_of(ops.begin(), ops.end(),
                     [&](const char* op) { return name == op; });
}

namespace {

void quote_text(std::ostream& os, const std::string& s) {
  os << '"';
  for (char c : s) {
    switch (c) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\t': os << "\\t"; break;
      case '\r': os << "\\r"; break;
      default: os << c;
    }
  }
  os << '"';
}

void print_term(std::ostream& os, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Atom:
    case Term::Kind::Variable:
      os << t.name();
      break;
    case Term::Kind::Integer:
      os << t.integer_value();
      break;
    case Term::Kind::Text:
      quote_text(os, t.text_value());
      break;
    case Term::Kind::Compound:
      if (t.args().size() == 2 && is_comparison_functor(t.name())) {
        print_term(os, t.args()[0]);
        os << ' ' << t.name() << ' ';
        print_term(os, t.args()[1]);
        break;
      }
      os << t.name() << '(';
      for (size_t i = 0; i < t.args().size(); ++i) {
        if (i > 0) os << ", ";
        print_term(os, t.args()[i]);
      }
      os << ')';
      break;
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t);
  return os.str();
}

std::string to_string(const Clause& c) {
  std::ostringstream os;
  print_term(os, c.head);
  if (!c.body.empty()) {
    os << " :- ";
    for (size_t i = 0; i < c.body.size(); ++i) {
      if (i > 0) os << ", ";
      print_term(os, c.body[i]);
    }
  }
  os << '.';
  return os.str();
}

std::string to_string(const Policy& p) {
  std::ostringstream os;
  for (const Clause& c : p.clauses) os << to_string(c) << '\n';
  return os.str();
}

}  // namespace pdm::tpl
