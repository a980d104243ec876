#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pdm::tpl {

using Int = boost::multiprecision::cpp_int;

// An immutable logic term. Copies share structure, so passing terms around
// during resolution is cheap.
class Term {
 public:
  enum class Kind { Atom, Variable, Integer, Text, Compound };

  static Term atom(std::string name);
  static Term variable(std::string name);
  static Term integer(Int value);
  static Term text(std::string value);
  static Term compound(std::string functor, std::vector<Term> args);

  Kind kind() const noexcept { return rep_->kind; }
  bool is(Kind k) const noexcept { return rep_->kind == k; }

  // Atom name, variable name, or compound functor.
  const std::string& name() const { return rep_->sym; }
  const Int& integer_value() const { return rep_->num; }
  const std::string& text_value() const { return rep_->sym; }
  const std::vector<Term>& args() const { return rep_->args; }
  size_t arity() const {
    return rep_->kind == Kind::Compound ? rep_->args.size() : 0;
  }

  bool operator==(const Term& other) const;
  bool operator!=(const Term& other) const { return !(*this == other); }

  bool is_ground() const;
  // Variable names in first-occurrence order (depth-first, left-to-right).
  void collect_variables(std::vector<std::string>& out) const;

 private:
  struct Rep {
    Kind kind;
    std::string sym;         // atom/var/functor name or text payload
    Int num;                 // integer payload
    std::vector<Term> args;  // compound arguments
  };
  explicit Term(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}
  std::shared_ptr<const Rep> rep_;
};

// Substitution produced by unification / resolution. Normalized: values are
// fully substituted, so applying the map twice equals applying it once.
using Bindings = std::map<std::string, Term>;

// Applies bindings to a term, recursively.
Term substitute(const Term& t, const Bindings& b);

// A horn clause: fact when body is empty. The head is always an Atom or a
// Compound, enforced by the parser.
struct Clause {
  Term head;
  std::vector<Term> body;

  bool operator==(const Clause& other) const;
};

struct EntryPoint {
  std::string name = "accept";
  size_t arity = 3;

  bool operator==(const EntryPoint&) const = default;
};

// A parsed policy. source_text is the exact text the clauses were parsed
// from; the digest that binds a policy to its data is computed over those
// bytes, never over a normalized form.
struct Policy {
  std::string id;
  std::string source_text;
  std::vector<Clause> clauses;
  EntryPoint entry_point;
};

// Comparison operators recognized by the engine. They may appear as goals
// but never as clause heads.
bool is_comparison_functor(const std::string& name);

// Rendering. Comparisons print infix; everything else canonical Prolog.
std::string to_string(const Term& t);
std::string to_string(const Clause& c);
std::string to_string(const Policy& p);

}  // namespace pdm::tpl
