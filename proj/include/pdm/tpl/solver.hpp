#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdm/tpl/docstore.hpp"
#include "pdm/tpl/term.hpp"

namespace pdm::tpl {

// Result of one built-in invocation. Error conditions (UnknownFormat,
// RegistryUnavailable, ...) are thrown as pdm::Error and abort the
// evaluation; plain failure just triggers backtracking.
struct BuiltinOutcome {
  bool success = false;
  // Terms to unify back into goal arguments: (argument index, value).
  std::vector<std::pair<size_t, Term>> unify_args;

  static BuiltinOutcome fail() { return {}; }
  static BuiltinOutcome ok() { return {true, {}}; }
  static BuiltinOutcome ok_bind(size_t index, Term value) {
    return {true, {{index, std::move(value)}}};
  }
};

// Built-ins are deterministic single-solution goals: the engine never
// backtracks into them. Arguments arrive fully substituted.
using BuiltinFn =
    std::function<BuiltinOutcome(const std::vector<Term>& args,
                                 DocumentStore& docs)>;

class BuiltinRegistry {
 public:
  void add(const std::string& name, size_t arity, BuiltinFn fn);
  const BuiltinFn* find(const std::string& name, size_t arity) const;
  bool contains(const std::string& name, size_t arity) const;

 private:
  std::map<std::pair<std::string, size_t>, BuiltinFn> fns_;
};

struct TraceEvent {
  enum class Kind { Call, Fail };
  Kind kind;
  std::string goal;
};

std::string to_string(const TraceEvent& e);

struct SolveOptions {
  std::uint64_t budget = 1'000'000;
  DocumentStore* docs = nullptr;
  bool trace = false;
};

struct SolveResult {
  std::optional<Bindings> solution;
  std::vector<TraceEvent> trace;
  std::uint64_t steps = 0;
};

struct SolveAllResult {
  std::vector<Bindings> solutions;
  std::vector<TraceEvent> trace;
  std::uint64_t steps = 0;
};

// Depth-first, left-to-right resolution over an immutable program in clause
// order. Safe to share across threads; each solve call owns its state.
class Solver {
 public:
  // Throws Error("BuiltinCollision") when a clause head shadows a registered
  // built-in name.
  Solver(std::vector<Policy> program, const BuiltinRegistry* registry);

  // First solution or failure. Throws Error("BudgetExceeded") and
  // Error("UnknownPredicate").
  SolveResult solve(const Term& query, const SolveOptions& opts = {}) const;

  // Every solution via backtracking, duplicates preserved.
  SolveAllResult solve_all(const Term& query,
                           const SolveOptions& opts = {}) const;

  const std::vector<Policy>& program() const noexcept { return program_; }

 private:
  std::vector<Policy> program_;
  const BuiltinRegistry* registry_;
  std::map<std::pair<std::string, size_t>, std::vector<const Clause*>> index_;
};

// Public unification over plain terms: variables with equal names are the
// same variable in both terms. On success the returned bindings extend base
// and are normalized (values fully substituted, occurs-check respected).
std::optional<Bindings> unify(const Term& a, const Term& b,
                              const Bindings& base = {});

}  // namespace pdm::tpl
