#include "pdm/tpl/solver.hpp"

#include <memory>
#include <unordered_map>

#include "pdm/error.hpp"

namespace pdm::tpl {

void BuiltinRegistry::add(const std::string& name, size_t arity,
                          BuiltinFn fn) {
  fns_[{name, arity}] = std::move(fn);
}

const BuiltinFn* BuiltinRegistry::find(const std::string& name,
                                       size_t arity) const {
  auto it = fns_.find({name, arity});
  return it == fns_.end() ? nullptr : &it->second;
}

bool BuiltinRegistry::contains(const std::string& name, size_t arity) const {
  return fns_.count({name, arity}) > 0;
}

std::string to_string(const TraceEvent& e) {
  return (e.kind == TraceEvent::Kind::Call ? "call " : "fail ") + e.goal;
}

namespace {

using FrameId = std::uint32_t;

// A term viewed under a variable-renaming frame. Node pointers reference
// terms owned by the program, the query, or the machine's arena, all of
// which outlive the run.
struct RtTerm {
  const Term* node;
  FrameId frame;
};

struct VarKey {
  FrameId frame;
  const std::string* name;

  bool operator==(const VarKey& o) const {
    return frame == o.frame && *name == *o.name;
  }
};

struct VarKeyHash {
  size_t operator()(const VarKey& k) const {
    return std::hash<std::string>()(*k.name) ^
           (static_cast<size_t>(k.frame) * 0x9e3779b97f4a7c15ULL);
  }
};

struct GoalNode {
  RtTerm goal;
  std::shared_ptr<const GoalNode> next;
};
using GoalList = std::shared_ptr<const GoalNode>;

GoalList cons(RtTerm goal, GoalList next) {
  return std::make_shared<const GoalNode>(GoalNode{goal, std::move(next)});
}

struct ChoicePoint {
  RtTerm goal;
  GoalList rest;
  const std::vector<const Clause*>* candidates;
  size_t next_index;
  size_t trail_mark;
};

class Machine {
 public:
  Machine(const std::map<std::pair<std::string, size_t>,
                         std::vector<const Clause*>>& index,
          const BuiltinRegistry* registry, const SolveOptions& opts)
      : index_(index), registry_(registry), opts_(opts) {
    if (opts_.budget == 0) {
      throw Error("BudgetExceeded", "step budget must be positive");
    }
    docs_ = opts_.docs ? opts_.docs : &local_docs_;
  }

  // emit returns true to stop the enumeration.
  void run(const Term& query, const std::function<bool(Bindings)>& emit) {
    goals_ = cons(RtTerm{&query, 0}, nullptr);
    bool backtracking = false;
    for (;;) {
      if (!backtracking) {
        if (!goals_) {
          if (emit(extract_solution(query))) return;
          backtracking = true;
          continue;
        }
        if (!step_forward()) backtracking = true;
      } else {
        if (cps_.empty()) return;
        if (resume_top_choicepoint()) backtracking = false;
      }
    }
  }

  std::vector<TraceEvent> take_trace() { return std::move(trace_); }
  std::uint64_t steps() const { return steps_; }

 private:
  void charge_step() {
    if (++steps_ > opts_.budget) {
      throw Error("BudgetExceeded",
                  "resolution exceeded " + std::to_string(opts_.budget) +
                      " steps");
    }
  }

  RtTerm deref(RtTerm t) const {
    while (t.node->kind() == Term::Kind::Variable) {
      auto it = bindings_.find(VarKey{t.frame, &t.node->name()});
      if (it == bindings_.end()) break;
      t = it->second;
    }
    return t;
  }

  bool occurs(const VarKey& v, RtTerm t) const {
    t = deref(t);
    if (t.node->kind() == Term::Kind::Variable) {
      return VarKey{t.frame, &t.node->name()} == v;
    }
    if (t.node->kind() == Term::Kind::Compound) {
      for (const Term& a : t.node->args()) {
        if (occurs(v, RtTerm{&a, t.frame})) return true;
      }
    }
    return false;
  }

  void bind(RtTerm var, RtTerm value) {
    VarKey key{var.frame, &var.node->name()};
    bindings_.emplace(key, value);
    trail_.push_back(key);
  }

  void unwind(size_t mark) {
    while (trail_.size() > mark) {
      bindings_.erase(trail_.back());
      trail_.pop_back();
    }
  }

  bool unify(RtTerm a, RtTerm b) {
    a = deref(a);
    b = deref(b);
    const bool a_var = a.node->kind() == Term::Kind::Variable;
    const bool b_var = b.node->kind() == Term::Kind::Variable;
    if (a_var) {
      VarKey ka{a.frame, &a.node->name()};
      if (b_var && VarKey{b.frame, &b.node->name()} == ka) return true;
      if (occurs(ka, b)) return false;
      bind(a, b);
      return true;
    }
    if (b_var) {
      if (occurs(VarKey{b.frame, &b.node->name()}, a)) return false;
      bind(b, a);
      return true;
    }
    if (a.node->kind() != b.node->kind()) return false;
    switch (a.node->kind()) {
      case Term::Kind::Atom:
        return a.node->name() == b.node->name();
      case Term::Kind::Integer:
        return a.node->integer_value() == b.node->integer_value();
      case Term::Kind::Text:
        return a.node->text_value() == b.node->text_value();
      case Term::Kind::Compound: {
        if (a.node->name() != b.node->name() ||
            a.node->args().size() != b.node->args().size()) {
          return false;
        }
        for (size_t i = 0; i < a.node->args().size(); ++i) {
          if (!unify(RtTerm{&a.node->args()[i], a.frame},
                     RtTerm{&b.node->args()[i], b.frame})) {
            return false;
          }
        }
        return true;
      }
      default:
        return false;
    }
  }

  Term resolve_to_ast(RtTerm t) const {
    t = deref(t);
    switch (t.node->kind()) {
      case Term::Kind::Variable:
        return Term::variable("_G" + std::to_string(t.frame) + "_" +
                              t.node->name());
      case Term::Kind::Compound: {
        std::vector<Term> args;
        args.reserve(t.node->args().size());
        for (const Term& a : t.node->args()) {
          args.push_back(resolve_to_ast(RtTerm{&a, t.frame}));
        }
        return Term::compound(t.node->name(), std::move(args));
      }
      default:
        return *t.node;
    }
  }

  Bindings extract_solution(const Term& query) const {
    std::vector<std::string> names;
    query.collect_variables(names);
    Bindings out;
    for (const std::string& name : names) {
      // The key must point at a string that lives as long as the lookup.
      auto it = bindings_.find(VarKey{0, &name});
      if (it == bindings_.end()) continue;
      out.emplace(name, resolve_to_ast(it->second));
    }
    return out;
  }

  void trace_call(RtTerm goal) {
    if (opts_.trace) {
      trace_.push_back({TraceEvent::Kind::Call,
                        tpl::to_string(resolve_to_ast(goal))});
    }
  }

  void trace_fail(RtTerm goal) {
    if (opts_.trace) {
      trace_.push_back({TraceEvent::Kind::Fail,
                        tpl::to_string(resolve_to_ast(goal))});
    }
  }

  // Atoms and strings compare by spelling: credential fields arrive as JSON
  // strings while policy literals are atoms.
  static bool text_like(const Term& t) {
    return t.kind() == Term::Kind::Atom || t.kind() == Term::Kind::Text;
  }
  static const std::string& spelling(const Term& t) {
    return t.kind() == Term::Kind::Atom ? t.name() : t.text_value();
  }

  static bool ground_equal(const Term& a, const Term& b) {
    if (text_like(a) && text_like(b)) return spelling(a) == spelling(b);
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Term::Kind::Integer:
        return a.integer_value() == b.integer_value();
      case Term::Kind::Compound: {
        if (a.name() != b.name() || a.args().size() != b.args().size()) {
          return false;
        }
        for (size_t i = 0; i < a.args().size(); ++i) {
          if (!ground_equal(a.args()[i], b.args()[i])) return false;
        }
        return true;
      }
      default:
        return false;  // variables are not ground
    }
  }

  // Comparison goals fail (never error) on unbound or unlike-typed
  // arguments.
  bool eval_comparison(const std::string& op, RtTerm lhs, RtTerm rhs) const {
    Term l = resolve_to_ast(lhs);
    Term r = resolve_to_ast(rhs);
    if (!l.is_ground() || !r.is_ground()) return false;
    if (op == "==") return ground_equal(l, r);
    if (op == "\\==") return !ground_equal(l, r);
    int cmp;
    if (l.kind() == Term::Kind::Integer && r.kind() == Term::Kind::Integer) {
      cmp = l.integer_value() < r.integer_value()
                ? -1
                : (l.integer_value() == r.integer_value() ? 0 : 1);
    } else if (text_like(l) && text_like(r)) {
      cmp = spelling(l).compare(spelling(r));
    } else {
      return false;
    }
    if (op == ">") return cmp > 0;
    if (op == "<") return cmp < 0;
    if (op == ">=") return cmp >= 0;
    return cmp <= 0;  // "=<"
  }

  // Dispatches the first pending goal; returns false to start backtracking.
  bool step_forward() {
    RtTerm goal = deref(goals_->goal);
    GoalList rest = goals_->next;

    switch (goal.node->kind()) {
      case Term::Kind::Variable:
        throw Error("UnboundGoal", "goal is an unbound variable");
      case Term::Kind::Integer:
      case Term::Kind::Text:
        throw Error("CallableExpected",
                    "goal " + tpl::to_string(resolve_to_ast(goal)) +
                        " is not callable");
      default:
        break;
    }

    const std::string& name = goal.node->name();
    const size_t arity = goal.node->args().size();
    trace_call(goal);

    if (arity == 2 && is_comparison_functor(name)) {
      charge_step();
      if (eval_comparison(name, RtTerm{&goal.node->args()[0], goal.frame},
                          RtTerm{&goal.node->args()[1], goal.frame})) {
        goals_ = rest;
        return true;
      }
      trace_fail(goal);
      return false;
    }

    if (registry_ != nullptr) {
      if (const BuiltinFn* fn = registry_->find(name, arity)) {
        charge_step();
        std::vector<Term> args;
        args.reserve(arity);
        for (const Term& a : goal.node->args()) {
          args.push_back(resolve_to_ast(RtTerm{&a, goal.frame}));
        }
        BuiltinOutcome outcome = (*fn)(args, *docs_);
        if (outcome.success && unify_builtin_outputs(goal, outcome)) {
          goals_ = rest;
          return true;
        }
        trace_fail(goal);
        return false;
      }
    }

    auto it = index_.find({name, arity});
    if (it == index_.end()) {
      throw Error("UnknownPredicate",
                  name + "/" + std::to_string(arity) +
                      " matches no clause and no built-in");
    }
    cps_.push_back(
        ChoicePoint{goal, std::move(rest), &it->second, 0, trail_.size()});
    if (try_candidates()) return true;
    trace_fail(goal);
    cps_.pop_back();
    return false;
  }

  bool unify_builtin_outputs(RtTerm goal, const BuiltinOutcome& outcome) {
    size_t mark = trail_.size();
    for (const auto& [idx, value] : outcome.unify_args) {
      arena_.push_back(std::make_unique<Term>(value));
      RtTerm produced{arena_.back().get(), next_frame_++};
      if (idx >= goal.node->args().size() ||
          !unify(RtTerm{&goal.node->args()[idx], goal.frame}, produced)) {
        unwind(mark);
        return false;
      }
    }
    return true;
  }

  // Tries remaining candidate clauses of the top choice point. On success
  // installs the clause body; drops the choice point once exhausted.
  bool try_candidates() {
    ChoicePoint& cp = cps_.back();
    while (cp.next_index < cp.candidates->size()) {
      const Clause* clause = (*cp.candidates)[cp.next_index++];
      charge_step();
      size_t mark = trail_.size();
      FrameId frame = next_frame_++;
      if (unify(cp.goal, RtTerm{&clause->head, frame})) {
        GoalList g = cp.rest;
        for (auto it = clause->body.rbegin(); it != clause->body.rend();
             ++it) {
          g = cons(RtTerm{&*it, frame}, g);
        }
        goals_ = std::move(g);
        if (cp.next_index >= cp.candidates->size()) cps_.pop_back();
        return true;
      }
      unwind(mark);
    }
    return false;
  }

  bool resume_top_choicepoint() {
    ChoicePoint& cp = cps_.back();
    unwind(cp.trail_mark);
    if (try_candidates()) return true;
    trace_fail(cps_.back().goal);
    cps_.pop_back();
    return false;
  }

  const std::map<std::pair<std::string, size_t>,
                 std::vector<const Clause*>>& index_;
  const BuiltinRegistry* registry_;
  SolveOptions opts_;
  DocumentStore local_docs_;
  DocumentStore* docs_;

  std::unordered_map<VarKey, RtTerm, VarKeyHash> bindings_;
  std::vector<VarKey> trail_;
  std::vector<ChoicePoint> cps_;
  GoalList goals_;
  std::vector<std::unique_ptr<Term>> arena_;
  FrameId next_frame_ = 1;
  std::uint64_t steps_ = 0;
  std::vector<TraceEvent> trace_;
};

}  // namespace

Solver::Solver(std::vector<Policy> program, const BuiltinRegistry* registry)
    : program_(std::move(program)), registry_(registry) {
  for (const Policy& p : program_) {
    for (const Clause& c : p.clauses) {
      std::pair<std::string, size_t> key{c.head.name(), c.head.arity()};
      if (registry_ != nullptr && registry_->contains(key.first, key.second)) {
        throw Error("BuiltinCollision",
                    "clause head " + key.first + "/" +
                        std::to_string(key.second) +
                        " collides with a built-in predicate");
      }
      index_[key].push_back(&c);
    }
  }
}

SolveResult Solver::solve(const Term& query, const SolveOptions& opts) const {
  Machine m(index_, registry_, opts);
  SolveResult result;
  m.run(query, [&](Bindings b) {
    result.solution = std::move(b);
    return true;
  });
  result.trace = m.take_trace();
  result.steps = m.steps();
  return result;
}

SolveAllResult Solver::solve_all(const Term& query,
                                 const SolveOptions& opts) const {
  Machine m(index_, registry_, opts);
  SolveAllResult result;
  m.run(query, [&](Bindings b) {
    result.solutions.push_back(std::move(b));
    return false;
  });
  result.trace = m.take_trace();
  result.steps = m.steps();
  return result;
}

namespace {

Term walk(Term t, const Bindings& b) {
  while (t.kind() == Term::Kind::Variable) {
    auto it = b.find(t.name());
    if (it == b.end()) break;
    t = it->second;
  }
  return t;
}

bool occurs_in(const std::string& var, const Term& t, const Bindings& b) {
  Term w = walk(t, b);
  switch (w.kind()) {
    case Term::Kind::Variable:
      return w.name() == var;
    case Term::Kind::Compound:
      for (const Term& a : w.args()) {
        if (occurs_in(var, a, b)) return true;
      }
      return false;
    default:
      return false;
  }
}

bool unify_into(const Term& a, const Term& b, Bindings& m) {
  Term x = walk(a, m);
  Term y = walk(b, m);
  if (x.kind() == Term::Kind::Variable) {
    if (y.kind() == Term::Kind::Variable && y.name() == x.name()) return true;
    if (occurs_in(x.name(), y, m)) return false;
    m.insert_or_assign(x.name(), y);
    return true;
  }
  if (y.kind() == Term::Kind::Variable) {
    if (occurs_in(y.name(), x, m)) return false;
    m.insert_or_assign(y.name(), x);
    return true;
  }
  if (x.kind() != y.kind()) return false;
  switch (x.kind()) {
    case Term::Kind::Atom:
      return x.name() == y.name();
    case Term::Kind::Integer:
      return x.integer_value() == y.integer_value();
    case Term::Kind::Text:
      return x.text_value() == y.text_value();
    case Term::Kind::Compound: {
      if (x.name() != y.name() || x.args().size() != y.args().size()) {
        return false;
      }
      for (size_t i = 0; i < x.args().size(); ++i) {
        if (!unify_into(x.args()[i], y.args()[i], m)) return false;
      }
      return true;
    }
    default:
      return false;
  }
}

Term deep_apply(const Term& t, const Bindings& b) {
  Term w = walk(t, b);
  if (w.kind() == Term::Kind::Compound) {
    std::vector<Term> args;
    args.reserve(w.args().size());
    for (const Term& a : w.args()) args.push_back(deep_apply(a, b));
    return Term::compound(w.name(), std::move(args));
  }
  return w;
}

}  // namespace

std::optional<Bindings> unify(const Term& a, const Term& b,
                              const Bindings& base) {
  Bindings m = base;
  if (!unify_into(a, b, m)) return std::nullopt;
  // Normalize so that applying the result twice equals applying it once.
  Bindings out;
  for (const auto& [name, value] : m) {
    out.emplace(name, deep_apply(value, m));
  }
  return out;
}

}  // namespace pdm::tpl
