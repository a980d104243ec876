#include "pdm/bench/bench.hpp"

#include <chrono>
#include <sstream>

#include "pdm/tpl/aggregate.hpp"
#include "pdm/tpl/parser.hpp"
#include "pdm/tpl/solver.hpp"

namespace pdm::bench {

std::string synthetic_policy(int predicates) {
  // Three predicates on the accept path, shaped like a realistic seller
  // policy: a record-count guard and a computation-type gate with an
  // alternative clause that fails first.
  std::ostringstream out;
  out << "accept(Creds, NumRecords, ComputationType) :-\n"
      << "  checkRecords(NumRecords),\n"
      << "  route(ComputationType).\n"
      << "checkRecords(N) :- N > 10.\n"
      << "route(C) :- C == premium_analytics.\n"
      << "route(C) :- C == simple_statistics.\n";
  for (int i = 0; i < predicates - 3; ++i) {
    out << "aux" << i << "(X) :- X == aux_value_" << i << ".\n";
  }
  return out.str();
}

Measurement measure(int policies, int predicates, double min_total_seconds) {
  std::vector<tpl::Policy> members;
  members.reserve(static_cast<size_t>(policies));
  const std::string source = synthetic_policy(predicates);
  for (int k = 0; k < policies; ++k) {
    members.push_back(tpl::parse_policy(source, "bench" + std::to_string(k)));
  }
  tpl::Policy program = policies == 1 ? members.front()
                                      : tpl::aggregate_policies(members);
  tpl::Solver solver({std::move(program)}, nullptr);
  tpl::Term query = tpl::parse_term(
      "accept(creds, 150, simple_statistics)");

  tpl::SolveOptions opts;
  opts.budget = 1'000'000'000ULL;

  // Warm-up, also records the deterministic step count.
  tpl::SolveResult first = solver.solve(query, opts);

  using clock = std::chrono::steady_clock;
  std::uint64_t reps = 0;
  double elapsed = 0.0;
  std::uint64_t batch = 64;
  const auto start = clock::now();
  for (;;) {
    for (std::uint64_t i = 0; i < batch; ++i) {
      tpl::SolveResult r = solver.solve(query, opts);
      if (!r.solution) throw std::runtime_error("benchmark query failed");
    }
    reps += batch;
    elapsed = std::chrono::duration<double>(clock::now() - start).count();
    if (elapsed >= min_total_seconds) break;
    batch *= 2;
  }

  Measurement m;
  m.policies = policies;
  m.predicates = predicates;
  m.seconds_per_eval = elapsed / static_cast<double>(reps);
  m.steps_per_eval = first.steps;
  return m;
}

std::vector<Measurement> run_grid(const std::vector<int>& policy_counts,
                                  const std::vector<int>& predicate_counts,
                                  double min_total_seconds) {
  std::vector<Measurement> rows;
  for (int p : policy_counts) {
    for (int k : predicate_counts) {
      rows.push_back(measure(p, k, min_total_seconds));
    }
  }
  return rows;
}

std::string format_table(const std::vector<Measurement>& rows) {
  std::ostringstream out;
  out << "policies  predicates/policy  time/eval [s]   steps/eval\n";
  char line[128];
  for (const Measurement& m : rows) {
    std::snprintf(line, sizeof(line), "%-9d %-18d %-15.3e %llu\n", m.policies,
                  m.predicates, m.seconds_per_eval,
                  static_cast<unsigned long long>(m.steps_per_eval));
    out << line;
  }
  return out.str();
}

}  // namespace pdm::bench
