#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pdm::bench {

// Synthetic policy with `predicates` predicate definitions. The accept path
// always walks the same three-predicate chain; additional predicates are
// present in the program (they cost load and index space) but are not on
// the evaluated path, which is what makes per-policy complexity cheap while
// the number of aggregated policies scales the run time linearly.
std::string synthetic_policy(int predicates);

struct Measurement {
  int policies = 0;
  int predicates = 0;
  double seconds_per_eval = 0.0;
  std::uint64_t steps_per_eval = 0;
};

// Evaluates the aggregate of `policies` copies (distinct ids) of the
// synthetic policy with `predicates` predicates; reports the per-evaluation
// wall time averaged over enough repetitions to pass min_total_seconds.
Measurement measure(int policies, int predicates,
                    double min_total_seconds = 0.2);

// The Table-1-shaped grid: policies x predicates.
std::vector<Measurement> run_grid(const std::vector<int>& policy_counts,
                                  const std::vector<int>& predicate_counts,
                                  double min_total_seconds = 0.2);

std::string format_table(const std::vector<Measurement>& rows);

}  // namespace pdm::bench
