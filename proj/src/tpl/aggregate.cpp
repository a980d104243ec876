#include "pdm/tpl/aggregate.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "pdm/error.hpp"
#include "pdm/tpl/parser.hpp"

namespace pdm::tpl {

namespace {

std::string sanitize_prefix(const std::string& id, size_t ordinal) {
  std::string out;
  for (char c : id) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  }
  if (out.empty() || !std::islower(static_cast<unsigned char>(out[0]))) {
    out = "p" + std::to_string(ordinal + 1) + (out.empty() ? "" : "_" + out);
  }
  return out;
}

using PredKey = std::pair<std::string, size_t>;

Term rename_goal(const Term& goal, const std::set<PredKey>& defined,
                 const std::string& prefix) {
  if (goal.kind() != Term::Kind::Atom && goal.kind() != Term::Kind::Compound) {
    return goal;
  }
  PredKey key{goal.name(), goal.arity()};
  if (key.first == kRequiresCredentialPredicate && key.second == 1) {
    return goal;
  }
  if (defined.count(key) == 0) return goal;
  std::string renamed = prefix + "_" + goal.name();
  if (goal.kind() == Term::Kind::Atom) return Term::atom(std::move(renamed));
  return Term::compound(std::move(renamed), goal.args());
}

}  // namespace

Policy aggregate_policies(const std::vector<Policy>& policies) {
  if (policies.empty()) {
    throw Error("InvalidParams", "cannot aggregate an empty policy list");
  }
  const size_t arity = policies.front().entry_point.arity;
  std::set<std::string> ids;
  for (const Policy& p : policies) {
    if (p.entry_point.arity != arity) {
      throw Error("ArityMismatch",
                  "policy '" + p.id + "' entry point arity " +
                      std::to_string(p.entry_point.arity) + " != " +
                      std::to_string(arity));
    }
    if (!ids.insert(p.id).second) {
      throw Error("DuplicatePolicyId", "policy id '" + p.id + "' repeats");
    }
  }

  std::set<std::string> used_prefixes;
  std::vector<std::string> prefixes;
  for (size_t k = 0; k < policies.size(); ++k) {
    std::string prefix = sanitize_prefix(policies[k].id, k);
    while (!used_prefixes.insert(prefix).second) {
      prefix += "_" + std::to_string(k + 1);
    }
    prefixes.push_back(std::move(prefix));
  }

  std::ostringstream source;

  // Synthetic entry clause first.
  std::vector<std::string> entry_vars;
  for (size_t i = 0; i < arity; ++i) {
    entry_vars.push_back("X" + std::to_string(i + 1));
  }
  source << "accept(";
  for (size_t i = 0; i < arity; ++i) {
    source << (i ? ", " : "") << entry_vars[i];
  }
  source << ") :-\n";
  for (size_t k = 0; k < policies.size(); ++k) {
    source << "  " << prefixes[k] << "_" << policies[k].entry_point.name
           << "(";
    for (size_t i = 0; i < arity; ++i) {
      source << (i ? ", " : "") << entry_vars[i];
    }
    source << ")" << (k + 1 < policies.size() ? ",\n" : ".\n");
  }

  std::string agg_id = "aggregate:";
  for (size_t k = 0; k < policies.size(); ++k) {
    const Policy& p = policies[k];
    agg_id += (k ? "+" : "") + p.id;

    std::set<PredKey> defined;
    for (const Clause& c : p.clauses) {
      defined.insert({c.head.name(), c.head.arity()});
    }

    source << "\n";
    for (const Clause& c : p.clauses) {
      Clause renamed{rename_goal(c.head, defined, prefixes[k]), {}};
      renamed.body.reserve(c.body.size());
      for (const Term& g : c.body) {
        renamed.body.push_back(rename_goal(g, defined, prefixes[k]));
      }
      source << to_string(renamed) << "\n";
    }
  }

  // Reparsing the generated text keeps the policy invariant: clauses are the
  // exact parse of source_text.
  return parse_policy(source.str(), agg_id,
                      EntryPoint{"accept", arity});
}

}  // namespace pdm::tpl
