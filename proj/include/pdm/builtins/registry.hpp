#pragma once

#include <memory>

#include "pdm/builtins/formats.hpp"
#include "pdm/builtins/trust.hpp"
#include "pdm/tpl/solver.hpp"

namespace pdm::builtins {

// The built-in predicates the policy corpus relies on:
//   set_format/2           bind a format descriptor to a document handle
//   extract/3              navigate a field, unify value with the output arg
//   check_eIDAS_qualified/1  issuer listed as qualified in the trust registry
//   check_not_revoked/1    credential id absent from the revocation registry
//   resolve_subject/2      DID resolution to a subject-document handle
// Deterministic single-solution goals; registry lookups go through the
// shared TrustServices cache.
tpl::BuiltinRegistry make_standard_registry(
    std::shared_ptr<const FormatStore> formats,
    std::shared_ptr<TrustServices> services);

// Converts a JSON value into the term `extract` unifies with its output:
// strings become Text, integers become Integer, documents become fresh
// handles in the store.
tpl::Term json_to_term(const nlohmann::json& value, tpl::DocumentStore& docs);

}  // namespace pdm::builtins
