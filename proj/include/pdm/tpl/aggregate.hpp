#pragma once

#include <string>
#include <vector>

#include "pdm/tpl/term.hpp"

namespace pdm::tpl {

// Predicate reserved for declaring credential requirements as facts. It is
// exempt from namespacing so the requirement list of an aggregate can be
// enumerated with a single query.
inline constexpr const char* kRequiresCredentialPredicate =
    "requires_credential";

// Conjunction of several policies: every predicate defined by policy k is
// renamed with a per-policy prefix, and a synthetic entry clause
//   accept(X1..Xn) :- <p1>_accept(X1..Xn), ..., <pk>_accept(X1..Xn).
// makes the aggregate succeed exactly when every member succeeds on the
// same arguments. Throws Error("ArityMismatch") when entry arities differ
// and Error("DuplicatePolicyId") on repeated ids.
Policy aggregate_policies(const std::vector<Policy>& policies);

}  // namespace pdm::tpl
