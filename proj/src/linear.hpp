#pragma once

#include "locelim/expr.hpp"

namespace locelim::detail {

// Sound but incomplete: true only if `phi` has no integer model, with
// undefined constants ranging over all integers. Atoms that are not linear
// are dropped, then every disjunct of the DNF is refuted by Fourier-Motzkin
// with integer tightening.
bool linear_refutes(const Predicate& phi, const DomainMap& dom, const ConstEnv& consts);

}  // namespace locelim::detail
