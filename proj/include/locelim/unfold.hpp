#pragma once

// Moving finite-domain variables into the location space.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "locelim/pcfp.hpp"

namespace locelim {

using VarSet = std::set<std::string>;

// x -> y iff some assignment to x reads y. Every variable is a node.
using DependencyGraph = std::map<std::string, VarSet>;

DependencyGraph dependency_graph(const Pcfp& p);

// Variables that depend at most on themselves.
VarSet directly_unfoldable(const Pcfp& p);

// Bottom strongly connected components, smallest first, then by name.
std::vector<VarSet> unfoldable_sets(const Pcfp& p);

// Throws SymbolicBound, NotClosed, InvalidProgram (unknown variable).
Pcfp unfold(const Pcfp& p, const VarSet& vars);

}  // namespace locelim
