#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace locelim {

// Exact probabilities. All reductions and the exact solvers work on these.
using Rational = mpq_class;

// Always "num/den", e.g. "3/4" and "1/1".
std::string to_string(const Rational& q);

// Accepts "n", "n/d" and plain decimals like "0.125". Throws Error(SyntaxError).
Rational parse_rational(std::string_view text);

double to_double(const Rational& q);

}  // namespace locelim
