#include <algorithm>

#include "compiled.hpp"
#include "linear.hpp"
#include "locelim/error.hpp"
#include "locelim/expr.hpp"

namespace locelim {

std::optional<std::pair<Int, Int>> resolve_bounds(const Bounds& b, const ConstEnv& consts) {
  try {
    return std::make_pair(evaluate(b.lo, {}, consts), evaluate(b.hi, {}, consts));
  } catch (const Error&) {
    return std::nullopt;
  }
}

namespace {

struct Space {
  std::vector<std::string> names;
  std::vector<std::pair<Int, Int>> ranges;
  bool empty = false;
};

// Either the enumeration space for `vars` or the reason it cannot be built.
std::variant<Space, std::string> make_space(const std::set<std::string>& vars, const DomainMap& dom,
                                            const ConstEnv& consts, std::uint64_t budget) {
  Space s;
  unsigned __int128 points = 1;
  for (const auto& v : vars) {
    auto it = dom.find(v);
    if (it == dom.end()) return "no domain for variable '" + v + "'";
    auto r = resolve_bounds(it->second, consts);
    if (!r) return "bounds of '" + v + "' depend on an undefined constant";
    s.names.push_back(v);
    s.ranges.push_back(*r);
    if (r->first > r->second) {
      s.empty = true;
      continue;
    }
    points *= static_cast<unsigned __int128>(r->second - r->first) + 1;
    if (points > budget) return "domain product exceeds budget";
  }
  return s;
}

detail::SlotOf slots_for(const Space& s) {
  return [&s](const std::string& name) -> std::optional<int> {
    auto it = std::find(s.names.begin(), s.names.end(), name);
    if (it == s.names.end()) return std::nullopt;
    return static_cast<int>(it - s.names.begin());
  };
}

// Odometer over the space; `visit` returns true to stop.
template <typename F>
bool enumerate(const Space& s, F&& visit) {
  if (s.empty) return false;
  std::vector<Int> cur(s.names.size());
  for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = s.ranges[i].first;
  while (true) {
    if (visit(cur)) return true;
    std::size_t i = 0;
    for (; i < cur.size(); ++i) {
      if (cur[i] < s.ranges[i].second) {
        ++cur[i];
        break;
      }
      cur[i] = s.ranges[i].first;
    }
    if (i == cur.size()) return false;
  }
}

}  // namespace

SatResult check_sat(const Predicate& phi, const DomainMap& dom, const ConstEnv& consts, std::uint64_t budget) {
  Predicate p = simplify(bind_constants(phi, consts));
  if (p.is_false()) return Unsatisfiable{};
  if (auto fc = free_constants(p); !fc.empty()) {
    if (detail::linear_refutes(p, dom, consts)) return Unsatisfiable{};
    return Unknown{"guard depends on undefined constant '" + *fc.begin() + "'"};
  }

  auto space_or = make_space(free_variables(p), dom, consts, budget);
  if (auto* reason = std::get_if<std::string>(&space_or)) {
    if (detail::linear_refutes(p, dom, consts)) return Unsatisfiable{};
    return Unknown{*reason};
  }
  const Space& space = std::get<Space>(space_or);
  if (space.empty) return Unsatisfiable{};

  detail::Compiled code;
  try {
    code = detail::Compiled::compile(p, slots_for(space), consts);
  } catch (const Error& e) {
    return Unknown{e.what()};
  }
  std::optional<Valuation> witness;
  std::optional<std::string> failure;
  enumerate(space, [&](const std::vector<Int>& cur) {
    try {
      if (!code.test(cur.data())) return false;
    } catch (const Error& e) {
      failure = e.what();
      return true;
    }
    Valuation w;
    for (std::size_t i = 0; i < cur.size(); ++i) w.set(space.names[i], cur[i]);
    witness = std::move(w);
    return true;
  });
  if (failure) return Unknown{*failure};
  if (witness) return Satisfiable{std::move(*witness)};
  return Unsatisfiable{};
}

Tristate check_idempotent(const Update& u, const DomainMap& dom, const ConstEnv& consts, std::uint64_t budget) {
  Update n = u.normalized();
  if (n.empty()) return Tristate::Yes;
  std::set<std::string> written = n.written();
  std::set<std::string> read = free_variables(n);
  bool reads_written = std::any_of(read.begin(), read.end(), [&](const std::string& v) { return written.contains(v); });
  if (!reads_written) return Tristate::Yes;

  std::set<std::string> vars = written;
  vars.insert(read.begin(), read.end());
  auto space_or = make_space(vars, dom, consts, budget);
  if (std::holds_alternative<std::string>(space_or)) return Tristate::Unknown;
  const Space& space = std::get<Space>(space_or);

  bool unknown = false;
  bool counterexample = enumerate(space, [&](const std::vector<Int>& cur) {
    Valuation nu;
    for (std::size_t i = 0; i < cur.size(); ++i) nu.set(space.names[i], cur[i]);
    try {
      Valuation once = apply_update(n, nu, consts);
      return apply_update(n, once, consts) != once;
    } catch (const Error&) {
      unknown = true;
      return true;
    }
  });
  if (unknown) return Tristate::Unknown;
  return counterexample ? Tristate::No : Tristate::Yes;
}

Predicate stays_in_domain(const Update& u, const DomainMap& dom) {
  Update n = u.normalized();
  if (n.empty()) return Predicate::truth(true);
  std::vector<Predicate> parts;
  for (const auto& a : n.blocks().front()) {
    auto it = dom.find(a.lhs);
    if (it == dom.end()) continue;
    parts.push_back(Predicate::compare(CmpOp::Le, it->second.lo, a.rhs));
    parts.push_back(Predicate::compare(CmpOp::Le, a.rhs, it->second.hi));
  }
  return simplify(Predicate::conjunction(std::move(parts)));
}

}  // namespace locelim
