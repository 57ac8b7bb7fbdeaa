#include "locelim/error.hpp"
#include "locelim/rational.hpp"

#include <cctype>

namespace locelim {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::UnboundVariable: return "UnboundVariable";
    case Errc::UnboundConstant: return "UnboundConstant";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::Overflow: return "Overflow";
    case Errc::InvalidExpression: return "InvalidExpression";
    case Errc::InvalidProgram: return "InvalidProgram";
    case Errc::ExplosionLimit: return "ExplosionLimit";
    case Errc::SymbolicBound: return "SymbolicBound";
    case Errc::NotClosed: return "NotClosed";
    case Errc::InvalidTransition: return "InvalidTransition";
    case Errc::PotentialGoalTarget: return "PotentialGoalTarget";
    case Errc::NoCommandsAtTarget: return "NoCommandsAtTarget";
    case Errc::IsInitial: return "IsInitial";
    case Errc::HasSelfLoop: return "HasSelfLoop";
    case Errc::FullLoop: return "FullLoop";
    case Errc::NotNop: return "NotNop";
    case Errc::NotSelfLoop: return "NotSelfLoop";
    case Errc::NotIdempotent: return "NotIdempotent";
    case Errc::PotentialGoal: return "PotentialGoal";
    case Errc::MayLeaveDomain: return "MayLeaveDomain";
    case Errc::NotAChain: return "NotAChain";
    case Errc::AbsorbingState: return "AbsorbingState";
    case Errc::IsInitialOrGoal: return "IsInitialOrGoal";
    case Errc::TooLargeForEnumeration: return "TooLargeForEnumeration";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::TypeError: return "TypeError";
    case Errc::MultipleModules: return "MultipleModules";
    case Errc::DuplicateVariable: return "DuplicateVariable";
    case Errc::UnknownVariable: return "UnknownVariable";
    case Errc::UnknownDirective: return "UnknownDirective";
    case Errc::BadParams: return "BadParams";
  }
  return "Unknown";
}

SyntaxError::SyntaxError(std::size_t line, std::size_t column, const std::string& message, Errc code)
    : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
  auto fail = [&] { return Error(Errc::SyntaxError, "malformed rational '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  std::string s(text);
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rational q;
    try {
      mpz_class num(s.substr(0, slash), 10);
      mpz_class den(s.substr(slash + 1), 10);
      if (den == 0) throw fail();
      q = Rational(num, den);
    } catch (const std::invalid_argument&) {
      throw fail();
    }
    q.canonicalize();
    return q;
  }
  auto dot = s.find('.');
  std::string digits = s;
  mpz_class scale = 1;
  if (dot != std::string::npos) {
    digits = s.substr(0, dot) + s.substr(dot + 1);
    for (std::size_t i = dot + 1; i < s.size(); ++i) scale *= 10;
  }
  std::size_t start = (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) ? 1 : 0;
  if (start == digits.size()) throw fail();
  for (std::size_t i = start; i < digits.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(digits[i]))) throw fail();
  if (digits[0] == '+') digits.erase(0, 1);
  Rational q(mpz_class(digits, 10), scale);
  q.canonicalize();
  return q;
}

double to_double(const Rational& q) { return q.get_d(); }

}  // namespace locelim
