#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdual {

/// Base class for every error raised by the library. `name()` is the stable
/// identifier surfaced by the CLI (e.g. "NoConvergence").
class Error : public std::runtime_error {
 public:
  Error(std::string_view name, const std::string& what);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define MDUAL_DECLARE_ERROR(Type)                                     \
  class Type : public Error {                                         \
   public:                                                            \
    explicit Type(const std::string& what) : Error(#Type, what) {}    \
  }

MDUAL_DECLARE_ERROR(NonFiniteEval);
MDUAL_DECLARE_ERROR(NoConvergence);
MDUAL_DECLARE_ERROR(NotDifferentiable);
MDUAL_DECLARE_ERROR(DomainError);
MDUAL_DECLARE_ERROR(DimensionMismatch);
MDUAL_DECLARE_ERROR(Infeasible);
MDUAL_DECLARE_ERROR(Stalled);
MDUAL_DECLARE_ERROR(TooLarge);
MDUAL_DECLARE_ERROR(CertificateFailed);
MDUAL_DECLARE_ERROR(HaloTooWide);
MDUAL_DECLARE_ERROR(NotConverged);
MDUAL_DECLARE_ERROR(ParseError);

#undef MDUAL_DECLARE_ERROR

}  // namespace mdual
