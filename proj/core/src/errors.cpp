#include "mdual/errors.hpp"

namespace mdual {

Error::Error(std::string_view name, const std::string& what)
    : std::runtime_error(std::string(name) + ": " + what), name_(name) {}

}  // namespace mdual
