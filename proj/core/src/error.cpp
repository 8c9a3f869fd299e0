#include "clt/error.hpp"

#include <utility>

namespace clt {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(kind + ": " + message), kind_(std::move(kind)), message_(message) {}

}  // namespace clt
