#include "tcm/error.hpp"

#include <utility>

namespace tcm {

Error::Error(std::string kind, const std::string& what)
    : std::runtime_error(what), kind_(std::move(kind)) {}

}  // namespace tcm
