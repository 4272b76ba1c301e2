#include "moddisc/error.hpp"

namespace moddisc::detail {

void throw_shape(const std::string& what) { throw ShapeError(what); }
void throw_domain(const std::string& what) { throw DomainError(what); }

}  // namespace moddisc::detail
