#include "meshforge/errors.hpp"

#include <sstream>

namespace meshforge {

namespace {

std::string cycle_message(const std::vector<int>& nodes) {
  std::ostringstream os;
  os << "netlist contains a cycle through nodes [";
  for (std::size_t i = 0; i < nodes.size(); ++i) os << (i ? ", " : "") << nodes[i];
  os << "]";
  return os.str();
}

}  // namespace

CycleError::CycleError(std::vector<int> nodes)
    : Error(cycle_message(nodes)), nodes_(std::move(nodes)) {}

DanglingLinkError::DanglingLinkError(int link, const std::string& what)
    : Error("link " + std::to_string(link) + " " + what), link_(link) {}

NonUnitaryError::NonUnitaryError(double deviation)
    : Error("matrix is not unitary: ||U^dag U - I||_F = " + std::to_string(deviation)),
      deviation_(deviation) {}

}  // namespace meshforge
