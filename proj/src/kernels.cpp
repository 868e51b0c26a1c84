#include "logsym/kernels.hpp"

#include <sstream>

namespace logsym {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::LogNormal:
      return "lognormal";
    case Family::LogStudentT:
      return "logt";
    case Family::LogPowerExponential:
      return "logpe";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "lognormal" || name == "logn") return Family::LogNormal;
  if (name == "logt" || name == "log-t") return Family::LogStudentT;
  if (name == "logpe" || name == "log-pe") return Family::LogPowerExponential;
  throw DomainError("unknown kernel family '" + std::string(name) + "'");
}

std::string describe(const KernelFamily& k) {
  std::ostringstream os;
  os << family_name(k.family);
  if (k.has_shape()) os << "(" << k.theta << ")";
  return os.str();
}

}  // namespace logsym
