#include "mmdest/kernels.hpp"

#include "mmdest/errors.hpp"

namespace mmdest {

std::string to_string(KernelFamily family) {
  return family == KernelFamily::Gaussian ? "gaussian" : "laplace";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian" || name == "Gaussian") return KernelFamily::Gaussian;
  if (name == "laplace" || name == "Laplace") return KernelFamily::Laplace;
  throw ConfigError("unknown kernel family '" + name + "'");
}

}  // namespace mmdest
