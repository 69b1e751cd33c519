#ifndef WSNER_ERROR_H_
#define WSNER_ERROR_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace wsner {

// All recoverable failures (bad input files, invalid configuration, contract
// violations on public entry points) are reported with this type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Non-fatal diagnostics collected while processing. Callers decide whether to
// print or discard them.
using Warnings = std::vector<std::string>;

}  // namespace wsner

#endif  // WSNER_ERROR_H_
