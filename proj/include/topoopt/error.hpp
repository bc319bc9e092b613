#ifndef TOPOOPT_ERROR_HPP
#define TOPOOPT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace topoopt {

// Library-wide error type. Validation failures and impossible requests
// throw this; callers that need exit codes map it at the CLI boundary.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace topoopt

#endif  // TOPOOPT_ERROR_HPP
