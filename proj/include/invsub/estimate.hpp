#pragma once

#include <optional>
#include <string>

namespace invsub {

enum class Method { postwidder, bromwich, exact };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::postwidder: return "postwidder";
    case Method::bromwich: return "bromwich";
    case Method::exact: return "exact";
  }
  return "unknown";
}

/// One evaluation of the renewal function at t.
struct RenewalEstimate {
  double t = 0.0;
  double U = 0.0;
  std::optional<double> dU;
  Method method = Method::postwidder;
  double est_error = 0.0;
  std::optional<double> dU_error;
  bool converged = false;
  int n_used = 0;  ///< extrapolation rows (Post-Widder) or intervals (Bromwich)
  std::string diagnostic;  ///< empty unless the engine suspects its own answer
};

} // namespace invsub
