#include "rwsdetect/common.hpp"

#include <cmath>

namespace rws {

std::string to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::null:
      return "null";
    case Hypothesis::rws:
      return "rws";
    case Hypothesis::proxy:
      return "proxy";
  }
  return "unknown";
}

Hypothesis hypothesis_from_string(const std::string& s) {
  if (s == "null") return Hypothesis::null;
  if (s == "rws") return Hypothesis::rws;
  if (s == "proxy") return Hypothesis::proxy;
  throw ConfigError("unknown hypothesis '" + s + "' (expected null, rws or proxy)");
}

namespace {
void require_log_log(std::int64_t n, const char* what) {
  if (n < 16) {
    throw std::domain_error(std::string(what) + ": requires n >= 16, got n = " +
                            std::to_string(n));
  }
}
}  // namespace

double tilde_L(std::int64_t n) {
  require_log_log(n, "tilde_L");
  const double ll = std::log(std::log(static_cast<double>(n)));
  return std::exp(ll * ll * ll);
}

double L_n(std::int64_t n) {
  require_log_log(n, "L_n");
  const double ll = std::log(std::log(static_cast<double>(n)));
  return std::exp(ll * ll);
}

double tw_threshold(std::int64_t n) {
  if (n < 2) throw std::domain_error("tw_threshold: requires n >= 2");
  return std::pow(3.0 * std::log(static_cast<double>(n)), 2.0 / 3.0);
}

}  // namespace rws
