#include "crvr/privacy_model.hpp"

#include <cmath>
#include <string>

#include "crvr/errors.hpp"

namespace crvr {

std::pair<double, double> disclosure_pmf(int requested_by, int num_users) {
  if (num_users <= 0) throw DomainError("disclosure model needs at least one user");
  if (requested_by < 0 || requested_by > num_users) {
    throw DomainError("request count " + std::to_string(requested_by) + " outside [0, " +
                      std::to_string(num_users) + "]");
  }
  const double total = num_users;
  return {(total - requested_by) / total, requested_by / total};
}

double self_entropy(bool bit, int requested_by, int num_users) {
  const auto [p0, p1] = disclosure_pmf(requested_by, num_users);
  const double p = bit ? p1 : p0;
  if (p <= 0.0) return kInfiniteEntropy;
  return -std::log(p);
}

double user_disclosure(std::span<const std::uint8_t> profile, std::span<const int> requested_by, int num_users) {
  if (profile.size() != requested_by.size()) throw ContractViolation("profile and aggregate lengths differ");
  double total = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) total += self_entropy(profile[i] != 0, requested_by[i], num_users);
  return total;
}

double delta_disclosure(bool requested_before, bool action, double requested_by, double newcomers, int anchor) {
  if (requested_by < 0.0 || newcomers < 0.0) throw DomainError("negative request counts");
  if (!(anchor > 2.0 * (requested_by + newcomers))) {
    throw DomainError("anchor K=" + std::to_string(anchor) + " violates K > 2(m + dn)");
  }
  const double m = requested_by;
  const double n = anchor - requested_by;
  if (requested_before) {
    if (newcomers == 0.0) return 0.0;
    return std::log(m / (m + newcomers));
  }
  if (action) return std::log(n / (m + newcomers));
  return std::log(n / (n - newcomers));
}

}  // namespace crvr
