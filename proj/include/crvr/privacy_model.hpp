#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace crvr {

/// Value returned by self_entropy when the observed bit has probability zero.
inline constexpr double kInfiniteEntropy = std::numeric_limits<double>::infinity();

/// Population model of a video's request bit: P(Z=0), P(Z=1) from the count
/// of users with r=1. Throws DomainError unless 0 <= m <= num_users > 0.
std::pair<double, double> disclosure_pmf(int requested_by, int num_users);

/// -ln P(Z = bit). Natural log; kInfiniteEntropy when the probability is zero.
double self_entropy(bool bit, int requested_by, int num_users);

/// Sum of self_entropy over a profile row. Infinite terms propagate.
double user_disclosure(std::span<const std::uint8_t> profile, std::span<const int> requested_by, int num_users);

/// Change in a user's disclosure for one video when `newcomers` users request
/// it for the first time this slot, with n = K - m:
///   r = 1          -> ln(m / (m + dn))
///   r = 0, a = 1   -> ln(n / (m + dn))
///   r = 0, a = 0   -> ln(n / (n - dn))
/// When r = 0 and a = 1, `newcomers` must already count the acting user.
/// Throws DomainError unless K > 2(m + dn).
double delta_disclosure(bool requested_before, bool action, double requested_by, double newcomers, int anchor);

}  // namespace crvr
