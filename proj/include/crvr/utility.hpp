#pragma once

#include <span>

#include "crvr/catalog_trace.hpp"
#include "crvr/system_state.hpp"

namespace crvr {

/// How the newcomer count passed to a UD's disclosure term treats the UD itself.
enum class NewcomerConvention {
  /// `newcomers` counts other users only; a first-time request by the UD adds one.
  kExcludeSelf,
  /// `newcomers` is the full first-time count, held fixed whatever the UD does.
  kIncludeSelf,
};

/// Everything one UD needs to value one video.
struct UdContext {
  double view_pref = 0.0;   // d
  double popularity = 0.0;  // p-hat
  double size = 1.0;        // c
  bool requested_before = false;
  double requested_by = 0.0;  // m
  double newcomers = 0.0;     // first-time requesters (see NewcomerConvention)
  int anchor = 1;             // K
  double ec_fraction = 0.0;   // e
  GameParams params;
};

/// Unweighted components of a UD's utility for one video.
struct UdTerms {
  double benefit = 0.0;     // L
  double disclosure = 0.0;  // D
  double cost = 0.0;        // C

  double total(const GameParams& p) const { return benefit - p.gamma * disclosure - p.beta * cost; }
};

/// L = a * d * p-hat * c * (1 - e).
double ud_caching_benefit(const UdContext& ctx, bool action);

/// C = a * c * eps_u.
double ud_caching_cost(const UdContext& ctx, bool action);

UdTerms ud_terms(const UdContext& ctx, bool action, NewcomerConvention convention = NewcomerConvention::kExcludeSelf);

/// U = L - gamma * D - beta * C for a video the UD does not genuinely request.
double ud_utility(const UdContext& ctx, bool action, NewcomerConvention convention = NewcomerConvention::kExcludeSelf);

/// EC utility contributed by one video: S * ln(1 + e c) - beta_e * e * c * eps_e.
double ec_video_utility(double ec_fraction, double request_total, double size, const GameParams& params);

/// Sum of ec_video_utility over the catalog; `request_totals[i]` is sum_u a_{u,i}.
double ec_utility(std::span<const double> ec, std::span<const double> request_totals, const VideoCatalog& catalog,
                  const GameParams& params);

}  // namespace crvr
