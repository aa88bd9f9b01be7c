#include "crvr/utility.hpp"

#include <cmath>

#include "crvr/errors.hpp"
#include "crvr/privacy_model.hpp"

namespace crvr {

double ud_caching_benefit(const UdContext& ctx, bool action) {
  if (!action) return 0.0;
  return ctx.view_pref * ctx.popularity * ctx.size * (1.0 - ctx.ec_fraction);
}

double ud_caching_cost(const UdContext& ctx, bool action) { return action ? ctx.size * ctx.params.eps_u : 0.0; }

UdTerms ud_terms(const UdContext& ctx, bool action, NewcomerConvention convention) {
  double newcomers = ctx.newcomers;
  if (convention == NewcomerConvention::kExcludeSelf && action && !ctx.requested_before) newcomers += 1.0;
  UdTerms terms;
  terms.benefit = ud_caching_benefit(ctx, action);
  terms.disclosure = delta_disclosure(ctx.requested_before, action, ctx.requested_by, newcomers, ctx.anchor);
  terms.cost = ud_caching_cost(ctx, action);
  return terms;
}

double ud_utility(const UdContext& ctx, bool action, NewcomerConvention convention) {
  return ud_terms(ctx, action, convention).total(ctx.params);
}

double ec_video_utility(double ec_fraction, double request_total, double size, const GameParams& params) {
  return request_total * std::log1p(ec_fraction * size) - params.beta_e * ec_fraction * size * params.eps_e;
}

double ec_utility(std::span<const double> ec, std::span<const double> request_totals, const VideoCatalog& catalog,
                  const GameParams& params) {
  if (ec.size() != catalog.size() || request_totals.size() != catalog.size()) {
    throw ContractViolation("EC utility inputs must cover the catalog");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < ec.size(); ++i) {
    total += ec_video_utility(ec[i], request_totals[i], catalog.size_of(static_cast<VideoId>(i)), params);
  }
  return total;
}

}  // namespace crvr
