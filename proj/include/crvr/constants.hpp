#pragma once

namespace crvr {

// Absolute tolerance for utility comparisons in equilibrium checks.
inline constexpr double kUtilityTol = 1e-6;

// Step of the leader grid search used as an independent optimality check.
inline constexpr double kLeaderGridStep = 1e-4;

// Cap on synchronous best-response sweeps when computing follower fixed points.
inline constexpr int kMaxFixedPointSweeps = 100;

// Relative slack accepted when a loaded catalog's largest size should equal 1.
inline constexpr double kSizeAnchorTol = 1e-9;

}  // namespace crvr
