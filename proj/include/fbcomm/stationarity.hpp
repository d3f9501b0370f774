// Boundedness tests and stationary fixed points of the variance recursions.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fbcomm/model.hpp"
#include "fbcomm/recursions.hpp"
#include "fbcomm/schemes.hpp"

namespace fbcomm {

/// Stationary pair. `vbar` is σ̄² under state-estimate feedback and the
/// residual-noise variance in the output-feedback family.
struct FixedPoint {
  double sigma2 = 0.0;
  double vbar = 0.0;
  double mse() const { return sigma2 + vbar; }
};

struct StationaryReport {
  RegimeKind regime = RegimeKind::OutputFeedback;
  bool bounded = false;
  std::string condition;
  std::optional<FixedPoint> fixed_point;
  std::vector<double> residuals;
  double capacity = 0.0;
  std::size_t iterations = 0;

  double max_residual() const;
  /// Single JSON object; `fixed_point` is null when absent.
  std::string to_json() const;
};

/// C = ½ log₂(1 + P/N) bits per channel use.
double channel_capacity(double P, double N);

/// Noiseless feedback: bounded iff log₂|a| < C, with σ² = b²/(1 - a²N/(N+P)).
/// N_f entries are ignored. Requires a constant schedule.
StationaryReport check_noiseless(const SystemSchedule& s);

/// Output feedback (N_f = 0 delegates to check_noiseless; N_f = +inf is the
/// no-feedback case). For N_f > 0 bounded iff |a| < 1.
StationaryReport check_output_fb(const SystemSchedule& s);

struct FixedPointOptions {
  double damping = 1.0;  // 1.0 is the plain time recursion
  std::size_t max_iterations = 100000;
  double ceiling = 1e12;
  double tolerance = 1e-13;  // relative step size declaring convergence
};

/// State-estimate feedback: damped iteration of the time recursion from
/// (0, 0), then Newton polishing of the two stationary equations.
StationaryReport solve_state_estimate_fp(
    const SystemSchedule& s, StateEstimateForm form = StateEstimateForm::ProofDerived,
    const FixedPointOptions& options = {});

/// Dispatches to the regime's check. The separation regime iterates the
/// pre-filter to its steady state and checks output feedback driven by the
/// stationary β², adding the stationary posterior error to vbar.
StationaryReport check_stationarity(const SystemSchedule& s, RegimeKind kind,
                                    const MeasurementModel* measurement = nullptr,
                                    StateEstimateForm form = StateEstimateForm::ProofDerived);

}  // namespace fbcomm
