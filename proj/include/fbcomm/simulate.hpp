// Seeded Monte Carlo harness.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fbcomm/model.hpp"
#include "fbcomm/schemes.hpp"

namespace fbcomm {

struct McConfig {
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  bool record_trajectories = false;
  unsigned threads = 0;  // 0: FBCOMM_THREADS or hardware concurrency
};

/// Draws the physical noises of one trial. The plant noise w has unit
/// variance, or V_ww(t) with the correlated v(t) when a measurement model is
/// given; n and n_f carry variances N(t) and N_f(t) of the channel use at t.
NoiseStreams sample_gaussian_streams(const SystemSchedule& s,
                                     const MeasurementModel* measurement,
                                     std::uint64_t seed, std::uint64_t trial);

/// Per-step sample statistics for t = 1..T (entry k is t = k+1). Standard
/// errors use the unbiased variance estimator.
struct McSummary {
  RegimeKind regime = RegimeKind::OutputFeedback;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  VariancePrediction prediction;
  std::vector<double> mse_mean;
  std::vector<double> mse_var;
  std::vector<double> mse_se;
  std::vector<double> zpow_mean;
  std::vector<double> zpow_var;
  std::vector<double> zpow_se;
  std::vector<double> mse_delta;  // mse_mean - prediction.mse
  std::vector<TrajectoryRecord> trajectories;

  std::size_t size() const { return mse_mean.size(); }
  /// Largest |mse_mean - prediction| / mse_se over all steps.
  double max_mse_z() const;
  /// Largest |zpow_mean - P(t)| / zpow_se over all steps.
  double max_zpow_z(const SystemSchedule& s) const;
};

/// Runs `cfg.trials` independent trajectories and aggregates them in fixed
/// trial order, so the result does not depend on the thread count.
McSummary monte_carlo(const SystemSchedule& s, const MeasurementModel* measurement,
                      RegimeKind kind, const McConfig& cfg,
                      StateEstimateForm form = StateEstimateForm::ProofDerived);

/// Worker count: cfg.threads if set, else FBCOMM_THREADS, else hardware.
unsigned resolve_threads(unsigned requested);

inline constexpr const char* kSummaryCsvHeader =
    "t,pred_sigma2,pred_vbar,pred_mse,emp_mse,emp_se,emp_zpow";

/// Writes the summary table; predictions only when `mc` is null (the
/// empirical columns are then "nan").
void write_summary_csv(std::ostream& out, const VariancePrediction& prediction,
                       const McSummary* mc);

}  // namespace fbcomm
