// Exact joint-Gaussian reference for short horizons.
//
// Every signal of the closed loop (plant, encoder, channel, feedback,
// decoder) is a linear combination of independent standard normals, so it
// is stored as a coefficient row over that basis and all second moments are
// exact inner products. Gains are recomputed from these exact moments, never
// taken from the variance recursions.
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fbcomm/model.hpp"
#include "fbcomm/schemes.hpp"

namespace fbcomm {

inline constexpr std::size_t kOracleMaxHorizon = 12;

/// Encoder coefficient scaled by `factor` at a single time step. The encoder
/// scale √P/σ is always recomputed from the exact variance afterwards, so
/// every perturbed encoder still meets the power budget.
enum class PerturbedGain {
  None,
  EncoderGain,    // K in the s update, or α under state-estimate feedback
  NoiseEstimate,  // N/(N+N_f) applied to y_f - z
  Correction,     // g applied to the transmitter's measurement of x̄
};

struct OraclePerturbation {
  PerturbedGain gain = PerturbedGain::None;
  std::size_t t = 1;  // time index of the perturbed coefficient (1..T-1)
  double factor = 1.0;
};

/// Per-step series are indexed k = 0..T-1 for t = k+1.
struct OracleResult {
  std::vector<double> scheme_mse;       // E|x(t) - x̂(t)|² of the scheme's decoder
  std::vector<double> conditional_mse;  // E|x(t) - E[x(t) | y(1..t-1)]|²
  std::vector<double> open_loop;        // Var x(t)
  std::vector<double> sigma2;           // Var of the encoder's innovation
  std::vector<double> sigbar2;          // Var x̄(t), state-estimate feedback only
  std::vector<double> zpow;             // E z(t)²
  Eigen::MatrixXd cov_y;                // Cov(y(i), y(j)), i, j = 1..T
  Eigen::MatrixXd cov_xy;               // Cov(x(i), y(j))
  Eigen::MatrixXd cov_zy;               // Cov(z(i), y(j))

  std::size_t size() const { return scheme_mse.size(); }
  double total_conditional_mse() const;
};

/// Throws ValidationError when T exceeds kOracleMaxHorizon or the regime is
/// inconsistent with the schedule.
OracleResult exact_conditioning_oracle(const SystemSchedule& s, RegimeKind kind,
                                       const MeasurementModel* measurement = nullptr,
                                       const OraclePerturbation& perturbation = {});

}  // namespace fbcomm
