// Noise-free propagation of gains and error variances for each regime.
#pragma once

#include <utility>
#include <vector>

#include "fbcomm/model.hpp"

namespace fbcomm {

/// Decoder gain K = a κ, κ = σ√P/(P+N), and encoder scale √P/σ.
struct Gains {
  double K = 0.0;
  double kappa = 0.0;
  double scale = 0.0;
};

/// Throws ValidationError for negative sigma2. σ = 0 yields zero gains.
Gains gains(double a, double P, double N, double sigma2);

/// Variance of n̂ = E[n | n + n_f] = N/(N+N_f) (n + n_f), i.e. N²/(N+N_f).
/// Limits: N at N_f = 0, 0 at N_f = +inf.
double noise_estimate_variance(double N, double N_f);

/// Variance of ñ = n - n̂, i.e. N N_f/(N+N_f). Limits: 0 at N_f = 0, N at +inf.
double residual_noise_variance(double N, double N_f);

/// Coefficient N/(N+N_f) applied to y_f - z; 0 when N_f = +inf.
double noise_estimate_gain(double N, double N_f);

/// One step of the (s, x) covariance recursion for output feedback:
///   A cov Aᵀ + diag(K² N²/(N+N_f), b²),  A = [[aN/(P+N), aP/(P+N)], [0, a]].
Cov2 propagate_cov_output_fb(const Cov2& cov, double a, double b, double P,
                             double N, double N_f, double K);

/// Same update with no feedback drive term.
Cov2 propagate_cov_no_fb(const Cov2& cov, double a, double b, double P, double N);

/// Receiver output fed back over a link with noise N_f (0 and +inf allowed).
VariancePrediction predict_output_fb(const SystemSchedule& s);

/// No feedback: the drive-free covariance recursion; N_f entries ignored.
VariancePrediction predict_no_fb(const SystemSchedule& s);

/// Noiseless output feedback: σ²(t+1) = a² N/(N+P) σ²(t) + b².
VariancePrediction predict_noiseless_fb(const SystemSchedule& s);

/// Which σ̄² recursion to use under state-estimate feedback.
///
/// ProofDerived propagates the variances of the encoder's state equations:
///   σ̄²' = a² N_f σ̄²/(σ̄²+N_f) + a² P N σ²/(P+N)².
/// AsPrinted uses a² N_f² σ̄²/(σ̄²+N_f) for the first term instead, which is
/// not dimensionally consistent and disagrees with simulation; kept for
/// comparison only.
enum class StateEstimateForm { ProofDerived, AsPrinted };

/// One step (σ², σ̄²) -> (σ²', σ̄²') of the state-estimate-feedback recursion.
std::pair<double, double> state_estimate_step(double sigma2, double sigbar2,
                                              double a, double b, double P,
                                              double N, double N_f,
                                              StateEstimateForm form);

/// Gain a σ̄²/(σ̄²+N_f) on the transmitter's measurement of x̄; 0 when σ̄² = 0.
double feedback_correction_gain(double a, double sigbar2, double N_f);

/// Receiver estimate fed back over a noisy link; N_f must be finite.
VariancePrediction predict_state_estimate_fb(
    const SystemSchedule& s, StateEstimateForm form = StateEstimateForm::ProofDerived);

/// Transmitter-side Kalman filter for γ(t) = c x(t) + d v(t).
/// L, V_xixi, posterior are indexed by t = 0..T; beta2 by t = 0..T-1.
struct KalmanPrefilter {
  std::vector<double> L;
  std::vector<double> V_xixi;     // prior error variance E ξ(t)²
  std::vector<double> posterior;  // E|x(t) - x̆(t)|² = (1 - L c) V_xixi
  std::vector<double> beta2;      // driving variance of x̆(t+1) = a x̆(t) + β ω
  double V_init = 0.0;            // variance of x̆(0)
};

/// Throws ValidationError when an innovation variance c²V_ξξ + d²V_vv is 0.
KalmanPrefilter kalman_prefilter(const SystemSchedule& s, const MeasurementModel& m);

/// Schedule seen by the communication scheme when it transmits x̆:
/// b(t) replaced by β(t) and V_xx0 by Var x̆(0).
SystemSchedule separation_schedule(const SystemSchedule& s, const KalmanPrefilter& pf);

/// Throws ValidationError if any V_wv entry is non-zero.
void require_uncorrelated(const MeasurementModel& m);

/// Output feedback on the pre-filtered state. vbar includes the posterior
/// pre-filter error, so mse = σ² + vbar is the error on x itself.
/// Requires V_wv = 0 at every step.
VariancePrediction predict_separation(const SystemSchedule& s, const MeasurementModel& m);

}  // namespace fbcomm
