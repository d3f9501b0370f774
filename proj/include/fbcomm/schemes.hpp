// Realisable encoder/decoder filters for each feedback regime.
//
// Step ordering at transmission time t (1 <= t <= T):
//   1. the plant (or pre-filter) produces x(t);
//   2. the encoder folds in the feedback sample y_f(t-1) received since the
//      previous transmission, updates its state and emits z(t);
//   3. the receiver observes y(t) = z(t) + n(t); its estimate x̂(t) was
//      already formed from y^{t-1}, and it now forms x̂(t+1);
//   4. the feedback link delivers y_f(t) = φ(t) + n_f(t), where φ(t) is
//      y(t) (output feedback) or x̂(t) (state-estimate feedback).
#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "fbcomm/model.hpp"
#include "fbcomm/recursions.hpp"

namespace fbcomm {

enum class RegimeKind {
  OutputFeedback,
  NoFeedback,
  NoiselessFeedback,
  StateEstimateFeedback,
  SeparationOutputFeedback,
};

std::string_view regime_name(RegimeKind kind);
/// Accepts the names produced by regime_name(); throws ValidationError otherwise.
RegimeKind parse_regime(std::string_view name);

/// NoFeedback needs N_f = +inf everywhere, NoiselessFeedback N_f = 0,
/// StateEstimateFeedback finite N_f, Separation a measurement model.
void check_regime(const SystemSchedule& s, RegimeKind kind,
                  const MeasurementModel* measurement = nullptr);

/// Deterministic prediction for any regime.
VariancePrediction predict_regime(const SystemSchedule& s, RegimeKind kind,
                                  const MeasurementModel* measurement = nullptr,
                                  StateEstimateForm form = StateEstimateForm::ProofDerived);

/// Per-time gains computed offline from the variance recursions; every
/// vector is indexed by t = 0..T. Entry 0 describes the silent step
/// (y(0) = 0): K(0) = scale(0) = 0 and alpha(0) = a(0).
struct GainPlan {
  RegimeKind kind = RegimeKind::OutputFeedback;
  std::vector<double> a;           // a(t); a(T) = 0
  std::vector<double> K;           // decoder gain; K(T) = 0
  std::vector<double> scale;       // √P(t)/σ_t, 0 when σ_t = 0
  std::vector<double> nhat_gain;   // N/(N+N_f)
  std::vector<double> alpha;       // a N/(P+N)
  std::vector<double> correction;  // a σ̄²/(σ̄²+N_f)
  std::vector<double> sigma2;
  std::vector<double> sigbar2;
  std::vector<double> prefilter_L;  // separation regime only
};

GainPlan build_gain_plan(const SystemSchedule& s, RegimeKind kind,
                         const MeasurementModel* measurement = nullptr,
                         StateEstimateForm form = StateEstimateForm::ProofDerived);

/// What the encoder observes at time t.
struct StepIO {
  double x_t = 0.0;       // plant state, or x̆(t) in the separation regime
  double y_f_prev = 0.0;  // y_f(t-1)
};

struct EncoderOutput {
  double z = 0.0;
  SchemeState state;
};

/// Initial encoder state before t = 1, given x(0) (or x̆(0)).
SchemeState initial_state(RegimeKind kind, double x0);

/// s(t) = a s(t-1) + K (z(t-1) + n̂(t-1)), n̂ = N/(N+N_f) (y_f - z);
/// z(t) = (√P/σ_t)(x(t) - s(t)). With N_f = +inf, n̂ = 0 (no feedback).
EncoderOutput encoder_step_output_fb(const SchemeState& state, const StepIO& io,
                                     const GainPlan& plan);

/// Replicates x̂ from the exactly fed-back y; z(t) = (√P/σ_t)(x(t) - x̂(t)).
EncoderOutput encoder_step_noiseless_fb(const SchemeState& state, const StepIO& io,
                                        const GainPlan& plan);

/// x̌(t) = αx̌(t-1) + x(t) - a x(t-1) + g (x(t-1) - x̌(t-1) - y_f(t-1)).
EncoderOutput encoder_step_state_estimate_fb(const SchemeState& state,
                                             const StepIO& io, const GainPlan& plan);

/// x̂(t+1) = a(t) x̂(t) + K(t) y(t). Returns the updated state.
SchemeState decoder_step(const SchemeState& state, double y_t, const GainPlan& plan);

/// Physical noise realisations for one trial.
struct NoiseStreams {
  double x0 = 0.0;
  std::vector<double> w;    // t = 0..T-1, before the b(t) gain
  std::vector<double> v;    // t = 0..T, separation regime only
  std::vector<double> n;    // t = 0..T, entry 0 unused
  std::vector<double> n_f;  // t = 0..T, entry 0 unused; 0 when N_f = +inf
};

TrajectoryRecord run_regime(const SystemSchedule& s, const MeasurementModel* measurement,
                            const GainPlan& plan, const NoiseStreams& noise);

TrajectoryRecord run_regime(const SystemSchedule& s, const MeasurementModel* measurement,
                            RegimeKind kind, const NoiseStreams& noise,
                            StateEstimateForm form = StateEstimateForm::ProofDerived);

}  // namespace fbcomm
