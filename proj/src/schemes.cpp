#include "fbcomm/schemes.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

namespace fbcomm {

namespace {

constexpr std::array<std::pair<RegimeKind, std::string_view>, 5> kRegimeNames{{
    {RegimeKind::OutputFeedback, "output-feedback"},
    {RegimeKind::NoFeedback, "no-feedback"},
    {RegimeKind::NoiselessFeedback, "noiseless-feedback"},
    {RegimeKind::StateEstimateFeedback, "state-estimate-feedback"},
    {RegimeKind::SeparationOutputFeedback, "separation"},
}};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string_view regime_name(RegimeKind kind) {
  for (const auto& [k, name] : kRegimeNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

RegimeKind parse_regime(std::string_view name) {
  for (const auto& [k, n] : kRegimeNames) {
    if (n == name) return k;
  }
  throw ValidationError(fmt::format(
      "unknown regime '{}' (expected output-feedback, no-feedback, noiseless-feedback, "
      "state-estimate-feedback or separation)",
      name));
}

void check_regime(const SystemSchedule& s, RegimeKind kind,
                  const MeasurementModel* measurement) {
  for (std::size_t k = 0; k < s.N_f.size(); ++k) {
    const double nf = s.N_f[k];
    switch (kind) {
      case RegimeKind::NoFeedback:
        if (!std::isinf(nf)) {
          throw ValidationError(fmt::format("no-feedback regime requires N_f({}) = inf", k));
        }
        break;
      case RegimeKind::NoiselessFeedback:
        if (nf != 0.0) {
          throw ValidationError(
              fmt::format("noiseless-feedback regime requires N_f({}) = 0", k));
        }
        break;
      case RegimeKind::StateEstimateFeedback:
        if (std::isinf(nf)) {
          throw ValidationError(fmt::format(
              "state-estimate-feedback regime requires a finite N_f({})", k));
        }
        break;
      default:
        break;
    }
  }
  if (kind == RegimeKind::SeparationOutputFeedback && measurement == nullptr) {
    throw ValidationError("separation regime requires a measurement model");
  }
}

VariancePrediction predict_regime(const SystemSchedule& s, RegimeKind kind,
                                  const MeasurementModel* measurement,
                                  StateEstimateForm form) {
  check_regime(s, kind, measurement);
  switch (kind) {
    case RegimeKind::OutputFeedback:
      return predict_output_fb(s);
    case RegimeKind::NoFeedback:
      return predict_no_fb(s);
    case RegimeKind::NoiselessFeedback:
      return predict_noiseless_fb(s);
    case RegimeKind::StateEstimateFeedback:
      return predict_state_estimate_fb(s, form);
    case RegimeKind::SeparationOutputFeedback:
      return predict_separation(s, *measurement);
  }
  throw ValidationError("unhandled regime");
}

GainPlan build_gain_plan(const SystemSchedule& s, RegimeKind kind,
                         const MeasurementModel* measurement, StateEstimateForm form) {
  check_regime(s, kind, measurement);
  const std::size_t T = s.horizon;
  GainPlan plan;
  plan.kind = kind;

  SystemSchedule channel = s;
  VariancePrediction pred;
  if (kind == RegimeKind::SeparationOutputFeedback) {
    require_uncorrelated(*measurement);
    const KalmanPrefilter pf = kalman_prefilter(s, *measurement);
    channel = separation_schedule(s, pf);
    pred = predict_output_fb(channel);
    plan.prefilter_L = pf.L;
  } else {
    pred = predict_regime(s, kind, measurement, form);
  }

  plan.a.assign(T + 1, 0.0);
  plan.K.assign(T + 1, 0.0);
  plan.scale.assign(T + 1, 0.0);
  plan.nhat_gain.assign(T + 1, 0.0);
  plan.alpha.assign(T + 1, 0.0);
  plan.correction.assign(T + 1, 0.0);
  plan.sigma2.assign(T + 1, 0.0);
  plan.sigbar2.assign(T + 1, 0.0);

  plan.a[0] = s.pole(0);
  plan.alpha[0] = s.pole(0);
  plan.sigma2[0] = s.V_xx0;
  for (std::size_t t = 1; t <= T; ++t) {
    const double P = s.power(t), N = s.noise(t), N_f = s.feedback_noise(t);
    const double a = t < T ? s.pole(t) : 0.0;
    const double sigma2 = pred.sigma2[t - 1];
    const Gains g = gains(a, P, N, sigma2);
    plan.a[t] = a;
    plan.K[t] = g.K;
    plan.scale[t] = g.scale;
    plan.sigma2[t] = sigma2;
    plan.alpha[t] = a * N / (P + N);
    switch (kind) {
      case RegimeKind::OutputFeedback:
      case RegimeKind::SeparationOutputFeedback:
        plan.nhat_gain[t] = noise_estimate_gain(N, N_f);
        break;
      case RegimeKind::NoiselessFeedback:
        plan.nhat_gain[t] = 1.0;
        break;
      case RegimeKind::NoFeedback:
        break;
      case RegimeKind::StateEstimateFeedback:
        plan.sigbar2[t] = pred.vbar[t - 1];
        plan.correction[t] = feedback_correction_gain(a, plan.sigbar2[t], N_f);
        break;
    }
  }
  return plan;
}

SchemeState initial_state(RegimeKind kind, double x0) {
  SchemeState st;
  st.t = 0;
  st.x_prev = x0;
  // x̌(0) = x(0): nothing has been sent, so the whole state is unknown to
  // the receiver. The output-feedback family starts from s(0) = 0.
  st.enc = kind == RegimeKind::StateEstimateFeedback ? x0 : 0.0;
  return st;
}

EncoderOutput encoder_step_output_fb(const SchemeState& state, const StepIO& io,
                                     const GainPlan& plan) {
  const std::size_t prev = state.t;
  const std::size_t t = prev + 1;
  double nhat = 0.0;
  if (plan.nhat_gain[prev] != 0.0) {
    nhat = plan.nhat_gain[prev] * (io.y_f_prev - state.z_prev);
  }
  EncoderOutput out{0.0, state};
  out.state.t = t;
  out.state.enc = plan.a[prev] * state.enc + plan.K[prev] * (state.z_prev + nhat);
  out.state.sigma2 = plan.sigma2[t];
  out.z = plan.scale[t] * (io.x_t - out.state.enc);
  out.state.z_prev = out.z;
  out.state.x_prev = io.x_t;
  return out;
}

EncoderOutput encoder_step_noiseless_fb(const SchemeState& state, const StepIO& io,
                                        const GainPlan& plan) {
  const std::size_t prev = state.t;
  const std::size_t t = prev + 1;
  EncoderOutput out{0.0, state};
  out.state.t = t;
  // The fed-back y(t-1) is exact, so the receiver's update is replayed.
  out.state.enc = plan.a[prev] * state.enc + plan.K[prev] * io.y_f_prev;
  out.state.sigma2 = plan.sigma2[t];
  out.z = plan.scale[t] * (io.x_t - out.state.enc);
  out.state.z_prev = out.z;
  out.state.x_prev = io.x_t;
  return out;
}

EncoderOutput encoder_step_state_estimate_fb(const SchemeState& state,
                                             const StepIO& io, const GainPlan& plan) {
  const std::size_t prev = state.t;
  const std::size_t t = prev + 1;
  double correction = 0.0;
  if (plan.correction[prev] != 0.0) {
    // x(t-1) - x̌(t-1) - y_f(t-1) = x̄(t-1) - n_f(t-1)
    correction = plan.correction[prev] * (state.x_prev - state.enc - io.y_f_prev);
  }
  EncoderOutput out{0.0, state};
  out.state.t = t;
  out.state.enc = plan.alpha[prev] * state.enc + io.x_t - plan.a[prev] * state.x_prev +
                  correction;
  out.state.sigma2 = plan.sigma2[t];
  out.state.sigbar2 = plan.sigbar2[t];
  out.z = plan.scale[t] * out.state.enc;
  out.state.z_prev = out.z;
  out.state.x_prev = io.x_t;
  return out;
}

SchemeState decoder_step(const SchemeState& state, double y_t, const GainPlan& plan) {
  SchemeState out = state;
  out.xhat = plan.a[state.t] * state.xhat + plan.K[state.t] * y_t;
  return out;
}

TrajectoryRecord run_regime(const SystemSchedule& s, const MeasurementModel* measurement,
                            const GainPlan& plan, const NoiseStreams& noise) {
  const std::size_t T = s.horizon;
  const RegimeKind kind = plan.kind;
  const bool separation = kind == RegimeKind::SeparationOutputFeedback;
  if (noise.w.size() != T || noise.n.size() != T + 1 || noise.n_f.size() != T + 1 ||
      (separation && noise.v.size() != T + 1)) {
    throw ValidationError(fmt::format("noise streams do not match horizon T = {}", T));
  }
  if (separation && measurement == nullptr) {
    throw ValidationError("separation regime requires a measurement model");
  }

  TrajectoryRecord rec;
  rec.x.assign(T + 1, 0.0);
  rec.z.assign(T + 1, 0.0);
  rec.y.assign(T + 1, 0.0);
  rec.y_f.assign(T + 1, 0.0);
  rec.xhat.assign(T + 1, 0.0);
  rec.sq_err.assign(T + 1, 0.0);

  rec.x[0] = noise.x0;
  double xb = 0.0;  // x̆(t), transmitter's filtered state (separation)
  if (separation) {
    const double gamma0 = measurement->c * noise.x0 + measurement->d * noise.v[0];
    xb = plan.prefilter_L[0] * gamma0;
  }
  SchemeState enc = initial_state(kind, separation ? xb : noise.x0);
  SchemeState dec;
  rec.sq_err[0] = noise.x0 * noise.x0;

  for (std::size_t t = 1; t <= T; ++t) {
    rec.x[t] = s.pole(t - 1) * rec.x[t - 1] + s.drive(t - 1) * noise.w[t - 1];
    double observed = rec.x[t];
    if (separation) {
      const double predicted = s.pole(t - 1) * xb;
      const double gamma = measurement->c * rec.x[t] + measurement->d * noise.v[t];
      xb = predicted + plan.prefilter_L[t] * (gamma - measurement->c * predicted);
      observed = xb;
    }
    const StepIO io{observed, rec.y_f[t - 1]};
    EncoderOutput out;
    switch (kind) {
      case RegimeKind::NoiselessFeedback:
        out = encoder_step_noiseless_fb(enc, io, plan);
        break;
      case RegimeKind::StateEstimateFeedback:
        out = encoder_step_state_estimate_fb(enc, io, plan);
        break;
      default:
        out = encoder_step_output_fb(enc, io, plan);
        break;
    }
    enc = out.state;
    rec.z[t] = out.z;
    rec.y[t] = out.z + noise.n[t];
    rec.xhat[t] = dec.xhat;
    rec.sq_err[t] = (rec.x[t] - dec.xhat) * (rec.x[t] - dec.xhat);

    switch (kind) {
      case RegimeKind::NoiselessFeedback:
        rec.y_f[t] = rec.y[t];
        break;
      case RegimeKind::StateEstimateFeedback:
        rec.y_f[t] = dec.xhat + noise.n_f[t];
        break;
      default:
        rec.y_f[t] = std::isinf(s.feedback_noise(t)) ? kNaN : rec.y[t] + noise.n_f[t];
        break;
    }
    dec.t = t;
    dec = decoder_step(dec, rec.y[t], plan);
  }
  return rec;
}

TrajectoryRecord run_regime(const SystemSchedule& s, const MeasurementModel* measurement,
                            RegimeKind kind, const NoiseStreams& noise,
                            StateEstimateForm form) {
  return run_regime(s, measurement, build_gain_plan(s, kind, measurement, form), noise);
}

}  // namespace fbcomm
