#include "fbcomm/recursions.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <fmt/format.h>

namespace fbcomm {

Gains gains(double a, double P, double N, double sigma2) {
  if (!(sigma2 >= 0.0)) {
    throw ValidationError(fmt::format("sigma2 must be >= 0 (got {})", sigma2));
  }
  Gains g;
  if (sigma2 == 0.0) return g;
  const double sigma = std::sqrt(sigma2);
  g.kappa = sigma * std::sqrt(P) / (P + N);
  g.K = a * g.kappa;
  g.scale = std::sqrt(P) / sigma;
  return g;
}

double noise_estimate_variance(double N, double N_f) {
  if (std::isinf(N_f)) return 0.0;
  return N * N / (N + N_f);
}

double residual_noise_variance(double N, double N_f) {
  if (N_f == 0.0) return 0.0;
  if (std::isinf(N_f)) return N;
  return N * N_f / (N + N_f);
}

double noise_estimate_gain(double N, double N_f) {
  if (std::isinf(N_f)) return 0.0;
  return N / (N + N_f);
}

namespace {

Cov2 transition(const Cov2& v, double a, double P, double N) {
  const double a11 = a * N / (P + N);
  const double a12 = a * P / (P + N);
  Cov2 out;
  out.V_ss = a11 * a11 * v.V_ss + 2.0 * a11 * a12 * v.V_sx + a12 * a12 * v.V_xx;
  out.V_sx = a11 * a * v.V_sx + a12 * a * v.V_xx;
  out.V_xx = a * a * v.V_xx;
  return out;
}

// Cov2 at t = 1: no transmission at t = 0, so s(1) = 0.
Cov2 initial_cov(const SystemSchedule& s) {
  const double a0 = s.pole(0), b0 = s.drive(0);
  return Cov2{0.0, 0.0, a0 * a0 * s.V_xx0 + b0 * b0};
}

double first_error_variance(const SystemSchedule& s) {
  const double a0 = s.pole(0), b0 = s.drive(0);
  return a0 * a0 * s.V_xx0 + b0 * b0;
}

VariancePrediction allocate(std::size_t T) {
  VariancePrediction p;
  p.sigma2.resize(T);
  p.vbar.resize(T);
  p.mse.resize(T);
  return p;
}

}  // namespace

Cov2 propagate_cov_output_fb(const Cov2& cov, double a, double b, double P,
                             double N, double N_f, double K) {
  Cov2 out = transition(cov, a, P, N);
  out.V_ss += K * K * noise_estimate_variance(N, N_f);
  out.V_xx += b * b;
  return out;
}

Cov2 propagate_cov_no_fb(const Cov2& cov, double a, double b, double P, double N) {
  Cov2 out = transition(cov, a, P, N);
  out.V_xx += b * b;
  return out;
}

VariancePrediction predict_output_fb(const SystemSchedule& s) {
  const std::size_t T = s.horizon;
  VariancePrediction p = allocate(T);
  Cov2 cov = initial_cov(s);
  double vbar = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const double sigma2 = std::max(0.0, cov.error_variance());
    p.sigma2[t - 1] = sigma2;
    p.vbar[t - 1] = vbar;
    p.mse[t - 1] = sigma2 + vbar;
    if (t == T) break;
    const double a = s.pole(t), P = s.power(t), N = s.noise(t), N_f = s.feedback_noise(t);
    const double K = gains(a, P, N, sigma2).K;
    cov = propagate_cov_output_fb(cov, a, s.drive(t), P, N, N_f, K);
    vbar = a * a * vbar + K * K * residual_noise_variance(N, N_f);
  }
  return p;
}

VariancePrediction predict_no_fb(const SystemSchedule& s) {
  const std::size_t T = s.horizon;
  VariancePrediction p = allocate(T);
  Cov2 cov = initial_cov(s);
  double vbar = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const double sigma2 = std::max(0.0, cov.error_variance());
    p.sigma2[t - 1] = sigma2;
    p.vbar[t - 1] = vbar;
    p.mse[t - 1] = sigma2 + vbar;
    if (t == T) break;
    const double a = s.pole(t), P = s.power(t), N = s.noise(t);
    const double K = gains(a, P, N, sigma2).K;
    cov = propagate_cov_no_fb(cov, a, s.drive(t), P, N);
    vbar = a * a * vbar + K * K * N;
  }
  return p;
}

VariancePrediction predict_noiseless_fb(const SystemSchedule& s) {
  const std::size_t T = s.horizon;
  VariancePrediction p = allocate(T);
  double sigma2 = first_error_variance(s);
  for (std::size_t t = 1; t <= T; ++t) {
    p.sigma2[t - 1] = sigma2;
    p.vbar[t - 1] = 0.0;
    p.mse[t - 1] = sigma2;
    if (t == T) break;
    const double a = s.pole(t), b = s.drive(t), P = s.power(t), N = s.noise(t);
    sigma2 = N / (N + P) * a * a * sigma2 + b * b;
  }
  return p;
}

double feedback_correction_gain(double a, double sigbar2, double N_f) {
  if (sigbar2 == 0.0) return 0.0;
  return a * sigbar2 / (sigbar2 + N_f);
}

std::pair<double, double> state_estimate_step(double sigma2, double sigbar2,
                                              double a, double b, double P,
                                              double N, double N_f,
                                              StateEstimateForm form) {
  const double PN = P + N;
  double sigma2_next = a * a * N * N / (PN * PN) * sigma2 + b * b;
  double sigbar2_next = a * a * P * N / (PN * PN) * sigma2;
  if (sigbar2 > 0.0) {
    const double denom = sigbar2 + N_f;
    sigma2_next += a * a * sigbar2 * sigbar2 / denom;
    const double nf_factor = form == StateEstimateForm::ProofDerived ? N_f : N_f * N_f;
    sigbar2_next += a * a * nf_factor * sigbar2 / denom;
  }
  return {sigma2_next, sigbar2_next};
}

VariancePrediction predict_state_estimate_fb(const SystemSchedule& s,
                                             StateEstimateForm form) {
  const std::size_t T = s.horizon;
  for (std::size_t t = 1; t <= T; ++t) {
    if (std::isinf(s.feedback_noise(t))) {
      throw ValidationError(fmt::format(
          "state-estimate feedback needs a finite N_f; N_f({}) is +inf", t - 1));
    }
  }
  VariancePrediction p = allocate(T);
  double sigma2 = first_error_variance(s);
  double sigbar2 = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    p.sigma2[t - 1] = sigma2;
    p.vbar[t - 1] = sigbar2;
    p.mse[t - 1] = sigma2 + sigbar2;
    if (t == T) break;
    std::tie(sigma2, sigbar2) =
        state_estimate_step(sigma2, sigbar2, s.pole(t), s.drive(t), s.power(t),
                            s.noise(t), s.feedback_noise(t), form);
  }
  return p;
}

KalmanPrefilter kalman_prefilter(const SystemSchedule& s, const MeasurementModel& m) {
  const std::size_t T = s.horizon;
  KalmanPrefilter pf;
  pf.L.resize(T + 1);
  pf.V_xixi.resize(T + 1);
  pf.posterior.resize(T + 1);
  pf.beta2.resize(T);
  std::vector<double> innovation(T + 1);

  const double c = m.c, d = m.d;
  double V = s.V_xx0;
  for (std::size_t t = 0; t <= T; ++t) {
    const double S = c * c * V + d * d * m.V_vv.at(t);
    if (!(S > 0.0)) {
      throw ValidationError(fmt::format(
          "innovation variance c^2 V_xixi + d^2 V_vv is zero at t = {}", t));
    }
    const double L = V * c / S;
    pf.L[t] = L;
    pf.V_xixi[t] = V;
    pf.posterior[t] = (1.0 - L * c) * V;
    innovation[t] = S;
    if (t == T) break;
    // ξ(t+1) = (a - aLc) ξ(t) + b w(t) - a L d v(t)
    const double a = s.pole(t), b = s.drive(t);
    const double g = a - a * L * c;
    const double h = -a * L * d;
    V = g * g * V + b * b * m.V_ww.at(t) + 2.0 * b * h * m.V_wv.at(t) +
        h * h * m.V_vv.at(t);
  }
  for (std::size_t t = 0; t < T; ++t) {
    pf.beta2[t] = pf.L[t + 1] * pf.L[t + 1] * innovation[t + 1];
  }
  pf.V_init = pf.L[0] * pf.L[0] * innovation[0];
  return pf;
}

SystemSchedule separation_schedule(const SystemSchedule& s, const KalmanPrefilter& pf) {
  SystemSchedule out = s;
  for (std::size_t t = 0; t < s.horizon; ++t) out.b[t] = std::sqrt(pf.beta2.at(t));
  out.V_xx0 = pf.V_init;
  return out;
}

void require_uncorrelated(const MeasurementModel& m) {
  for (std::size_t t = 0; t < m.V_wv.size(); ++t) {
    if (m.V_wv[t] != 0.0) {
      throw ValidationError(fmt::format(
          "separation regime requires uncorrelated noises; V_wv({}) != 0", t));
    }
  }
}

VariancePrediction predict_separation(const SystemSchedule& s, const MeasurementModel& m) {
  require_uncorrelated(m);
  const KalmanPrefilter pf = kalman_prefilter(s, m);
  VariancePrediction p = predict_output_fb(separation_schedule(s, pf));
  for (std::size_t k = 0; k < p.size(); ++k) {
    p.vbar[k] += pf.posterior[k + 1];
    p.mse[k] = p.sigma2[k] + p.vbar[k];
  }
  return p;
}

}  // namespace fbcomm
