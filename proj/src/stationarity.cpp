#include "fbcomm/stationarity.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include "json.hpp"

namespace fbcomm {

namespace {

void require_constant(const SystemSchedule& s) {
  if (s.horizon == 0 || s.a.empty()) {
    throw ValidationError("stationarity analysis needs a non-empty schedule");
  }
  if (!s.is_constant()) {
    throw ValidationError("stationarity analysis requires a constant schedule");
  }
}

bool constant_sequence(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

struct Params {
  double a, b, P, N, N_f;
};

Params params_of(const SystemSchedule& s) {
  return {s.a[0], s.b[0], s.P[0], s.N[0], s.N_f[0]};
}

// Derivatives of state_estimate_step with respect to (σ², σ̄²).
struct Jacobian {
  double d11, d12, d21, d22;
};

Jacobian state_estimate_jacobian(double sigbar2, const Params& p, StateEstimateForm form) {
  const double PN = p.P + p.N;
  const double a2 = p.a * p.a;
  Jacobian j{a2 * p.N * p.N / (PN * PN), 0.0, a2 * p.P * p.N / (PN * PN), 0.0};
  const double u = sigbar2, denom = u + p.N_f;
  if (u > 0.0 && denom > 0.0) {
    j.d12 = a2 * (u * u + 2.0 * u * p.N_f) / (denom * denom);
    const double nf_factor = form == StateEstimateForm::ProofDerived ? p.N_f : p.N_f * p.N_f;
    j.d22 = a2 * nf_factor * p.N_f / (denom * denom);
  } else if (p.N_f == 0.0) {
    j.d12 = a2;
  }
  return j;
}

}  // namespace

double StationaryReport::max_residual() const {
  double worst = 0.0;
  for (double r : residuals) worst = std::max(worst, std::abs(r));
  return worst;
}

std::string StationaryReport::to_json() const {
  nlohmann::ordered_json j;
  j["regime"] = std::string(regime_name(regime));
  j["bounded"] = bounded;
  j["condition"] = condition;
  j["capacity"] = capacity;
  j["iterations"] = iterations;
  if (fixed_point) {
    j["fixed_point"] = {{"sigma2", fixed_point->sigma2},
                        {"vbar", fixed_point->vbar},
                        {"mse", fixed_point->mse()}};
  } else {
    j["fixed_point"] = nullptr;
  }
  j["residuals"] = residuals;
  j["max_residual"] = max_residual();
  return j.dump(2);
}

double channel_capacity(double P, double N) {
  if (!(P > 0.0) || !(N > 0.0)) {
    throw ValidationError("channel capacity needs P > 0 and N > 0");
  }
  return 0.5 * std::log2(1.0 + P / N);
}

StationaryReport check_noiseless(const SystemSchedule& s) {
  require_constant(s);
  const Params p = params_of(s);
  StationaryReport r;
  r.regime = RegimeKind::NoiselessFeedback;
  r.capacity = channel_capacity(p.P, p.N);
  const double rho = p.a * p.a * p.N / (p.N + p.P);
  r.bounded = rho < 1.0;
  r.condition = fmt::format("log2|a| = {:.17g} {} C = {:.17g}", std::log2(std::abs(p.a)),
                            r.bounded ? "<" : ">=", r.capacity);
  if (r.bounded) {
    const double sigma2 = p.b * p.b / (1.0 - rho);
    r.fixed_point = FixedPoint{sigma2, 0.0};
    r.residuals = {rho * sigma2 + p.b * p.b - sigma2};
  }
  return r;
}

StationaryReport check_output_fb(const SystemSchedule& s) {
  require_constant(s);
  const Params p = params_of(s);
  if (p.N_f == 0.0) {
    StationaryReport r = check_noiseless(s);
    r.regime = RegimeKind::OutputFeedback;
    return r;
  }
  const bool open = std::isinf(p.N_f);
  StationaryReport r;
  r.regime = open ? RegimeKind::NoFeedback : RegimeKind::OutputFeedback;
  r.capacity = channel_capacity(p.P, p.N);
  r.bounded = std::abs(p.a) < 1.0;
  r.condition = fmt::format("|a| = {:.17g} {} 1", std::abs(p.a), r.bounded ? "<" : ">=");
  if (!r.bounded) return r;

  // Reduced recursion: σ²' = ρσ² + b², vbar' = a² vbar + q σ².
  const double PN = p.P + p.N;
  const double a2 = p.a * p.a;
  const double rho = open ? a2 * p.N * p.N / (PN * PN)
                          : a2 * p.N * p.N * (PN + p.N_f) / (PN * PN * (p.N + p.N_f));
  const double q = a2 * p.P * residual_noise_variance(p.N, p.N_f) / (PN * PN);
  const double sigma2 = p.b * p.b / (1.0 - rho);
  const double vbar = q * sigma2 / (1.0 - a2);
  r.fixed_point = FixedPoint{sigma2, vbar};

  // Stationary (s, x) covariance consistent with σ², pushed through one
  // step of the full recursion.
  Cov2 cov;
  cov.V_xx = p.b * p.b / (1.0 - a2);
  const double alpha = p.a * p.N / PN, beta = p.a * p.P / PN;
  cov.V_sx = beta * p.a * cov.V_xx / (1.0 - alpha * p.a);
  cov.V_ss = sigma2 + 2.0 * cov.V_sx - cov.V_xx;
  const double K = gains(p.a, p.P, p.N, sigma2).K;
  const Cov2 next = propagate_cov_output_fb(cov, p.a, p.b, p.P, p.N, p.N_f, K);
  r.residuals = {next.error_variance() - sigma2,
                 a2 * vbar + K * K * residual_noise_variance(p.N, p.N_f) - vbar};
  return r;
}

StationaryReport solve_state_estimate_fp(const SystemSchedule& s, StateEstimateForm form,
                                         const FixedPointOptions& options) {
  require_constant(s);
  const Params p = params_of(s);
  if (std::isinf(p.N_f)) {
    throw ValidationError("state-estimate feedback needs a finite N_f");
  }
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw ValidationError("damping must lie in (0, 1]");
  }
  StationaryReport r;
  r.regime = RegimeKind::StateEstimateFeedback;
  r.capacity = channel_capacity(p.P, p.N);

  auto step = [&](double s2, double sb) {
    return state_estimate_step(s2, sb, p.a, p.b, p.P, p.N, p.N_f, form);
  };
  const double d = options.damping;
  double s2 = 0.0, sb = 0.0;
  bool converged = false;
  std::size_t it = 0;
  while (it < options.max_iterations) {
    ++it;
    const auto [n1, n2] = step(s2, sb);
    const double x1 = (1.0 - d) * s2 + d * n1;
    const double x2 = (1.0 - d) * sb + d * n2;
    if (!std::isfinite(x1) || !std::isfinite(x2) || x1 > options.ceiling ||
        x2 > options.ceiling) {
      r.iterations = it;
      r.condition =
          fmt::format("iterates exceeded {:g} after {} steps", options.ceiling, it);
      return r;
    }
    const bool small = std::abs(x1 - s2) <= options.tolerance * (1.0 + std::abs(x1)) &&
                       std::abs(x2 - sb) <= options.tolerance * (1.0 + std::abs(x2));
    s2 = x1;
    sb = x2;
    if (small) {
      converged = true;
      break;
    }
  }
  r.iterations = it;
  if (!converged) {
    r.condition = fmt::format("no convergence within {} iterations", it);
    return r;
  }

  auto defect = [&](double u1, double u2) {
    const auto [n1, n2] = step(u1, u2);
    return std::pair{n1 - u1, n2 - u2};
  };
  auto [f1, f2] = defect(s2, sb);
  for (int polish = 0; polish < 8; ++polish) {
    const Jacobian j = state_estimate_jacobian(sb, p, form);
    const double j11 = j.d11 - 1.0, j12 = j.d12, j21 = j.d21, j22 = j.d22 - 1.0;
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0) break;
    const double c1 = s2 - (j22 * f1 - j12 * f2) / det;
    const double c2 = std::max(0.0, sb - (j11 * f2 - j21 * f1) / det);
    const auto [g1, g2] = defect(c1, c2);
    if (std::max(std::abs(g1), std::abs(g2)) >= std::max(std::abs(f1), std::abs(f2))) break;
    s2 = c1;
    sb = c2;
    f1 = g1;
    f2 = g2;
  }
  r.fixed_point = FixedPoint{s2, sb};
  r.residuals = {f1, f2};
  r.bounded = r.max_residual() < 1e-10;
  r.condition = r.bounded
                    ? fmt::format("fixed point reached after {} iterations", it)
                    : fmt::format("residual {:.3g} above 1e-10 after polishing",
                                  r.max_residual());
  return r;
}

StationaryReport check_stationarity(const SystemSchedule& s, RegimeKind kind,
                                    const MeasurementModel* measurement,
                                    StateEstimateForm form) {
  check_regime(s, kind, measurement);
  switch (kind) {
    case RegimeKind::OutputFeedback:
    case RegimeKind::NoFeedback:
      return check_output_fb(s);
    case RegimeKind::NoiselessFeedback:
      return check_noiseless(s);
    case RegimeKind::StateEstimateFeedback:
      return solve_state_estimate_fp(s, form);
    case RegimeKind::SeparationOutputFeedback:
      break;
  }

  require_constant(s);
  require_uncorrelated(*measurement);
  const MeasurementModel& m = *measurement;
  if (!constant_sequence(m.V_ww) || !constant_sequence(m.V_vv)) {
    throw ValidationError("stationarity analysis requires a constant measurement model");
  }
  const Params p = params_of(s);
  const double c = m.c, dd = m.d, Vww = m.V_ww.front(), Vvv = m.V_vv.front();

  // Steady state of the pre-filter Riccati recursion.
  StationaryReport r;
  r.regime = kind;
  r.capacity = channel_capacity(p.P, p.N);
  double V = s.V_xx0;
  double L = 0.0, S = 0.0;
  bool converged = false;
  std::size_t it = 0;
  for (; it < 100000; ++it) {
    S = c * c * V + dd * dd * Vvv;
    if (!(S > 0.0)) throw ValidationError("pre-filter innovation variance is zero");
    L = V * c / S;
    const double g = p.a - p.a * L * c, h = -p.a * L * dd;
    const double next = g * g * V + p.b * p.b * Vww + h * h * Vvv;
    if (!std::isfinite(next) || next > 1e12) break;
    if (std::abs(next - V) <= 1e-15 * (1.0 + next)) {
      V = next;
      converged = true;
      break;
    }
    V = next;
  }
  r.iterations = it;
  if (!converged) {
    r.condition = "pre-filter error variance does not settle";
    return r;
  }
  S = c * c * V + dd * dd * Vvv;
  L = V * c / S;
  const double posterior = (1.0 - L * c) * V;

  SystemSchedule driven = s;
  std::fill(driven.b.begin(), driven.b.end(), std::sqrt(L * L * S));
  StationaryReport inner = check_output_fb(driven);
  inner.regime = kind;
  inner.iterations = it;
  inner.condition = fmt::format("pre-filter V_xixi = {:.17g}; {}", V, inner.condition);
  if (inner.fixed_point) inner.fixed_point->vbar += posterior;
  return inner;
}

}  // namespace fbcomm
