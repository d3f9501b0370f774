#include "fbcomm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace fbcomm {

namespace {

using Row = Eigen::RowVectorXd;

constexpr double kPinvTol = 1e-12;

// Variances below this (relative to the signal scale) are treated as zero,
// matching the σ = 0 convention of the realisable scheme.
constexpr double kDegenerateTol = 1e-14;

double cov(const Row& u, const Row& v) { return u.dot(v); }
double var(const Row& u) { return u.squaredNorm(); }

// Minimum-variance error of predicting `target` linearly from `obs`.
Row residual(const Row& target, const std::vector<Row>& obs) {
  if (obs.empty()) return target;
  const auto m = static_cast<Eigen::Index>(obs.size());
  Eigen::MatrixXd Y(m, target.size());
  for (Eigen::Index i = 0; i < m; ++i) Y.row(i) = obs[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd C = Y * Y.transpose();
  const Eigen::VectorXd c = Y * target.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double cutoff = kPinvTol * std::max(1.0, lam.cwiseAbs().maxCoeff());
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (lam(i) > cutoff) inv(i) = 1.0 / lam(i);
  }
  const Eigen::VectorXd coef =
      eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose() * c;
  return target - coef.transpose() * Y;
}

// Basis layout: x0 | e_w(0..) | e_v(0..T) | n(1..T) | n_f(1..T).
struct Basis {
  Eigen::Index x0 = 0, w = 1, v = 0, n = 0, nf = 0, dim = 0;
  std::size_t w_len = 0;
};

Basis make_basis(std::size_t T, bool measured) {
  Basis b;
  const auto TT = static_cast<Eigen::Index>(T);
  b.w_len = measured ? T + 1 : T;
  b.v = b.w + static_cast<Eigen::Index>(b.w_len);
  b.n = b.v + (measured ? TT + 1 : 0);
  b.nf = b.n + TT;
  b.dim = b.nf + TT;
  return b;
}

}  // namespace

double OracleResult::total_conditional_mse() const {
  return std::accumulate(conditional_mse.begin(), conditional_mse.end(), 0.0);
}

OracleResult exact_conditioning_oracle(const SystemSchedule& s, RegimeKind kind,
                                       const MeasurementModel* measurement,
                                       const OraclePerturbation& perturbation) {
  const std::size_t T = s.horizon;
  if (T > kOracleMaxHorizon) {
    throw ValidationError(
        fmt::format("oracle horizon T = {} exceeds the maximum {}", T, kOracleMaxHorizon));
  }
  check_regime(s, kind, measurement);
  const bool separation = kind == RegimeKind::SeparationOutputFeedback;
  const bool state_estimate = kind == RegimeKind::StateEstimateFeedback;
  const Basis B = make_basis(T, separation);
  auto unit = [&](Eigen::Index i) {
    Row r = Row::Zero(B.dim);
    r(i) = 1.0;
    return r;
  };
  auto factor_at = [&](PerturbedGain g, std::size_t t) {
    return perturbation.gain == g && perturbation.t == t ? perturbation.factor : 1.0;
  };

  // Physical noises.
  std::vector<Row> w(T), v;
  for (std::size_t k = 0; k < T; ++k) w[k] = unit(B.w + static_cast<Eigen::Index>(k));
  if (separation) {
    v.resize(T + 1);
    for (std::size_t k = 0; k <= T; ++k) {
      const double ww = measurement->V_ww.at(k), wv = measurement->V_wv.at(k),
                   vv = measurement->V_vv.at(k);
      const double l11 = std::sqrt(ww);
      const double l21 = l11 > 0.0 ? wv / l11 : 0.0;
      const double l22 = std::sqrt(std::max(0.0, vv - l21 * l21));
      const Row e1 = unit(B.w + static_cast<Eigen::Index>(k));
      const Row e2 = unit(B.v + static_cast<Eigen::Index>(k));
      if (k < T) w[k] = l11 * e1;
      v[k] = l21 * e1 + l22 * e2;
    }
  }
  std::vector<Row> n(T + 1, Row::Zero(B.dim)), nf(T + 1, Row::Zero(B.dim));
  for (std::size_t t = 1; t <= T; ++t) {
    const auto i = static_cast<Eigen::Index>(t - 1);
    n[t] = std::sqrt(s.noise(t)) * unit(B.n + i);
    if (!std::isinf(s.feedback_noise(t))) {
      nf[t] = std::sqrt(s.feedback_noise(t)) * unit(B.nf + i);
    }
  }

  // Plant.
  std::vector<Row> x(T + 1);
  x[0] = std::sqrt(s.V_xx0) * unit(B.x0);
  for (std::size_t t = 1; t <= T; ++t) {
    x[t] = s.pole(t - 1) * x[t - 1] + s.drive(t - 1) * w[t - 1];
  }

  // Encoder input: the state itself, or its causal MMSE estimate from γ.
  std::vector<Row> input = x;
  if (separation) {
    std::vector<Row> gamma;
    for (std::size_t t = 0; t <= T; ++t) {
      gamma.push_back(measurement->c * x[t] + measurement->d * v[t]);
      input[t] = x[t] - residual(x[t], gamma);
    }
  }

  OracleResult out;
  out.scheme_mse.resize(T);
  out.conditional_mse.resize(T);
  out.open_loop.resize(T);
  out.sigma2.resize(T);
  out.sigbar2.assign(T, 0.0);
  out.zpow.resize(T);

  const Row zero = Row::Zero(B.dim);
  std::vector<Row> z(T + 1, zero), y(T + 1, zero), yf(T + 1, zero), xhat(T + 1, zero);
  std::vector<double> K(T + 1, 0.0);
  Row enc = state_estimate ? input[0] : zero;  // s(t) or x̌(t)
  std::vector<Row> observed;                    // y(1..t-1)

  for (std::size_t t = 1; t <= T; ++t) {
    const std::size_t p = t - 1;
    const double a_prev = s.pole(p);
    const double P = s.power(t), N = s.noise(t), Nf = s.feedback_noise(t);

    if (state_estimate) {
      double g = 0.0;
      double alpha = a_prev;
      if (p >= 1) {
        const double Pp = s.power(p), Np = s.noise(p), Nfp = s.feedback_noise(p);
        alpha = a_prev * Np / (Pp + Np);
        const double sb = var(x[p] - enc - xhat[p]);
        out.sigbar2[p - 1] = sb;
        g = sb > kDegenerateTol * (1.0 + var(x[p])) ? a_prev * sb / (sb + Nfp) : 0.0;
      }
      alpha *= factor_at(PerturbedGain::EncoderGain, p);
      g *= factor_at(PerturbedGain::Correction, p);
      // The transmitter sees y_f(t-1) = x̂(t-1) + n_f(t-1), hence x - x̌ - y_f.
      enc = alpha * enc + input[t] - a_prev * input[p] + g * (input[p] - enc - yf[p]);
    } else if (kind == RegimeKind::NoiselessFeedback) {
      enc = a_prev * enc + K[p] * factor_at(PerturbedGain::EncoderGain, p) * y[p];
    } else {
      Row nhat = zero;
      if (p >= 1 && !std::isinf(s.feedback_noise(p))) {
        const double Np = s.noise(p), Nfp = s.feedback_noise(p);
        const double h =
            Np / (Np + Nfp) * factor_at(PerturbedGain::NoiseEstimate, p);
        nhat = h * (yf[p] - z[p]);
      }
      enc = a_prev * enc + K[p] * factor_at(PerturbedGain::EncoderGain, p) * (z[p] + nhat);
    }

    const Row innovation = state_estimate ? enc : Row(input[t] - enc);
    const double sigma2 = var(innovation);
    const bool silent = !(sigma2 > kDegenerateTol * (1.0 + var(input[t])));
    const double scale = silent ? 0.0 : std::sqrt(P / sigma2);
    z[t] = scale * innovation;
    y[t] = z[t] + n[t];
    const double a_t = t < T ? s.pole(t) : 0.0;
    K[t] = silent ? 0.0 : a_t * std::sqrt(sigma2) * std::sqrt(P) / (P + N);

    const std::size_t k = t - 1;
    out.sigma2[k] = silent ? 0.0 : sigma2;
    out.zpow[k] = var(z[t]);
    out.open_loop[k] = var(x[t]);
    out.scheme_mse[k] = var(x[t] - xhat[t]);
    out.conditional_mse[k] = var(residual(x[t], observed));

    if (kind == RegimeKind::NoiselessFeedback) {
      yf[t] = y[t];
    } else if (state_estimate) {
      yf[t] = xhat[t] + nf[t];
    } else if (!std::isinf(Nf)) {
      yf[t] = y[t] + nf[t];
    }
    if (t < T) xhat[t + 1] = a_t * xhat[t] + K[t] * y[t];
    observed.push_back(y[t]);
  }
  if (state_estimate && T >= 1) {
    out.sigbar2[T - 1] = var(x[T] - enc - xhat[T]);
  }

  const auto TT = static_cast<Eigen::Index>(T);
  out.cov_y.resize(TT, TT);
  out.cov_xy.resize(TT, TT);
  out.cov_zy.resize(TT, TT);
  for (std::size_t i = 1; i <= T; ++i) {
    for (std::size_t j = 1; j <= T; ++j) {
      const auto r = static_cast<Eigen::Index>(i - 1), c = static_cast<Eigen::Index>(j - 1);
      out.cov_y(r, c) = cov(y[i], y[j]);
      out.cov_xy(r, c) = cov(x[i], y[j]);
      out.cov_zy(r, c) = cov(z[i], y[j]);
    }
  }
  return out;
}

}  // namespace fbcomm
