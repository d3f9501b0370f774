// Domain types shared by every feedback regime: parameter schedules,
// the transmitter-side measurement model, covariance blocks and the
// per-step series produced by predictions and simulations.
//
// Time conventions used throughout the library:
//   * the plant runs x(t+1) = a(t) x(t) + b(t) w(t) for t = 0..T-1;
//   * y(0) := 0, transmissions happen at t = 1..T and x̂(t) uses y^{t-1};
//   * the cost is the sum of E|x(t) - x̂(t)|^2 over t = 1..T.
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbcomm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised for any violated precondition on user-supplied parameters.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-step scalar plant and channel parameters.
///
/// `a` and `b` are indexed by plant step k = 0..T-1 (x(k) -> x(k+1)).
/// `P`, `N` and `N_f` are indexed by k = 0..T-1 as well, where entry k
/// belongs to the channel use at time t = k+1. Use the accessors below
/// rather than raw indexing to avoid off-by-one mistakes.
///
/// `N_f` may be +inf (no feedback link) or 0 (noiseless feedback).
/// Sequences of length 1 are broadcast to length T by validate_schedule().
struct SystemSchedule {
  std::size_t horizon = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> P;
  std::vector<double> N;
  std::vector<double> N_f;
  double V_xx0 = 0.0;

  static SystemSchedule constant(std::size_t T, double a, double b, double P,
                                 double N, double N_f, double V_xx0);

  double pole(std::size_t t) const { return a.at(t); }
  double drive(std::size_t t) const { return b.at(t); }
  // Channel parameters of the transmission at time t (t >= 1).
  double power(std::size_t t) const { return P.at(t - 1); }
  double noise(std::size_t t) const { return N.at(t - 1); }
  double feedback_noise(std::size_t t) const { return N_f.at(t - 1); }

  bool is_constant() const;
  bool operator==(const SystemSchedule&) const = default;
};

/// Checks every schedule invariant and broadcasts scalar sequences.
/// Throws ValidationError naming the first violated constraint and index.
SystemSchedule validate_schedule(SystemSchedule s);

/// Transmitter measurement γ(t) = c x(t) + d v(t), with (w(t), v(t))
/// jointly Gaussian. Sequences are indexed by t = 0..T (length T+1).
struct MeasurementModel {
  double c = 1.0;
  double d = 0.0;
  std::vector<double> V_ww;
  std::vector<double> V_wv;
  std::vector<double> V_vv;

  static MeasurementModel constant(std::size_t T, double c, double d,
                                   double V_ww, double V_wv, double V_vv);
  bool operator==(const MeasurementModel&) const = default;
};

/// Broadcasts scalar sequences to length T+1 and checks that every
/// per-step noise covariance is symmetric positive semidefinite.
MeasurementModel validate_measurement(MeasurementModel m, std::size_t horizon);

/// Covariance of the stacked vector (s(t), x(t)).
struct Cov2 {
  double V_ss = 0.0;
  double V_sx = 0.0;
  double V_xx = 0.0;

  // E|x - s|^2
  double error_variance() const { return V_xx - 2.0 * V_sx + V_ss; }
  bool is_psd(double tol = 1e-12) const;
};

/// Joint encoder/decoder state at one step. `enc` holds s(t) in the
/// output-feedback family and x̌(t) under state-estimate feedback.
struct SchemeState {
  std::size_t t = 0;
  double xhat = 0.0;
  double enc = 0.0;
  double z_prev = 0.0;  // encoder's own last transmission
  double x_prev = 0.0;  // last plant (or pre-filter) sample seen by encoder
  double sigma2 = 0.0;
  double sigbar2 = 0.0;
  Cov2 cov;
};

/// Theoretical per-step series for t = 1..T (entry k is time t = k+1).
struct VariancePrediction {
  std::vector<double> sigma2;
  std::vector<double> vbar;
  std::vector<double> mse;

  std::size_t size() const { return mse.size(); }
  static std::size_t time_of(std::size_t k) { return k + 1; }
};

/// One simulated realisation. All sequences have length T+1 and are
/// indexed by t = 0..T; z(0) = y(0) = y_f(0) = 0 and x̂(0) = 0.
/// y_f holds NaN where the feedback link is absent (N_f = +inf).
struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::vector<double> x;
  std::vector<double> z;
  std::vector<double> y;
  std::vector<double> y_f;
  std::vector<double> xhat;
  std::vector<double> sq_err;
};

}  // namespace fbcomm
