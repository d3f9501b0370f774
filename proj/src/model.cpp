#include "fbcomm/model.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>

#include <fmt/format.h>

namespace fbcomm {

namespace {

void broadcast(std::vector<double>& v, std::size_t n, std::string_view name) {
  if (v.size() == 1 && n != 1) {
    v.assign(n, v.front());
  } else if (v.size() != n) {
    throw ValidationError(fmt::format("{} has length {} but {} entries are required",
                                      name, v.size(), n));
  }
}

void require_finite(const std::vector<double>& v, std::string_view name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw ValidationError(fmt::format("{}({}) must be finite", name, i));
    }
  }
}

void require_positive(const std::vector<double>& v, std::string_view name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw ValidationError(fmt::format("{}({}) must be > 0", name, i));
    }
  }
}

}  // namespace

SystemSchedule SystemSchedule::constant(std::size_t T, double a, double b,
                                        double P, double N, double N_f,
                                        double V_xx0) {
  SystemSchedule s;
  s.horizon = T;
  s.a.assign(T, a);
  s.b.assign(T, b);
  s.P.assign(T, P);
  s.N.assign(T, N);
  s.N_f.assign(T, N_f);
  s.V_xx0 = V_xx0;
  return s;
}

bool SystemSchedule::is_constant() const {
  auto flat = [](const std::vector<double>& v) {
    for (double x : v) {
      if (!(x == v.front())) return false;
    }
    return true;
  };
  return flat(a) && flat(b) && flat(P) && flat(N) && flat(N_f);
}

SystemSchedule validate_schedule(SystemSchedule s) {
  if (s.horizon == 0) throw ValidationError("T must be a positive integer");
  const std::size_t T = s.horizon;
  broadcast(s.a, T, "a");
  broadcast(s.b, T, "b");
  broadcast(s.P, T, "P");
  broadcast(s.N, T, "N");
  broadcast(s.N_f, T, "N_f");
  require_finite(s.a, "a");
  require_finite(s.b, "b");
  require_positive(s.P, "P");
  require_positive(s.N, "N");
  for (std::size_t i = 0; i < T; ++i) {
    // +inf is the no-feedback limit; NaN and negatives are rejected.
    if (!(s.N_f[i] >= 0.0)) {
      throw ValidationError(fmt::format("N_f({}) must be >= 0", i));
    }
  }
  if (!(s.V_xx0 >= 0.0) || !std::isfinite(s.V_xx0)) {
    throw ValidationError("V_xx0 must be a finite value >= 0");
  }
  return s;
}

MeasurementModel MeasurementModel::constant(std::size_t T, double c, double d,
                                            double V_ww, double V_wv,
                                            double V_vv) {
  MeasurementModel m;
  m.c = c;
  m.d = d;
  m.V_ww.assign(T + 1, V_ww);
  m.V_wv.assign(T + 1, V_wv);
  m.V_vv.assign(T + 1, V_vv);
  return m;
}

MeasurementModel validate_measurement(MeasurementModel m, std::size_t horizon) {
  const std::size_t n = horizon + 1;
  broadcast(m.V_ww, n, "V_ww");
  broadcast(m.V_wv, n, "V_wv");
  broadcast(m.V_vv, n, "V_vv");
  if (!std::isfinite(m.c) || !std::isfinite(m.d)) {
    throw ValidationError("c and d must be finite");
  }
  require_finite(m.V_ww, "V_ww");
  require_finite(m.V_wv, "V_wv");
  require_finite(m.V_vv, "V_vv");
  for (std::size_t t = 0; t < n; ++t) {
    const double ww = m.V_ww[t], wv = m.V_wv[t], vv = m.V_vv[t];
    const double scale = std::max({1.0, std::abs(ww), std::abs(vv)});
    if (ww < 0.0 || vv < 0.0 || wv * wv > ww * vv + 1e-12 * scale * scale) {
      throw ValidationError(fmt::format(
          "noise covariance [[V_ww, V_wv], [V_wv, V_vv]]({}) is not positive semidefinite", t));
    }
  }
  return m;
}

bool Cov2::is_psd(double tol) const {
  const double scale = std::max({1.0, std::abs(V_ss), std::abs(V_xx)});
  return V_ss >= -tol * scale && V_xx >= -tol * scale &&
         V_sx * V_sx <= V_ss * V_xx + tol * scale * scale;
}

}  // namespace fbcomm
