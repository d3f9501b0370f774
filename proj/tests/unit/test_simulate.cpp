#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fbcomm/oracle.hpp"
#include "fbcomm/simulate.hpp"

using namespace fbcomm;

namespace {

SystemSchedule constant(std::size_t T, double a, double b, double P, double N, double N_f,
                        double V0 = 1.0) {
  return SystemSchedule::constant(T, a, b, P, N, N_f, V0);
}

struct Case {
  RegimeKind kind;
  double N_f;
};

const Case kRegimes[] = {
    {RegimeKind::OutputFeedback, 0.1},         {RegimeKind::NoFeedback, kInf},
    {RegimeKind::NoiselessFeedback, 0.0},      {RegimeKind::StateEstimateFeedback, 0.5},
    {RegimeKind::SeparationOutputFeedback, 0.2},
};

const MeasurementModel kMeas = MeasurementModel::constant(12, 1.0, 0.8, 1.0, 0.0, 0.5);

}  // namespace

TEST_CASE("noise streams are reproducible and keyed by trial") {
  const SystemSchedule s = constant(5, 0.9, 1, 1, 1, 0.3);
  const NoiseStreams a = sample_gaussian_streams(s, nullptr, 1, 7);
  const NoiseStreams b = sample_gaussian_streams(s, nullptr, 1, 7);
  const NoiseStreams c = sample_gaussian_streams(s, nullptr, 1, 8);
  CHECK(a.w == b.w);
  CHECK(a.n == b.n);
  CHECK(a.n_f == b.n_f);
  CHECK(a.x0 == b.x0);
  CHECK(a.w != c.w);
  CHECK(a.n[0] == 0.0);
  CHECK(sample_gaussian_streams(constant(5, 0.9, 1, 1, 1, kInf), nullptr, 1, 7).n_f ==
        std::vector<double>(6, 0.0));
}

TEST_CASE("channel noise variance at one million draws") {
  const SystemSchedule s = constant(1, 0.9, 1, 1, 2.5, 0.3);
  const std::size_t M = 1000000;
  double sq = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const NoiseStreams ns = sample_gaussian_streams(s, nullptr, 3, i);
    sq += ns.n[1] * ns.n[1];
    sum += ns.w[0];
  }
  CHECK(std::abs(sq / M - 2.5) < 0.01 * 2.5);
  CHECK(std::abs(sum / M) < 4.0 / std::sqrt(double(M)));
}

TEST_CASE("correlated process and measurement noise") {
  const SystemSchedule s = constant(1, 0.9, 1, 1, 1, 0.3);
  const MeasurementModel m = MeasurementModel::constant(1, 1, 1, 2.0, 0.6, 0.5);
  const std::size_t M = 200000;
  double ww = 0, wv = 0, vv = 0;
  for (std::size_t i = 0; i < M; ++i) {
    const NoiseStreams ns = sample_gaussian_streams(s, &m, 5, i);
    ww += ns.w[0] * ns.w[0];
    wv += ns.w[0] * ns.v[0];
    vv += ns.v[0] * ns.v[0];
  }
  CHECK(ww / M == doctest::Approx(2.0).epsilon(0.02));
  CHECK(wv / M == doctest::Approx(0.6).epsilon(0.05));
  CHECK(vv / M == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("noiseless feedback settles at the closed-form error") {
  const SystemSchedule s = constant(60, 0.5, 1, 1, 1, 0.0);
  const McSummary mc = monte_carlo(s, nullptr, RegimeKind::NoiselessFeedback, {100000, 1, false, 0});
  CHECK(std::abs(mc.mse_mean.back() - 8.0 / 7.0) < 4.0 * mc.mse_se.back());
}

TEST_CASE("every regime meets the power budget and the predicted error") {
  for (const Case& c : kRegimes) {
    CAPTURE(regime_name(c.kind));
    const SystemSchedule s = constant(12, 0.9, 1, 1.5, 1, c.N_f);
    const MeasurementModel* m =
        c.kind == RegimeKind::SeparationOutputFeedback ? &kMeas : nullptr;
    const McSummary mc = monte_carlo(s, m, c.kind, {40000, 11, false, 0});
    CHECK(mc.max_zpow_z(s) < 4.0);
    CHECK(mc.max_mse_z() < 4.0);
  }
}

TEST_CASE("no feedback and an infinitely noisy link give identical summaries") {
  const SystemSchedule s = constant(10, 0.8, 1, 1, 1, kInf);
  const McSummary a = monte_carlo(s, nullptr, RegimeKind::NoFeedback, {3000, 9, false, 0});
  const McSummary b = monte_carlo(s, nullptr, RegimeKind::OutputFeedback, {3000, 9, false, 0});
  CHECK(a.mse_mean == b.mse_mean);
  CHECK(a.zpow_mean == b.zpow_mean);
  CHECK(a.prediction.mse == b.prediction.mse);
}

TEST_CASE("summaries do not depend on the worker count") {
  const SystemSchedule s = constant(10, 0.9, 1, 1, 1, 0.1);
  std::string first;
  for (unsigned threads : {1u, 3u, 8u}) {
    const McSummary mc = monte_carlo(s, nullptr, RegimeKind::OutputFeedback, {5000, 4, false, threads});
    std::ostringstream csv;
    write_summary_csv(csv, mc.prediction, &mc);
    if (first.empty()) first = csv.str();
    CHECK(csv.str() == first);
  }
}

TEST_CASE("standard errors use the unbiased variance") {
  const SystemSchedule s = constant(4, 0.9, 1, 1, 1, 0.1);
  const McSummary mc = monte_carlo(s, nullptr, RegimeKind::OutputFeedback, {700, 2, true, 2});
  REQUIRE(mc.trajectories.size() == 700);
  for (std::size_t k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (const auto& r : mc.trajectories) sum += r.sq_err[k + 1];
    const double mean = sum / 700;
    double ss = 0.0;
    for (const auto& r : mc.trajectories) ss += (r.sq_err[k + 1] - mean) * (r.sq_err[k + 1] - mean);
    CHECK(mc.mse_mean[k] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(mc.mse_var[k] == doctest::Approx(ss / 699).epsilon(1e-10));
    CHECK(mc.mse_se[k] == doctest::Approx(std::sqrt(ss / 699 / 700)).epsilon(1e-10));
  }
  CHECK(mc.trajectories[5].trial == 5);
  CHECK(mc.trajectories[5].seed == 2);
}

TEST_CASE("transmissions are orthogonal to past outputs under noiseless feedback") {
  const SystemSchedule s = constant(6, 0.9, 1, 1, 1, 0.0);
  const std::size_t M = 100000;
  const McSummary mc = monte_carlo(s, nullptr, RegimeKind::NoiselessFeedback, {M, 21, true, 0});
  for (std::size_t t = 2; t <= 6; ++t) {
    for (std::size_t k = 1; k < t; ++k) {
      double zy = 0, zz = 0, yy = 0;
      for (const auto& r : mc.trajectories) {
        zy += r.z[t] * r.y[k];
        zz += r.z[t] * r.z[t];
        yy += r.y[k] * r.y[k];
      }
      CHECK(std::abs(zy / std::sqrt(zz * yy)) < 5.0 / std::sqrt(double(M)));
    }
  }
}

TEST_CASE("with noisy feedback the transmission/output correlation matches the oracle") {
  const SystemSchedule s = constant(6, 0.9, 1, 1, 1, 0.1);
  const std::size_t M = 100000;
  const McSummary mc = monte_carlo(s, nullptr, RegimeKind::OutputFeedback, {M, 22, true, 0});
  const OracleResult o = exact_conditioning_oracle(s, RegimeKind::OutputFeedback);
  for (std::size_t t = 2; t <= 6; ++t) {
    for (std::size_t k = 1; k < t; ++k) {
      double zy = 0;
      for (const auto& r : mc.trajectories) zy += r.z[t] * r.y[k];
      const double exact = o.cov_zy(t - 1, k - 1) / std::sqrt(o.zpow[t - 1] * o.cov_y(k - 1, k - 1));
      const double emp = zy / M / std::sqrt(o.zpow[t - 1] * o.cov_y(k - 1, k - 1));
      CHECK(std::abs(emp - exact) < 5.0 / std::sqrt(double(M)));
    }
  }
}

TEST_CASE("summary CSV layout") {
  const SystemSchedule s = constant(3, 0.5, 1, 1, 1, 0.0);
  std::ostringstream out;
  write_summary_csv(out, predict_noiseless_fb(s), nullptr);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,pred_sigma2,pred_vbar,pred_mse,emp_mse,emp_se,emp_zpow");
  std::getline(in, line);
  CHECK(line == "1,1.25,0,1.25,nan,nan,nan");
}

TEST_CASE("zero trials are rejected") {
  CHECK_THROWS_AS(monte_carlo(constant(3, 0.5, 1, 1, 1, 0.0), nullptr,
                              RegimeKind::NoiselessFeedback, {0, 1, false, 0}),
                  ValidationError);
}
