#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "fbcomm/model.hpp"
#include "fbcomm/recursions.hpp"
#include "reference_filters.hpp"

using namespace fbcomm;

namespace {

SystemSchedule scalar(std::size_t T, double a, double b, double P, double N, double N_f,
                      double V0) {
  SystemSchedule s;
  s.horizon = T;
  s.a = {a};
  s.b = {b};
  s.P = {P};
  s.N = {N};
  s.N_f = {N_f};
  s.V_xx0 = V0;
  return s;
}

std::string error_of(const SystemSchedule& s) {
  try {
    validate_schedule(s);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("scalar parameters broadcast to the horizon") {
  const SystemSchedule s = validate_schedule(scalar(3, 0.9, 1, 1, 1, 0.1, 1));
  CHECK(s.a == std::vector<double>(3, 0.9));
  CHECK(s.N_f == std::vector<double>(3, 0.1));
  CHECK(s == SystemSchedule::constant(3, 0.9, 1, 1, 1, 0.1, 1));
  CHECK(s.is_constant());
}

TEST_CASE("validation is idempotent on expanded schedules") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const SystemSchedule s = testref::random_schedule(rng, 7, 1.2);
    CHECK(validate_schedule(s) == s);
    CHECK(validate_schedule(validate_schedule(s)) == s);
  }
}

TEST_CASE("validation names the first violated constraint") {
  CHECK(error_of(scalar(2, 1, 1, 0, 1, 0, 1)) == "P(0) must be > 0");
  CHECK(error_of(scalar(2, 1, 1, 1, -1, 0, 1)) == "N(0) must be > 0");
  CHECK(error_of(scalar(2, 1, 1, 1, 1, -0.5, 1)) == "N_f(0) must be >= 0");
  CHECK(error_of(scalar(0, 1, 1, 1, 1, 0, 1)) == "T must be a positive integer");
  CHECK(error_of(scalar(2, 1, 1, 1, 1, 0, -1)) == "V_xx0 must be a finite value >= 0");

  SystemSchedule bad = scalar(3, 1, 1, 1, 1, 0, 1);
  bad.P = {1, 2, 0};
  CHECK(error_of(bad) == "P(2) must be > 0");
  bad.P = {1, 2};
  CHECK(error_of(bad).find("length") != std::string::npos);
}

TEST_CASE("infinite feedback noise is accepted") {
  const SystemSchedule s = validate_schedule(scalar(2, 0.9, 1, 1, 1, kInf, 1));
  CHECK(std::isinf(s.feedback_noise(1)));
  CHECK(std::isinf(s.feedback_noise(2)));
}

TEST_CASE("channel accessors map transmission time to the stored entry") {
  SystemSchedule s = scalar(3, 0.9, 1, 1, 1, 0.1, 1);
  s.P = {1, 2, 3};
  s = validate_schedule(s);
  CHECK(s.power(1) == 1.0);
  CHECK(s.power(3) == 3.0);
  CHECK_THROWS(s.power(4));
  CHECK_FALSE(s.is_constant());
}

TEST_CASE("measurement models broadcast to T+1 and must be PSD") {
  MeasurementModel m;
  m.c = 1;
  m.d = 0.5;
  m.V_ww = {1};
  m.V_wv = {0.5};
  m.V_vv = {1};
  const MeasurementModel v = validate_measurement(m, 4);
  CHECK(v.V_ww.size() == 5);
  CHECK(v == MeasurementModel::constant(4, 1, 0.5, 1, 0.5, 1));

  m.V_wv = {1.5};
  CHECK_THROWS_AS(validate_measurement(m, 4), ValidationError);
  m.V_wv = {0};
  m.V_vv = {-1};
  CHECK_THROWS_AS(validate_measurement(m, 4), ValidationError);
}

TEST_CASE("Cov2 error variance and PSD check") {
  const Cov2 c{1.0, 0.5, 2.0};
  CHECK(c.error_variance() == doctest::Approx(2.0));
  CHECK(c.is_psd());
  CHECK_FALSE(Cov2{1.0, 2.0, 1.0}.is_psd());
  CHECK_FALSE(Cov2{-1.0, 0.0, 1.0}.is_psd());
}

TEST_CASE("prediction totals are consistent") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    const SystemSchedule s = testref::random_schedule(rng, 8, 1.1);
    const VariancePrediction p = predict_output_fb(s);
    REQUIRE(p.size() == 8);
    for (std::size_t k = 0; k < p.size(); ++k) {
      CHECK(p.mse[k] == p.sigma2[k] + p.vbar[k]);
      CHECK(p.sigma2[k] >= 0.0);
      CHECK(p.vbar[k] >= 0.0);
    }
  }
  CHECK(VariancePrediction::time_of(0) == 1);
}
