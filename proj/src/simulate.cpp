#include "fbcomm/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fbcomm/rng.hpp"

namespace fbcomm {

namespace {

constexpr std::uint64_t kBlockTrials = 512;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Running mean / sum of squared deviations, one slot per time step.
struct Moments {
  std::uint64_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;

  explicit Moments(std::size_t n = 0) : mean(n, 0.0), m2(n, 0.0) {}

  void add_sample_row(const std::vector<double>& row, std::size_t offset) {
    // Caller bumps `count` once per row.
    const double n = static_cast<double>(count);
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const double x = row[k + offset];
      const double delta = x - mean[k];
      mean[k] += delta / n;
      m2[k] += delta * (x - mean[k]);
    }
  }

  void merge(const Moments& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double n = na + nb;
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const double delta = other.mean[k] - mean[k];
      mean[k] += delta * nb / n;
      m2[k] += other.m2[k] + delta * delta * na * nb / n;
    }
    count += other.count;
  }
};

struct BlockResult {
  Moments mse;
  Moments zpow;
};

double z_score(double delta, double se) {
  if (delta == 0.0) return 0.0;
  if (!(se > 0.0)) return std::numeric_limits<double>::infinity();
  return std::abs(delta) / se;
}

}  // namespace

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FBCOMM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

NoiseStreams sample_gaussian_streams(const SystemSchedule& s,
                                     const MeasurementModel* measurement,
                                     std::uint64_t seed, std::uint64_t trial) {
  const std::size_t T = s.horizon;
  NoiseStreams ns;
  ns.x0 = std::sqrt(s.V_xx0) * standard_normal(seed, trial, Stream::InitialState, 0);
  ns.w.resize(T);
  ns.n.assign(T + 1, 0.0);
  ns.n_f.assign(T + 1, 0.0);

  if (measurement == nullptr) {
    for (std::size_t t = 0; t < T; ++t) {
      ns.w[t] = standard_normal(seed, trial, Stream::Process, static_cast<std::uint32_t>(t));
    }
  } else {
    // (w, v) = Cholesky factor of [[V_ww, V_wv], [V_wv, V_vv]] times iid normals.
    ns.v.resize(T + 1);
    for (std::size_t t = 0; t <= T; ++t) {
      const auto tt = static_cast<std::uint32_t>(t);
      const double e1 = standard_normal(seed, trial, Stream::Process, tt);
      const double e2 = standard_normal(seed, trial, Stream::Measurement, tt);
      const double ww = measurement->V_ww.at(t), wv = measurement->V_wv.at(t),
                   vv = measurement->V_vv.at(t);
      const double l11 = std::sqrt(ww);
      const double l21 = l11 > 0.0 ? wv / l11 : 0.0;
      const double l22 = std::sqrt(std::max(0.0, vv - l21 * l21));
      if (t < T) ns.w[t] = l11 * e1;
      ns.v[t] = l21 * e1 + l22 * e2;
    }
  }
  for (std::size_t t = 1; t <= T; ++t) {
    const auto tt = static_cast<std::uint32_t>(t);
    ns.n[t] = std::sqrt(s.noise(t)) * standard_normal(seed, trial, Stream::Channel, tt);
    const double nf = s.feedback_noise(t);
    if (!std::isinf(nf)) {
      ns.n_f[t] = std::sqrt(nf) * standard_normal(seed, trial, Stream::Feedback, tt);
    }
  }
  return ns;
}

McSummary monte_carlo(const SystemSchedule& s, const MeasurementModel* measurement,
                      RegimeKind kind, const McConfig& cfg, StateEstimateForm form) {
  if (cfg.trials == 0) throw ValidationError("trials must be >= 1");
  const std::size_t T = s.horizon;
  const GainPlan plan = build_gain_plan(s, kind, measurement, form);

  McSummary out;
  out.regime = kind;
  out.trials = cfg.trials;
  out.seed = cfg.seed;
  out.prediction = predict_regime(s, kind, measurement, form);
  if (cfg.record_trajectories) out.trajectories.resize(cfg.trials);

  const std::uint64_t blocks = (cfg.trials + kBlockTrials - 1) / kBlockTrials;
  std::vector<BlockResult> results(blocks, BlockResult{Moments(T), Moments(T)});
  std::atomic<std::uint64_t> next{0};

  auto worker = [&] {
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      BlockResult& r = results[b];
      const std::uint64_t first = b * kBlockTrials;
      const std::uint64_t last = std::min(cfg.trials, first + kBlockTrials);
      std::vector<double> zpow(T + 1);
      for (std::uint64_t trial = first; trial < last; ++trial) {
        const NoiseStreams noise = sample_gaussian_streams(s, measurement, cfg.seed, trial);
        TrajectoryRecord rec = run_regime(s, measurement, plan, noise);
        for (std::size_t t = 0; t <= T; ++t) zpow[t] = rec.z[t] * rec.z[t];
        ++r.mse.count;
        r.mse.add_sample_row(rec.sq_err, 1);
        ++r.zpow.count;
        r.zpow.add_sample_row(zpow, 1);
        if (cfg.record_trajectories) {
          rec.seed = cfg.seed;
          rec.trial = trial;
          out.trajectories[trial] = std::move(rec);
        }
      }
    }
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(cfg.threads), blocks));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  Moments mse(T), zp(T);
  for (const BlockResult& r : results) {
    mse.merge(r.mse);
    zp.merge(r.zpow);
  }

  const double M = static_cast<double>(cfg.trials);
  auto finish = [&](const Moments& m, std::vector<double>& mean, std::vector<double>& var,
                    std::vector<double>& se) {
    mean = m.mean;
    var.resize(T);
    se.resize(T);
    for (std::size_t k = 0; k < T; ++k) {
      var[k] = cfg.trials > 1 ? m.m2[k] / (M - 1.0) : kNaN;
      se[k] = std::sqrt(var[k] / M);
    }
  };
  finish(mse, out.mse_mean, out.mse_var, out.mse_se);
  finish(zp, out.zpow_mean, out.zpow_var, out.zpow_se);
  out.mse_delta.resize(T);
  for (std::size_t k = 0; k < T; ++k) {
    out.mse_delta[k] = out.mse_mean[k] - out.prediction.mse[k];
  }
  return out;
}

double McSummary::max_mse_z() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    worst = std::max(worst, z_score(mse_delta[k], mse_se[k]));
  }
  return worst;
}

double McSummary::max_zpow_z(const SystemSchedule& s) const {
  double worst = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    worst = std::max(worst, z_score(zpow_mean[k] - s.power(k + 1), zpow_se[k]));
  }
  return worst;
}

void write_summary_csv(std::ostream& out, const VariancePrediction& prediction,
                       const McSummary* mc) {
  out << kSummaryCsvHeader << '\n';
  for (std::size_t k = 0; k < prediction.size(); ++k) {
    const double emp_mse = mc ? mc->mse_mean[k] : kNaN;
    const double emp_se = mc ? mc->mse_se[k] : kNaN;
    const double emp_zpow = mc ? mc->zpow_mean[k] : kNaN;
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
               VariancePrediction::time_of(k), prediction.sigma2[k], prediction.vbar[k],
               prediction.mse[k], emp_mse, emp_se, emp_zpow);
  }
}

}  // namespace fbcomm
