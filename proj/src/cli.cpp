#include "fbcomm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "fbcomm/oracle.hpp"
#include "fbcomm/simulate.hpp"
#include "fbcomm/stationarity.hpp"
#include "json.hpp"

namespace fbcomm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void write_oracle_csv(std::ostream& out, const VariancePrediction& pred,
                      const OracleResult& oracle) {
  out << kOracleCsvHeader << '\n';
  for (std::size_t k = 0; k < pred.size(); ++k) {
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g}\n", VariancePrediction::time_of(k),
               pred.mse[k], oracle.scheme_mse[k], oracle.conditional_mse[k]);
  }
}

// Regime used for one entry of an N_f sweep.
RegimeKind sweep_regime(RegimeKind configured) {
  switch (configured) {
    case RegimeKind::StateEstimateFeedback:
    case RegimeKind::SeparationOutputFeedback:
      return configured;
    default:
      return RegimeKind::OutputFeedback;
  }
}

nlohmann::ordered_json real_or_string(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

}  // namespace

int run_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  const SystemSchedule& s = spec.schedule;
  const MeasurementModel* m = spec.measurement_ptr();
  switch (spec.mode) {
    case Mode::Predict: {
      write_summary_csv(out, predict_regime(s, spec.regime, m, spec.form), nullptr);
      return kExitOk;
    }
    case Mode::Simulate: {
      const McSummary mc =
          monte_carlo(s, m, spec.regime, McConfig{spec.trials, spec.seed, false, 0}, spec.form);
      write_summary_csv(out, mc.prediction, &mc);
      fmt::print(err, "max |emp_mse - pred_mse| / se = {:.6g}\n", mc.max_mse_z());
      return kExitOk;
    }
    case Mode::Stationarity: {
      const StationaryReport r = check_stationarity(s, spec.regime, m, spec.form);
      out << r.to_json() << '\n';
      if (!r.bounded) {
        fmt::print(err, "no bounded stationary solution: {}\n", r.condition);
        return kExitUnbounded;
      }
      return kExitOk;
    }
    case Mode::Oracle: {
      const VariancePrediction pred = predict_regime(s, spec.regime, m, spec.form);
      write_oracle_csv(out, pred, exact_conditioning_oracle(s, spec.regime, m));
      return kExitOk;
    }
  }
  return kExitInvalid;
}

int compare_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err,
                       std::ostream& summary) {
  if (spec.mode_explicit && spec.mode != Mode::Simulate) {
    throw ValidationError(
        fmt::format("compare requires mode = simulate, got {}", mode_name(spec.mode)));
  }
  if (spec.sweep_N_f && spec.sweep_N_f->empty()) {
    throw ValidationError("sweep.N_f is empty");
  }
  const SystemSchedule& s = spec.schedule;
  const MeasurementModel* m = spec.measurement_ptr();
  const std::size_t T = s.horizon;

  const McSummary mc =
      monte_carlo(s, m, spec.regime, McConfig{spec.trials, spec.seed, false, 0}, spec.form);
  std::optional<OracleResult> oracle;
  if (T <= kOracleMaxHorizon) oracle = exact_conditioning_oracle(s, spec.regime, m);

  out << kSummaryCsvHeader << ",oracle_scheme_mse,oracle_conditional_mse\n";
  double oracle_dev = 0.0, oracle_gap = 0.0;
  const VariancePrediction& p = mc.prediction;
  for (std::size_t k = 0; k < T; ++k) {
    const double os = oracle ? oracle->scheme_mse[k] : kNaN;
    const double oc = oracle ? oracle->conditional_mse[k] : kNaN;
    if (oracle) {
      oracle_dev = std::max(oracle_dev, std::abs(os - p.mse[k]));
      oracle_gap = std::max(oracle_gap, p.mse[k] - oc);
    }
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
               VariancePrediction::time_of(k), p.sigma2[k], p.vbar[k], p.mse[k],
               mc.mse_mean[k], mc.mse_se[k], mc.zpow_mean[k], os, oc);
  }

  nlohmann::ordered_json j;
  j["regime"] = std::string(regime_name(spec.regime));
  j["trials"] = spec.trials;
  j["seed"] = spec.seed;
  j["max_mse_z"] = mc.max_mse_z();
  j["max_zpow_z"] = mc.max_zpow_z(s);
  j["max_oracle_scheme_deviation"] = oracle ? nlohmann::ordered_json(oracle_dev) : nullptr;
  j["max_oracle_conditional_gap"] = oracle ? nlohmann::ordered_json(oracle_gap) : nullptr;
  fmt::print(err,
             "max_mse_z={:.6g} max_zpow_z={:.6g} max_oracle_scheme_deviation={:.3g} "
             "max_oracle_conditional_gap={:.3g}\n",
             mc.max_mse_z(), mc.max_zpow_z(s), oracle ? oracle_dev : kNaN,
             oracle ? oracle_gap : kNaN);

  if (spec.sweep_N_f) {
    std::vector<std::pair<double, double>> points;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (double nf : *spec.sweep_N_f) {
      SystemSchedule swept = s;
      std::fill(swept.N_f.begin(), swept.N_f.end(), nf);
      const StationaryReport r = check_stationarity(swept, sweep_regime(spec.regime), m, spec.form);
      const double mse = r.bounded && r.fixed_point ? r.fixed_point->mse() : kInf;
      points.emplace_back(nf, mse);
      rows.push_back({{"N_f", real_or_string(nf)},
                      {"bounded", r.bounded},
                      {"mse", r.bounded ? real_or_string(mse) : nullptr}});
    }
    std::sort(points.begin(), points.end());
    bool monotone = true;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (points[i].second < points[i - 1].second) monotone = false;
    }
    j["sweep"] = rows;
    j["sweep_monotone_nondecreasing"] = monotone;
  }
  summary << j.dump(2) << '\n';
  return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Linear encoder/decoder filters over Gaussian channels with feedback"};
  app.require_subcommand(1);

  std::string config;
  std::string mode, regime, output;
  std::string trials, seed;
  std::vector<std::string> sets;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "experiment manifest (INI)")->required();
    sub->add_option("--mode", mode, "predict | simulate | stationarity | oracle");
    sub->add_option("--regime", regime,
                    "output-feedback | no-feedback | noiseless-feedback | "
                    "state-estimate-feedback | separation");
    sub->add_option("--trials", trials, "Monte Carlo trials");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("-o,--output", output, "output path (default: standard output)");
    sub->add_option("--set", sets, "override a config key: section.key=value");
  };
  CLI::App* run = app.add_subcommand("run", "write the artifact selected by the mode");
  CLI::App* compare =
      app.add_subcommand("compare", "join prediction, Monte Carlo and oracle columns");
  add_common(run);
  add_common(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  std::vector<std::string> overrides = sets;
  if (!mode.empty()) overrides.push_back("experiment.mode=" + mode);
  if (!regime.empty()) overrides.push_back("experiment.regime=" + regime);
  if (!trials.empty()) overrides.push_back("experiment.trials=" + trials);
  if (!seed.empty()) overrides.push_back("experiment.seed=" + seed);
  if (!output.empty()) overrides.push_back("experiment.output=" + output);

  try {
    const ExperimentSpec spec = load_spec(config, overrides);
    std::ofstream file;
    if (!spec.output.empty()) {
      file.open(spec.output);
      if (!file) {
        fmt::print(std::cerr, "error: cannot write '{}'\n", spec.output);
        return kExitIo;
      }
    }
    std::ostream& out = spec.output.empty() ? std::cout : file;
    int code = kExitOk;
    if (run->parsed()) {
      code = run_experiment(spec, out, std::cerr);
    } else {
      std::ostringstream summary;
      code = compare_experiment(spec, out, std::cerr, summary);
      if (spec.output.empty()) {
        std::cerr << summary.str();
      } else {
        const std::string path = spec.output + ".summary.json";
        std::ofstream js(path);
        if (!(js << summary.str())) {
          fmt::print(std::cerr, "error: cannot write '{}'\n", path);
          return kExitIo;
        }
      }
    }
    out.flush();
    if (!out) {
      fmt::print(std::cerr, "error: failed writing output\n");
      return kExitIo;
    }
    return code;
  } catch (const ConfigIoError& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kExitIo;
  } catch (const ValidationError& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kExitIo;
  }
}

}  // namespace fbcomm
