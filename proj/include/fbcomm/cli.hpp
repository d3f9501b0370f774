// Experiment runner behind the `fbcomm` executable.
//
//   fbcomm run CONFIG [--mode M] [--regime R] [--trials M] [--seed S]
//                     [-o PATH] [--set section.key=value]...
//   fbcomm compare CONFIG [same options]
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 stationarity
// report without a bounded fixed point.
#pragma once

#include <iosfwd>

#include "fbcomm/config.hpp"

namespace fbcomm {

enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitInvalid = 2,
  kExitUnbounded = 3,
};

/// Header of the oracle-mode CSV.
inline constexpr const char* kOracleCsvHeader =
    "t,pred_mse,oracle_scheme_mse,oracle_conditional_mse";

/// Writes the artifact selected by spec.mode to `out`; diagnostics go to `err`.
int run_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

/// Joins prediction, Monte Carlo and (T <= 12) oracle columns in one table
/// and reports the largest deviations. With a [sweep] section the stationary
/// MSE for each N_f is added to the JSON summary written to `summary`.
int compare_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err,
                       std::ostream& summary);

/// Command-line entry point; never throws.
int run_cli(int argc, const char* const* argv);

}  // namespace fbcomm
