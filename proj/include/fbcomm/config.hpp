// Experiment manifests: an INI file with [schedule], [measurement],
// [experiment] and [sweep] sections. Scalars or comma-separated lists are
// accepted for per-step parameters; "inf" is a valid N_f.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbcomm/model.hpp"
#include "fbcomm/recursions.hpp"
#include "fbcomm/schemes.hpp"

namespace fbcomm {

enum class Mode { Predict, Simulate, Stationarity, Oracle };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);

/// Raised when the config file itself cannot be read.
class ConfigIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
  SystemSchedule schedule;
  std::optional<MeasurementModel> measurement;
  RegimeKind regime = RegimeKind::OutputFeedback;
  Mode mode = Mode::Predict;
  bool mode_explicit = false;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  std::string output;  // empty: standard output
  StateEstimateForm form = StateEstimateForm::ProofDerived;
  std::optional<std::vector<double>> sweep_N_f;

  const MeasurementModel* measurement_ptr() const {
    return measurement ? &*measurement : nullptr;
  }
};

/// Parses and validates a manifest. `overrides` are "section.key=value"
/// strings applied on top of the file. Throws ValidationError for missing,
/// unknown or malformed keys.
ExperimentSpec parse_spec(std::istream& in, const std::vector<std::string>& overrides = {});

/// As parse_spec; throws ConfigIoError when the file cannot be opened.
ExperimentSpec load_spec(const std::string& path,
                         const std::vector<std::string>& overrides = {});

/// Comma-separated reals; accepts "inf". Throws ValidationError naming `key`.
std::vector<double> parse_real_list(const std::string& text, const std::string& key);

}  // namespace fbcomm
