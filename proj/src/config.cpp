#include "fbcomm/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace fbcomm {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"schedule", {"T", "a", "b", "P", "N", "N_f", "V_xx0"}},
      {"measurement", {"c", "d", "V_ww", "V_wv", "V_vv"}},
      {"experiment", {"mode", "regime", "trials", "seed", "output", "form"}},
      {"sweep", {"N_f"}},
  };
  return keys;
}

void reject_unknown(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      throw ValidationError(fmt::format("unknown config section [{}]", section));
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) {
        throw ValidationError(fmt::format("unknown config key {}.{}", section, key));
      }
    }
  }
}

std::optional<std::string> lookup(const pt::ptree& tree, const std::string& path) {
  if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) {
    return boost::algorithm::trim_copy(*v);
  }
  return std::nullopt;
}

std::string require(const pt::ptree& tree, const std::string& path) {
  auto v = lookup(tree, path);
  if (!v || v->empty()) throw ValidationError(fmt::format("missing config key {}", path));
  return *v;
}

double parse_real(std::string text, const std::string& key) {
  boost::algorithm::trim(text);
  std::string lower = boost::algorithm::to_lower_copy(text);
  if (lower == "inf" || lower == "+inf" || lower == "infinity") return kInf;
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty() || std::isnan(value)) {
    throw ValidationError(fmt::format("{}: '{}' is not a number", key, text));
  }
  return value;
}

std::uint64_t parse_count(const std::string& text, const std::string& key) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ValidationError(fmt::format("{}: '{}' is not a non-negative integer", key, text));
  }
  return value;
}

void apply_override(pt::ptree& tree, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError(fmt::format("override '{}' is not section.key=value", item));
  }
  const std::string path = boost::algorithm::trim_copy(item.substr(0, eq));
  if (std::count(path.begin(), path.end(), '.') != 1) {
    throw ValidationError(fmt::format("override '{}' is not section.key=value", item));
  }
  tree.put(pt::ptree::path_type(path, '.'), item.substr(eq + 1));
}

StateEstimateForm parse_form(const std::string& text) {
  if (text == "proof-derived") return StateEstimateForm::ProofDerived;
  if (text == "as-printed") return StateEstimateForm::AsPrinted;
  throw ValidationError(fmt::format(
      "experiment.form: '{}' (expected proof-derived or as-printed)", text));
}

}  // namespace

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::Predict: return "predict";
    case Mode::Simulate: return "simulate";
    case Mode::Stationarity: return "stationarity";
    case Mode::Oracle: return "oracle";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::Predict, Mode::Simulate, Mode::Stationarity, Mode::Oracle}) {
    if (mode_name(m) == name) return m;
  }
  throw ValidationError(fmt::format(
      "unknown mode '{}' (expected predict, simulate, stationarity or oracle)", name));
}

std::vector<double> parse_real_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  if (boost::algorithm::trim_copy(text).empty()) return out;
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::algorithm::is_any_of(","));
  for (const std::string& part : parts) out.push_back(parse_real(part, key));
  return out;
}

ExperimentSpec parse_spec(std::istream& in, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(fmt::format("malformed config: {}", e.message()));
  }
  for (const std::string& item : overrides) apply_override(tree, item);
  reject_unknown(tree);

  ExperimentSpec spec;
  if (auto v = lookup(tree, "experiment.regime")) spec.regime = parse_regime(*v);
  if (auto v = lookup(tree, "experiment.mode")) {
    spec.mode = parse_mode(*v);
    spec.mode_explicit = true;
  }
  if (auto v = lookup(tree, "experiment.trials")) {
    spec.trials = parse_count(*v, "experiment.trials");
    if (spec.trials == 0) throw ValidationError("experiment.trials must be >= 1");
  }
  if (auto v = lookup(tree, "experiment.seed")) spec.seed = parse_count(*v, "experiment.seed");
  if (auto v = lookup(tree, "experiment.output")) spec.output = *v;
  if (auto v = lookup(tree, "experiment.form")) spec.form = parse_form(*v);

  SystemSchedule& s = spec.schedule;
  const std::uint64_t T = parse_count(require(tree, "schedule.T"), "schedule.T");
  if (T == 0) throw ValidationError("T must be a positive integer");
  s.horizon = static_cast<std::size_t>(T);
  s.a = parse_real_list(require(tree, "schedule.a"), "schedule.a");
  s.b = parse_real_list(require(tree, "schedule.b"), "schedule.b");
  s.P = parse_real_list(require(tree, "schedule.P"), "schedule.P");
  s.N = parse_real_list(require(tree, "schedule.N"), "schedule.N");
  s.V_xx0 = parse_real(require(tree, "schedule.V_xx0"), "schedule.V_xx0");
  if (auto v = lookup(tree, "schedule.N_f"); v && !v->empty()) {
    s.N_f = parse_real_list(*v, "schedule.N_f");
  } else if (spec.regime == RegimeKind::NoFeedback) {
    s.N_f = {kInf};
  } else if (spec.regime == RegimeKind::NoiselessFeedback) {
    s.N_f = {0.0};
  } else {
    throw ValidationError("missing config key schedule.N_f");
  }
  s = validate_schedule(std::move(s));

  if (tree.get_child_optional("measurement")) {
    MeasurementModel m;
    m.c = parse_real(require(tree, "measurement.c"), "measurement.c");
    m.d = parse_real(require(tree, "measurement.d"), "measurement.d");
    m.V_ww = parse_real_list(require(tree, "measurement.V_ww"), "measurement.V_ww");
    m.V_vv = parse_real_list(require(tree, "measurement.V_vv"), "measurement.V_vv");
    if (auto v = lookup(tree, "measurement.V_wv"); v && !v->empty()) {
      m.V_wv = parse_real_list(*v, "measurement.V_wv");
    } else {
      m.V_wv = {0.0};
    }
    spec.measurement = validate_measurement(std::move(m), s.horizon);
  }
  check_regime(s, spec.regime, spec.measurement_ptr());

  if (tree.get_child_optional("sweep")) {
    const auto v = lookup(tree, "sweep.N_f");
    spec.sweep_N_f = parse_real_list(v.value_or(""), "sweep.N_f");
    for (double nf : *spec.sweep_N_f) {
      if (!(nf >= 0.0)) throw ValidationError("sweep.N_f entries must be >= 0");
    }
  }
  return spec;
}

ExperimentSpec load_spec(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigIoError(fmt::format("cannot open config file '{}'", path));
  return parse_spec(in, overrides);
}

}  // namespace fbcomm
