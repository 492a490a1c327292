#include "fbmarb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fbmarb/errors.hpp"

namespace fbmarb {

using nlohmann::json;

namespace {

/// Reads fields out of one JSON object, recording every problem instead of
/// stopping at the first.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, std::vector<std::string>& problems)
      : j_(j), path_(std::move(path)), problems_(problems) {
    if (!j_.is_object()) problems_.push_back(path_ + " must be an object");
  }

  double number(const char* key, double fallback) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) {
      problems_.push_back(fmt::format("{}.{} must be a number", path_, key));
      return fallback;
    }
    return v.get<double>();
  }

  std::string string(const char* key, std::string fallback) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) {
      problems_.push_back(fmt::format("{}.{} must be a string", path_, key));
      return fallback;
    }
    return v.get<std::string>();
  }

  const json* child(const char* key) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  void reject_unknown() {
    if (!j_.is_object()) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) problems_.push_back(fmt::format("{}.{}: unknown field", path_, k));
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::set<std::string, std::less<>> seen_;
};

const json kEmpty = json::object();

MarketParams read_market(const json* j, std::vector<std::string>& problems) {
  MarketParams m;
  ObjectReader r(j ? *j : kEmpty, "market", problems);
  m.nu = r.number("nu", m.nu);
  m.r = r.number("r", m.r);
  m.y0 = r.number("y0", m.y0);
  m.horizon = r.number("horizon", m.horizon);
  r.reject_unknown();
  return m;
}

ModulatorSpec read_modulator(const json* j, std::vector<std::string>& problems) {
  ModulatorSpec m;
  ObjectReader r(j ? *j : kEmpty, "modulator", problems);
  const std::string kind = r.string("kind", "fbm");
  m.hurst = r.number("hurst", m.hurst);
  const json* tc = r.child("time_change");
  r.reject_unknown();

  if (kind == "fbm") {
    m.kind = ModulatorSpec::Kind::kFbm;
    if (tc) problems.push_back("modulator.time_change is only valid with kind time_changed");
  } else if (kind == "time_changed") {
    m.kind = ModulatorSpec::Kind::kTimeChanged;
    ObjectReader t(tc ? *tc : kEmpty, "modulator.time_change", problems);
    const std::string tk = t.string("kind", "identity");
    if (tk == "identity") {
      m.time_change.kind = TimeChangeSpec::Kind::kIdentity;
    } else if (tk == "power") {
      m.time_change.kind = TimeChangeSpec::Kind::kPower;
      m.time_change.p = t.number("p", 2.0);
      if (!(m.time_change.p > 0.0)) {
        problems.push_back(fmt::format("modulator.time_change.p must be > 0, got {}",
                                       m.time_change.p));
      }
    } else if (tk == "integrated_cir") {
      m.time_change.kind = TimeChangeSpec::Kind::kIntegratedCir;
      auto& c = m.time_change.cir;
      c.v0 = t.number("v0", c.v0);
      c.kappa = t.number("kappa", c.kappa);
      c.theta = t.number("theta", c.theta);
      c.xi = t.number("xi", c.xi);
      for (const auto& [name, v] : {std::pair{"v0", c.v0}, std::pair{"kappa", c.kappa},
                                    std::pair{"theta", c.theta}, std::pair{"xi", c.xi}}) {
        if (!(v >= 0.0)) {
          problems.push_back(
              fmt::format("modulator.time_change.{} must be >= 0, got {}", name, v));
        }
      }
    } else {
      problems.push_back("modulator.time_change.kind must be one of identity, power, "
                         "integrated_cir; got \"" + tk + "\"");
    }
    t.reject_unknown();
  } else {
    problems.push_back("modulator.kind must be fbm or time_changed; got \"" + kind + "\"");
  }

  if (!(m.hurst > 0.0 && m.hurst < 1.0)) {
    problems.push_back(fmt::format(
        "modulator.hurst must lie in the open interval (0, 1), got {}", m.hurst));
  }
  return m;
}

VolatilityModelSpec read_volatility(const json* j, std::vector<std::string>& problems) {
  ObjectReader r(j ? *j : kEmpty, "volatility", problems);
  const std::string kind = r.string("kind", "heston");
  VolatilityModelSpec out;
  if (kind == "constant") {
    ConstantVol v;
    v.level = r.number("level", 0.2);
    out = v;
  } else if (kind == "heston") {
    HestonVol v;
    v.v0 = r.number("v0", v.v0);
    v.kappa = r.number("kappa", v.kappa);
    v.theta = r.number("theta", v.theta);
    v.xi = r.number("xi", v.xi);
    out = v;
  } else if (kind == "hull_white") {
    HullWhiteVol v;
    v.sigma0 = r.number("sigma0", v.sigma0);
    v.mu = r.number("mu", v.mu);
    v.nu_vol = r.number("nu_vol", v.nu_vol);
    out = v;
  } else if (kind == "stein_stein") {
    SteinSteinVol v;
    v.sigma0 = r.number("sigma0", v.sigma0);
    v.kappa = r.number("kappa", v.kappa);
    v.theta = r.number("theta", v.theta);
    v.beta = r.number("beta", v.beta);
    out = v;
  } else if (kind == "function_of_modulator") {
    FunctionOfModulatorVol v;
    const std::string phi = r.string("phi", "cos");
    try {
      v.phi.kind = phi_kind_from_name(phi);
    } catch (const ConfigError& e) {
      problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
    v.phi.a = r.number("a", v.phi.a);
    v.phi.b = r.number("b", v.phi.b);
    out = v;
  } else {
    problems.push_back("volatility.kind must be one of constant, heston, hull_white, "
                       "stein_stein, function_of_modulator; got \"" + kind + "\"");
  }
  r.reject_unknown();
  auto more = volatility_problems(out);
  problems.insert(problems.end(), more.begin(), more.end());
  return out;
}

Thresholds read_thresholds(const json* j, std::vector<std::string>& problems) {
  Thresholds t;
  ObjectReader r(j ? *j : kEmpty, "thresholds", problems);
  t.qv_slope_tolerance = r.number("qv_slope_tolerance", t.qv_slope_tolerance);
  const double violations =
      r.number("max_monotonicity_violations", static_cast<double>(t.max_monotonicity_violations));
  t.integral_qv_ratio = r.number("integral_qv_ratio", t.integral_qv_ratio);
  t.exact_tolerance = r.number("exact_tolerance", t.exact_tolerance);
  t.integrability_bound = r.number("integrability_bound", t.integrability_bound);
  r.reject_unknown();
  if (!(violations >= 0.0) || violations != std::floor(violations)) {
    problems.push_back("thresholds.max_monotonicity_violations must be a nonnegative integer");
  } else {
    t.max_monotonicity_violations = static_cast<std::size_t>(violations);
  }
  for (const auto& [name, v] :
       {std::pair{"qv_slope_tolerance", t.qv_slope_tolerance},
        std::pair{"integral_qv_ratio", t.integral_qv_ratio},
        std::pair{"exact_tolerance", t.exact_tolerance},
        std::pair{"integrability_bound", t.integrability_bound}}) {
    if (!(v > 0.0)) problems.push_back(fmt::format("thresholds.{} must be > 0, got {}", name, v));
  }
  return t;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError({fmt::format("parse error at line {}, column {}: {}", line, col,
                                   e.what())});
  }

  std::vector<std::string> problems;
  ExperimentConfig cfg;
  ObjectReader r(root, "config", problems);
  cfg.market = read_market(r.child("market"), problems);
  {
    auto p = cfg.market.problems();
    problems.insert(problems.end(), p.begin(), p.end());
  }
  if (const json* s = r.child("strategy")) {
    ObjectReader sr(*s, "strategy", problems);
    cfg.strategy.c = sr.number("c", cfg.strategy.c);
    sr.reject_unknown();
  }
  {
    auto p = cfg.strategy.problems();
    problems.insert(problems.end(), p.begin(), p.end());
  }
  cfg.modulator = read_modulator(r.child("modulator"), problems);
  cfg.volatility = read_volatility(r.child("volatility"), problems);
  cfg.thresholds = read_thresholds(r.child("thresholds"), problems);

  if (const json* levels = r.child("grid_levels")) {
    if (!levels->is_array()) {
      problems.push_back("config.grid_levels must be an array of integers");
    } else {
      cfg.grid_levels.clear();
      for (const json& v : *levels) {
        if (!v.is_number_integer()) {
          problems.push_back("config.grid_levels entries must be integers");
          continue;
        }
        cfg.grid_levels.push_back(v.get<int>());
      }
    }
  }
  if (cfg.grid_levels.empty()) {
    problems.push_back("config.grid_levels must not be empty");
  } else {
    for (std::size_t i = 0; i < cfg.grid_levels.size(); ++i) {
      const int k = cfg.grid_levels[i];
      if (k < 1 || k > kMaxLevel) {
        problems.push_back(fmt::format("config.grid_levels[{}] = {} must lie in [1, {}]", i, k,
                                       kMaxLevel));
      }
      if (i > 0 && k <= cfg.grid_levels[i - 1]) {
        problems.push_back(fmt::format(
            "config.grid_levels must be strictly increasing; {} follows {} at index {}", k,
            cfg.grid_levels[i - 1], i));
      }
    }
    if (cfg.modulator.kind == ModulatorSpec::Kind::kTimeChanged &&
        *std::ranges::max_element(cfg.grid_levels) > kMaxTimeChangedLevel) {
      problems.push_back(fmt::format(
          "config.grid_levels: time-changed modulators support levels up to {}",
          kMaxTimeChangedLevel));
    }
  }

  if (const json* n = r.child("num_seeds")) {
    if (!n->is_number_integer() || n->get<long long>() < 1) {
      problems.push_back("config.num_seeds must be an integer >= 1");
    } else {
      cfg.num_seeds = n->get<std::size_t>();
    }
  }
  if (const json* s = r.child("master_seed")) {
    if (!s->is_number_integer() || (s->is_number_integer() && !s->is_number_unsigned() &&
                                    s->get<long long>() < 0)) {
      problems.push_back("config.master_seed must be a nonnegative integer");
    } else {
      cfg.master_seed = s->get<std::uint64_t>();
    }
  }
  cfg.output_dir = r.string("output_dir", cfg.output_dir);
  r.reject_unknown();

  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file " + path.string()});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json to_json(const ExperimentConfig& c) {
  json vol;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        vol["kind"] = model_name(c.volatility);
        if constexpr (std::is_same_v<T, ConstantVol>) {
          vol["level"] = m.level;
        } else if constexpr (std::is_same_v<T, HestonVol>) {
          vol.update({{"v0", m.v0}, {"kappa", m.kappa}, {"theta", m.theta}, {"xi", m.xi}});
        } else if constexpr (std::is_same_v<T, HullWhiteVol>) {
          vol.update({{"sigma0", m.sigma0}, {"mu", m.mu}, {"nu_vol", m.nu_vol}});
        } else if constexpr (std::is_same_v<T, SteinSteinVol>) {
          vol.update({{"sigma0", m.sigma0}, {"kappa", m.kappa}, {"theta", m.theta},
                      {"beta", m.beta}});
        } else {
          vol.update({{"phi", m.phi.name()}, {"a", m.phi.a}, {"b", m.phi.b}});
        }
      },
      c.volatility);

  json mod{{"kind", c.modulator.kind == ModulatorSpec::Kind::kFbm ? "fbm" : "time_changed"},
           {"hurst", c.modulator.hurst}};
  if (c.modulator.kind == ModulatorSpec::Kind::kTimeChanged) {
    const auto& tc = c.modulator.time_change;
    switch (tc.kind) {
      case TimeChangeSpec::Kind::kIdentity:
        mod["time_change"] = {{"kind", "identity"}};
        break;
      case TimeChangeSpec::Kind::kPower:
        mod["time_change"] = {{"kind", "power"}, {"p", tc.p}};
        break;
      case TimeChangeSpec::Kind::kIntegratedCir:
        mod["time_change"] = {{"kind", "integrated_cir"}, {"v0", tc.cir.v0},
                              {"kappa", tc.cir.kappa}, {"theta", tc.cir.theta},
                              {"xi", tc.cir.xi}};
        break;
    }
  }
  return json{
      {"market",
       {{"nu", c.market.nu}, {"r", c.market.r}, {"y0", c.market.y0},
        {"horizon", c.market.horizon}}},
      {"strategy", {{"c", c.strategy.c}}},
      {"modulator", mod},
      {"volatility", vol},
      {"grid_levels", c.grid_levels},
      {"num_seeds", c.num_seeds},
      {"master_seed", c.master_seed},
      {"output_dir", c.output_dir},
      {"thresholds",
       {{"qv_slope_tolerance", c.thresholds.qv_slope_tolerance},
        {"max_monotonicity_violations", c.thresholds.max_monotonicity_violations},
        {"integral_qv_ratio", c.thresholds.integral_qv_ratio},
        {"exact_tolerance", c.thresholds.exact_tolerance},
        {"integrability_bound", c.thresholds.integrability_bound}}},
  };
}

}  // namespace fbmarb
