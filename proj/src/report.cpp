#include <fstream>

#include <fmt/format.h>

#include "fbmarb/errors.hpp"
#include "fbmarb/experiment.hpp"

namespace fbmarb {

// Numbers are printed as shortest round-trip decimals, so equal doubles give
// byte-equal files.

std::string terminal_csv(const RunReport& report) {
  std::string out = "seed,level,P_T,exponent,cert_pass\n";
  for (const auto& r : report.terminal) {
    out += fmt::format("{},{},{},{},{}\n", r.seed, r.level, r.terminal_wealth, r.exponent,
                       r.cert_pass ? 1 : 0);
  }
  return out;
}

std::string residuals_csv(const RunReport& report) {
  std::string out = "level,mean_maxabs,median_maxabs,max_maxabs,qv_of_integral\n";
  for (const auto& s : report.levels) {
    out += fmt::format("{},{},{},{},{}\n", s.level, s.mean_maxabs, s.median_maxabs,
                       s.max_maxabs, s.qv_of_integral);
  }
  return out;
}

std::string calculus_csv(const RunReport& report) {
  std::string out = "verifier,level,mean_residual,slope_so_far\n";
  for (const auto& c : report.calculus) {
    out += fmt::format("{},{},{},{}\n", c.verifier, c.level, c.mean_residual, c.slope_so_far);
  }
  return out;
}

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json summary_json(const RunReport& report) {
  nlohmann::json slopes = nlohmann::json::object();
  for (const auto& [k, v] : report.slopes) slopes[k] = number_or_null(v);
  nlohmann::json verdicts = nlohmann::json::array();
  bool all_pass = true;
  for (const auto& v : report.verdicts) {
    verdicts.push_back({{"name", v.name},
                        {"passed", v.passed},
                        {"kind", v.consistency ? "consistency" : "statistical"},
                        {"detail", v.detail}});
    all_pass = all_pass && v.passed;
  }
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : report.failures) {
    failures.push_back(
        {{"seed", f.seed}, {"level", f.level}, {"kind", f.kind}, {"message", f.message}});
  }
  return {
      {"command", report.command},
      {"version", report.version},
      {"config", to_json(report.config)},
      {"slopes", slopes},
      {"verdicts", verdicts},
      {"all_pass", all_pass},
      {"exit_code", report.exit_code()},
      {"failures", failures},
      {"factorization",
       {{"jitter_retries", report.factorization.jitter_retries},
        {"relative_jitter", report.factorization.jitter}}},
      {"wall_time_seconds", report.wall_seconds},
  };
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / name).string());
    f << text;
  };
  write("terminal.csv", terminal_csv(report));
  write("residuals.csv", residuals_csv(report));
  write("calculus.csv", calculus_csv(report));
  write("summary.json", summary_json(report).dump(2) + "\n");
}

}  // namespace fbmarb
