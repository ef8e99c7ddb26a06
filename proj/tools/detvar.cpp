// Command-line driver: detvar verify | list-checks | sweep

#include "detvar/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kUsageError = 2;
constexpr int kIoError = 3;

using detvar::report::SweepConfig;

int run(const SweepConfig& cfg) {
  namespace rp = detvar::report;
  cfg.validate();
  const rp::Format format = rp::parse_format(cfg.format);
  const rp::VerificationReport report = rp::run_sweep(cfg);
  if (cfg.out.empty()) {
    std::cout << rp::render(report, format);
  } else {
    rp::emit_report(report, format, cfg.out);
    const auto& s = report.summary;
    std::cerr << s.total << " records: " << s.pass << " pass, " << s.fail << " fail, " << s.skipped << " skipped, "
              << s.evidence << " evidence -> " << cfg.out << '\n';
  }
  return report.exit_status();
}

void list_checks() {
  std::string pipeline;
  for (const auto& c : detvar::report::check_catalogue()) {
    const std::string name = detvar::report::to_string(c.pipeline);
    if (name != pipeline) {
      std::cout << (pipeline.empty() ? "" : "\n") << name << '\n';
      pipeline = name;
    }
    char tol[32];
    std::snprintf(tol, sizeof tol, "%g", c.tolerance);
    std::cout << "  " << c.id << "  tol " << tol << (c.evidence ? "  [evidence, never gates]" : "") << '\n'
              << "      " << c.description << '\n'
              << "      anchor: " << c.anchor << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical certification of minimality for determinantal variety strata"};
  app.require_subcommand(1);

  SweepConfig cfg;
  std::string pipeline, p_range, q_range, r_range, form, config_path, format, out;
  std::vector<std::string> tols;
  std::uint64_t seed = 0;
  int samples = 10;

  auto* verify = app.add_subcommand("verify", "run one pipeline (or all) over a (p, q, r) sweep");
  verify->add_option("pipeline", pipeline, "parametric, levelset, helicoidal, complex, pseudo or all")->required();
  verify->add_option("--p", p_range, "row range, e.g. 2..4 or 3,5")->default_str("2..4");
  verify->add_option("--q", q_range, "column range")->default_str("2..4");
  verify->add_option("--r", r_range, "rank range (default: every r < q)");
  verify->add_option("--samples", samples, "sample points per (p, q, r)")->default_val(10);
  verify->add_option("--seed", seed, "64-bit seed")->default_val(0);
  verify->add_option("--tol", tols, "tolerance override check=value (repeatable)");
  verify->add_option("--form", form, "pseudo form, e.g. eta=++-,zeta=+-");
  verify->add_option("--format", format, "json, csv or text")->default_str("json");
  verify->add_option("--out", out, "output file (default: stdout)");

  auto* list = app.add_subcommand("list-checks", "print every check with its tolerance and anchor");

  auto* sweep = app.add_subcommand("sweep", "run a sweep described by a config file (key=value or JSON)");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--format", format, "override the config's format");
  sweep->add_option("--out", out, "override the config's output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*list) {
      list_checks();
      return 0;
    }
    if (*verify) {
      cfg.pipeline = detvar::report::parse_pipeline(pipeline);
      if (!p_range.empty()) cfg.p = detvar::report::parse_range(p_range);
      if (!q_range.empty()) cfg.q = detvar::report::parse_range(q_range);
      if (!r_range.empty()) cfg.r = detvar::report::parse_range(r_range);
      cfg.samples = samples;
      cfg.seed = seed;
      std::ostringstream settings;
      for (const auto& t : tols) settings << "tol=" << t << '\n';
      if (!form.empty()) settings << "form=" << form << '\n';
      const SweepConfig extra = detvar::report::parse_config(settings.str());
      cfg.tolerances = extra.tolerances;
      cfg.eta = extra.eta;
      cfg.zeta = extra.zeta;
      if (!format.empty()) cfg.format = format;
      cfg.out = out;
    } else {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot read config '" << config_path << "'\n";
        return kIoError;
      }
      std::stringstream buf;
      buf << in.rdbuf();
      cfg = detvar::report::parse_config(buf.str());
      if (!format.empty()) cfg.format = format;
      if (!out.empty()) cfg.out = out;
    }
    return run(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
}
