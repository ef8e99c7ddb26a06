#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Sweeps over (p, q, r) running the verification pipelines, and the reports
// they produce.

namespace detvar::report {

enum class Pipeline { parametric, levelset, helicoidal, complex, pseudo, all };

std::string to_string(Pipeline p);
//! Throws std::invalid_argument for unknown names.
Pipeline parse_pipeline(const std::string& name);

enum class Verdict { pass, fail, skipped_degenerate, evidence };

std::string to_string(Verdict v);

struct CheckInfo {
  std::string id;
  Pipeline pipeline;
  std::string anchor;
  double tolerance;
  bool evidence;  // reported, never gates the exit status
  std::string description;
};

//! Every check the sweep can emit, in a fixed order.
const std::vector<CheckInfo>& check_catalogue();
const CheckInfo* find_check(const std::string& id);

struct IntRange {
  std::vector<int> values;
};

//! "3", "2..5" or "2,4,6". Throws std::invalid_argument.
IntRange parse_range(const std::string& text);

struct SweepConfig {
  Pipeline pipeline = Pipeline::all;
  IntRange p{{2, 3, 4}};
  IntRange q{{2, 3, 4}};
  std::optional<IntRange> r;  // every r < q when empty
  int samples = 10;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;  // overrides by check id
  std::string eta;   // pseudo form signs, e.g. "++-"; default: last entry negative
  std::string zeta;  // default: all positive
  std::string format = "json";
  std::string out;  // stdout when empty

  //! Throws std::invalid_argument describing the first problem.
  void validate() const;
  double tolerance(const std::string& check_id) const;
};

struct Triple {
  int p, q, r;
};

//! Triples with p >= q > r >= 0 from the configured ranges, in (p, q, r) order.
std::vector<Triple> sweep_triples(const SweepConfig& cfg);

struct Record {
  std::string check;
  std::string anchor;
  std::string point;
  double residual = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::pass;
  std::string detail;  // reason for skips and errors
};

struct CheckSummary {
  std::string check;
  int pass = 0;
  int fail = 0;
  int skipped = 0;
  int evidence = 0;
  double max_residual = 0.0;
};

struct Summary {
  int total = 0;
  int pass = 0;
  int fail = 0;
  int skipped = 0;
  int evidence = 0;
  std::vector<CheckSummary> checks;  // catalogue order, only checks that occurred
};

struct VerificationReport {
  std::uint64_t seed = 0;
  std::string version;
  double wall_time = 0.0;  // seconds
  std::vector<Record> records;
  Summary summary;

  bool passed() const { return summary.fail == 0; }
  int exit_status() const { return passed() ? 0 : 1; }
};

Summary summarize(const std::vector<Record>& records);

//! Deterministic for a given configuration: records follow (pipeline, triple,
//! sample) order and every sample draws from its own RNG stream.
VerificationReport run_sweep(const SweepConfig& cfg);

enum class Format { json, csv, text };

Format parse_format(const std::string& name);

std::string render(const VerificationReport& report, Format format);
//! Records only, in the given format; identical across runs with the same config.
std::string render_records(const VerificationReport& report, Format format);

//! Writes render(report, format) to `path`; throws std::runtime_error naming the path on failure.
void emit_report(const VerificationReport& report, Format format, const std::string& path);

//! Parses a JSON report back. Residuals round-trip bit-exactly.
VerificationReport parse_json_report(const std::string& text);

//! key=value lines or a JSON object with the same keys.
SweepConfig parse_config(const std::string& text);

std::string version();

}  // namespace detvar::report
