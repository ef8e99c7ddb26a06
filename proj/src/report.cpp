#include "detvar/report.hpp"

#include "detvar/helicoidal.hpp"
#include "detvar/kahler.hpp"
#include "detvar/levelset.hpp"
#include "detvar/parametric.hpp"
#include "detvar/pseudo.hpp"

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#ifndef DETVAR_VERSION
#define DETVAR_VERSION "0.0.0"
#endif

namespace detvar::report {

using nlohmann::json;

namespace {

constexpr double kPipeline = 1e-9;
constexpr double kIdentity = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// The complex determinant is expanded over all n! permutations.
constexpr int kMaxZetaSize = 4;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& s) {
  const std::string t = trim(s);
  int value = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return value;
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return value;
}

std::string shortest(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::string default_eta(int p) { return std::string(static_cast<std::size_t>(p - 1), '+') + "-"; }

std::string point_name(const Triple& t, int sample) {
  std::ostringstream s;
  s << "p=" << t.p << ",q=" << t.q << ",r=" << t.r << ",sample=" << sample;
  return s.str();
}

std::uint64_t stream_id(Pipeline pipeline, const Triple& t, int sample) {
  std::uint64_t id = static_cast<std::uint64_t>(pipeline);
  for (int v : {t.p, t.q, t.r}) id = id * 64 + static_cast<std::uint64_t>(v);
  return (id << 24) | static_cast<std::uint64_t>(sample);
}

class Recorder {
 public:
  Recorder(const SweepConfig& cfg, std::vector<Record>& out) : cfg_(cfg), out_(out) {}

  //! Runs `fn` and records one residual per id; degeneracies skip, other errors fail.
  void group(const std::vector<std::string>& ids, const std::string& point,
             const std::function<std::vector<double>()>& fn) {
    try {
      const std::vector<double> residuals = fn();
      for (std::size_t i = 0; i < ids.size(); ++i) add(ids[i], point, residuals[i]);
    } catch (const DegenerateMetric& e) {
      for (const auto& id : ids) skip(id, point, e.what());
    } catch (const SingularGram& e) {
      for (const auto& id : ids) skip(id, point, e.what());
    } catch (const std::exception& e) {
      for (const auto& id : ids) add(id, point, kInf, e.what());
    }
  }

  void one(const std::string& id, const std::string& point, const std::function<double()>& fn) {
    group({id}, point, [&] { return std::vector<double>{fn()}; });
  }

  void add(const std::string& id, const std::string& point, double residual, std::string detail = "") {
    const CheckInfo* info = find_check(id);
    Record rec{id, info->anchor, point, residual, cfg_.tolerance(id), Verdict::pass, std::move(detail)};
    if (info->evidence) {
      rec.verdict = Verdict::evidence;
    } else {
      rec.verdict = residual <= rec.tolerance ? Verdict::pass : Verdict::fail;  // NaN fails
    }
    out_.push_back(std::move(rec));
  }

  void skip(const std::string& id, const std::string& point, std::string detail) {
    const CheckInfo* info = find_check(id);
    out_.push_back({id, info->anchor, point, 0.0, cfg_.tolerance(id), Verdict::skipped_degenerate, std::move(detail)});
  }

 private:
  const SweepConfig& cfg_;
  std::vector<Record>& out_;
};

void run_parametric(const Triple& t, int sample, CounterRng& rng, Recorder& rec) {
  const std::string point = point_name(t, sample);
  rec.group({"parametric.mean_curvature", "parametric.tangency", "parametric.block_inverse",
             "parametric.inverse_agreement", "parametric.dimension"},
            point, [&] {
              const ChartPoint cp = sample_chart_point(rng, t.p, t.q, t.r);
              const MeanCurvature mc = mean_curvature(cp);
              double defect = 0.0, pairwise = 0.0;
              if (cp.dim() > 0) {
                const MetricInverse mi = metric_inverse(cp, induced_metric(cp));
                defect = mi.max_defect;
                pairwise = mi.max_pairwise;
              }
              const Eigen::Index rank = cp.dim() > 0 ? svd_rank(chart_jacobian(cp)).rank : 0;
              const Eigen::Index expected = t.r * (t.p - t.r) + t.q * t.r;
              const auto frame = static_cast<Eigen::Index>(normal_frame(cp).normals.size());
              const double dim_error = static_cast<double>(std::abs(rank - expected) +
                                                           std::abs(frame - (t.q - t.r) * (t.p - t.r)));
              return std::vector<double>{mc.max_component(), mc.tangency_residual, defect, pairwise, dim_error};
            });
}

void run_levelset(const Triple& t, int sample, CounterRng& rng, Recorder& rec) {
  const std::string point = point_name(t, sample);
  if (t.p == t.q + 1 && t.r == t.q - 1) {
    const int n = t.q;
    rec.group({"levelset.mean_curvature", "levelset.projector_rank", "levelset.contractions"}, point, [&] {
      const Matrix a = levelset::sample_variety_point(rng, n);
      const levelset::GramProjector gp = levelset::tangent_projector(a);
      const IdentityReport ids = levelset::identity_suite(a, true);
      return std::vector<double>{levelset::levelset_mean_curvature(a).max_relative(),
                                 static_cast<double>(std::abs(gp.rank - (n * n + n - 2))),
                                 std::max(ids.max_relative("contraction/"), ids.max_relative("four_term/"))};
    });
    const Matrix ambient = rng.normal_matrix(n + 1, n);
    rec.one("levelset.ambient_identities", point, [&] {
      const IdentityReport ids = levelset::identity_suite(ambient, false);
      return ids.max_relative();
    });
    rec.one("levelset.conjecture", point, [&] { return levelset::conjecture_evidence(ambient).relative; });
  }
  if (t.p == t.q && t.r == t.q - 1) {
    rec.one("levelset.cofactor_rank_one", point, [&] {
      const Matrix m = chart_map(sample_chart_point(rng, t.p, t.q, t.r));
      return levelset::gradient_rank_one(m).sigma_ratio;
    });
  }
}

void run_helicoidal(const Triple& t, int sample, CounterRng& rng, Recorder& rec) {
  rec.group({"helicoidal.reflection_invariants", "helicoidal.spectrum", "helicoidal.rank_preservation",
             "helicoidal.normal_reversal"},
            point_name(t, sample), [&] {
              const Matrix x = chart_map(sample_chart_point(rng, t.p, t.q, t.r));
              const helicoidal::HelicoidalCertificate c = helicoidal::helicoidal_certificate(x, t.r, rng);
              return std::vector<double>{std::max({c.fixed_point, c.orthogonality, c.involution}),
                                         std::max({c.symmetry, c.determinant_error, c.spectrum_error}),
                                         static_cast<double>(c.rank_failures), c.normal_reversal};
            });
}

void run_complex(const Triple& t, int sample, CounterRng& rng, Recorder& rec) {
  const std::string point = point_name(t, sample);
  if (t.p == 3 && t.q == 2 && t.r == 1) {
    rec.group({"complex.chart_metric", "complex.chart_inverse", "complex.chart_mean_curvature"}, point, [&] {
      const kahler::ComplexChartGeometry g = kahler::complex_chart_geometry(kahler::sample_complex_chart_point(rng));
      return std::vector<double>{g.metric_discrepancy, std::max(g.schur_discrepancy, g.off_inverse_discrepancy),
                                 g.mean_curvature.cwiseAbs().maxCoeff()};
    });
  }
  if (t.p == t.q && t.r == t.q - 1 && t.q <= kMaxZetaSize) {
    const int n = t.q;
    const Vector w = rng.normal_matrix(2 * n * n, 1);
    rec.one("complex.twin_harmonic", point, [&] {
      return kahler::twin_harmonic_suite(w, n).identities.max_relative();
    });
    if (n == 2) {
      rec.one("complex.rho", point, [&] {
        const auto rho = kahler::twin_rho(kahler::twin_harmonics(w, n));
        return rho ? std::abs(*rho - 2.0) : kInf;
      });
    }
    rec.one("complex.zeta_minimality", point, [&] {
      return kahler::zeta_minimality(kahler::sample_zeta_point(rng, n)).max_relative();
    });
  }
}

void run_pseudo(const SweepConfig& cfg, const Triple& t, int sample, CounterRng& rng, Recorder& rec) {
  const std::string point = point_name(t, sample);
  const pseudo::IndefiniteForm form = pseudo::parse_form(cfg.eta.empty() ? default_eta(t.p) : cfg.eta,
                                                         cfg.zeta.empty() ? std::string(static_cast<std::size_t>(t.q), '+') : cfg.zeta);
  if (sample == 0) {
    const pseudo::AmbientSignature as = pseudo::ambient_signature(form);
    auto gap = [](const pseudo::SubspaceSignature& a, const pseudo::SubspaceSignature& b) {
      return static_cast<double>(std::abs(a.plus - b.plus) + std::abs(a.minus - b.minus) + std::abs(a.null - b.null));
    };
    rec.add("pseudo.ambient_signature", point, gap(as.eigen, as.combinatorial));
    rec.add("pseudo.printed_signature", point, gap(as.eigen, as.printed));
  }
  if (t.p == 2 && t.q == 2 && t.r == 1) {
    rec.one("pseudo.degeneracy_example", point, [&] {
      const ChartPoint cp = sample_chart_point(rng, 2, 2, 1);
      const double lam = cp.lambda(0, 0);
      const double expected = cp.a.squaredNorm() * (lam * lam - 1.0);
      const double det = pseudo::degeneracy_scan(pseudo::parse_form("++", "+-"), cp).determinant;
      return std::abs(det - expected) / std::max(1.0, std::abs(expected));
    });
  }
  const ChartPoint cp = sample_chart_point(rng, t.p, t.q, t.r);
  rec.group({"pseudo.mean_curvature", "pseudo.induced_signature"}, point, [&] {
    const pseudo::PseudoMinimality pm = pseudo::pseudo_minimality(form, cp);
    const bool in_zprime = pm.column_space.nondegenerate() && pm.row_space.nondegenerate();
    return std::vector<double>{pm.residual, in_zprime ? (pm.corrected_matches ? 0.0 : 1.0) : 0.0};
  });
  rec.one("pseudo.normal_reversal", point, [&] { return pseudo::pseudo_normal_reversal(form, cp).max_residual; });
}

}  // namespace

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::parametric: return "parametric";
    case Pipeline::levelset: return "levelset";
    case Pipeline::helicoidal: return "helicoidal";
    case Pipeline::complex: return "complex";
    case Pipeline::pseudo: return "pseudo";
    case Pipeline::all: return "all";
  }
  return "all";
}

Pipeline parse_pipeline(const std::string& name) {
  for (Pipeline p : {Pipeline::parametric, Pipeline::levelset, Pipeline::helicoidal, Pipeline::complex,
                     Pipeline::pseudo, Pipeline::all})
    if (to_string(p) == name) return p;
  throw std::invalid_argument("unknown pipeline '" + name +
                              "' (expected parametric, levelset, helicoidal, complex, pseudo or all)");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::skipped_degenerate: return "SKIPPED-DEGENERATE";
    case Verdict::evidence: return "EVIDENCE";
  }
  return "FAIL";
}

const std::vector<CheckInfo>& check_catalogue() {
  using P = Pipeline;
  static const std::vector<CheckInfo> checks = {
      {"parametric.mean_curvature", P::parametric, "Theorem 1.1, Eq. (12)", kPipeline, false,
       "max |H_alpha| over the normal frame at a chart point"},
      {"parametric.tangency", P::parametric, "Eq. (12), \"obviously is tangential to the surface\"", kPipeline, false,
       "||sum G^{mu nu} d2X + 2 DX(0, (a^T a)^{-1} lambda)||"},
      {"parametric.block_inverse", P::parametric, "Eqs. (7), (9)-(10), (11)", 1e-10, false,
       "max over inverse routes of ||G_hat^{-1} G_hat - 1||_inf"},
      {"parametric.inverse_agreement", P::parametric, "Eqs. (7), (9)-(10), (11)", 1e-10, false,
       "largest entry difference between inverse routes"},
      {"parametric.dimension", P::parametric, "Section 1, \"dimension r(p-r)+qr\"", 0.0, false,
       "|rank DX - (r(p-r)+qr)| + |frame size - (q-r)(p-r)|"},
      {"levelset.mean_curvature", P::levelset, "Eq. (22)", kPipeline, false,
       "tr(P d2 chi_alpha) / max(1, ||d2 chi_alpha||) at a rank n-1 point of R^{(n+1) x n}"},
      {"levelset.projector_rank", P::levelset, "Eq. (22)", 0.0, false, "|rank P - (n^2 + n - 2)|"},
      {"levelset.contractions", P::levelset, "Eq. (24)", kPipeline, false,
       "all eight (grad chi_a)^T d2 chi_b grad chi_c and the four-term sums, relative, on the variety"},
      {"levelset.ambient_identities", P::levelset, "Eqs. (25)-(26)", kIdentity, false,
       "harmonicity, self and mixed contractions, antisymmetry, cofactor-inverse forms at a random matrix"},
      {"levelset.cofactor_rank_one", P::levelset, "Eq. (38), \"is always of rank 1\"", 1e-10, false,
       "sigma_2 / sigma_1 of the cofactor matrix of a singular n x n matrix"},
      {"levelset.conjecture", P::levelset, "Eq. (30)", kPipeline, true,
       "relative residual of the conjectured mixed contraction at a random matrix (known to fail off the variety)"},
      {"helicoidal.reflection_invariants", P::helicoidal, "Section 3 proof, \"There exists a p x p orthogonal matrix\"",
       kIdentity, false, "max of ||B^T B - 1||, ||B^2 - 1||, ||B X - X|| / max(1, ||X||)"},
      {"helicoidal.spectrum", P::helicoidal, "Eq. (43)", 1e-10, false,
       "symmetry, det B = (-1)^(p-r), eigenvalues {+1 x r, -1 x (p-r)}"},
      {"helicoidal.rank_preservation", P::helicoidal, "Eq. (42), \"As phi_A preserves rank\"", 0.0, false,
       "number of sampled Y with rank(B Y) != rank(Y)"},
      {"helicoidal.normal_reversal", P::helicoidal, "Eq. (44)", 1e-10, false,
       "max ||B W + W|| over an orthonormal normal basis"},
      {"complex.chart_metric", P::complex, "Eq. (47)", kIdentity, false,
       "closed-form 8 x 8 metric vs the Gram of the chart's tangent vectors"},
      {"complex.chart_inverse", P::complex, "Eqs. (49)-(50)", 1e-10, false,
       "Schur block and off-diagonal inverse block vs their closed forms"},
      {"complex.chart_mean_curvature", P::complex, "Section 5.1, \"N_alpha . E_1 = 0 = N_alpha . E_2\"", 1e-10, false,
       "max |H_alpha| of the 3 x 2 complex chart"},
      {"complex.twin_harmonic", P::complex, "Eqs. (52), (58), (59)", 1e-10, false,
       "twin-harmonic identities of Re/Im det at a random complex n x n matrix (n <= 4)"},
      {"complex.rho", P::complex, "below Eq. (55), \"rho(x) = 2\"", kIdentity, false, "|rho - 2| for n = 2"},
      {"complex.zeta_minimality", P::complex, "below Eq. (59), \"it then immediately follows that\"", kPipeline, false,
       "tr(P d2 u), tr(P d2 v) relative, at a complex rank n-1 matrix (n <= 4)"},
      {"pseudo.ambient_signature", P::pseudo, "Section 5.2, \"is easily seen to be\"", 0.0, false,
       "eigen-count signature vs (p1 q1 + p2 q2, p1 q2 + p2 q1)"},
      {"pseudo.printed_signature", P::pseudo, "Section 5.2, \"is easily seen to be\"", 0.0, true,
       "eigen-count signature vs the printed (p1 p2 + q1 q2, p1 q2 + p2 q1)"},
      {"pseudo.degeneracy_example", P::pseudo, "Eq. (61), \"det(G_hat) = a^T a (lambda^2 - 1)\"", kIdentity, false,
       "2 x 2 example with eta = 1, zeta = diag(1, -1), relative"},
      {"pseudo.mean_curvature", P::pseudo, "Section 5.2 end, \"each submanifold Z'_r is helicoidal and hence minimal\"",
       kPipeline, false, "normal part of G^{mu nu} d2X under the form, relative; degenerate points skipped"},
      {"pseudo.induced_signature", P::pseudo, "Section 5.2, induced-signature display", 0.0, false,
       "inertia of G_hat vs the signature formula with the repeated term read as p~2 q2 (0 = match)"},
      {"pseudo.normal_reversal", P::pseudo, "Section 5.2 end, \"helicoidal\"", kPipeline, false,
       "form-compatible reflection: max ||B W + W|| over form-normals"},
  };
  return checks;
}

const CheckInfo* find_check(const std::string& id) {
  for (const auto& c : check_catalogue())
    if (c.id == id) return &c;
  return nullptr;
}

IntRange parse_range(const std::string& text) {
  IntRange out;
  const std::string t = trim(text);
  if (t.empty()) throw std::invalid_argument("empty range");
  const auto dots = t.find("..");
  if (dots != std::string::npos) {
    const int lo = parse_int(t.substr(0, dots)), hi = parse_int(t.substr(dots + 2));
    if (lo > hi) throw std::invalid_argument("empty range '" + text + "'");
    for (int v = lo; v <= hi; ++v) out.values.push_back(v);
  } else {
    for (const auto& item : split(t, ',')) out.values.push_back(parse_int(item));
  }
  return out;
}

double SweepConfig::tolerance(const std::string& check_id) const {
  const auto it = tolerances.find(check_id);
  if (it != tolerances.end()) return it->second;
  const CheckInfo* info = find_check(check_id);
  return info ? info->tolerance : kPipeline;
}

void SweepConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  for (const auto& [name, value] : tolerances) {
    if (!find_check(name)) throw std::invalid_argument("unknown check '" + name + "' in tolerance override");
    if (!(value >= 0.0)) throw std::invalid_argument("tolerance for '" + name + "' must be >= 0");
  }
  for (const auto* range : {&p, &q})
    for (int v : range->values)
      if (v < 1 || v > 16) throw std::invalid_argument("p and q must lie in 1..16");
  if (sweep_triples(*this).empty()) throw std::invalid_argument("no (p, q, r) with p >= q > r >= 0 in the given ranges");
  auto check_signs = [](const std::string& s, const IntRange& range, const char* name) {
    if (s.empty()) return;
    if (s.find_first_not_of("+-") != std::string::npos)
      throw std::invalid_argument(std::string(name) + " must consist of '+' and '-'");
    for (int v : range.values)
      if (static_cast<int>(s.size()) != v)
        throw std::invalid_argument(std::string(name) + " has " + std::to_string(s.size()) +
                                    " signs but the range contains " + std::to_string(v));
  };
  check_signs(eta, p, "eta");
  check_signs(zeta, q, "zeta");
  parse_format(format);
}

std::vector<Triple> sweep_triples(const SweepConfig& cfg) {
  std::vector<Triple> out;
  for (int p : cfg.p.values)
    for (int q : cfg.q.values) {
      if (q > p || q < 1) continue;
      std::vector<int> rs;
      if (cfg.r) {
        rs = cfg.r->values;
      } else {
        for (int r = 0; r < q; ++r) rs.push_back(r);
      }
      for (int r : rs)
        if (r >= 0 && r < q) out.push_back({p, q, r});
    }
  return out;
}

Summary summarize(const std::vector<Record>& records) {
  Summary s;
  std::map<std::string, CheckSummary> by_check;
  for (const auto& rec : records) {
    ++s.total;
    CheckSummary& c = by_check[rec.check];
    c.check = rec.check;
    switch (rec.verdict) {
      case Verdict::pass: ++s.pass; ++c.pass; break;
      case Verdict::fail: ++s.fail; ++c.fail; break;
      case Verdict::skipped_degenerate: ++s.skipped; ++c.skipped; break;
      case Verdict::evidence: ++s.evidence; ++c.evidence; break;
    }
    if (rec.verdict != Verdict::skipped_degenerate)
      c.max_residual = std::isnan(rec.residual) ? rec.residual : std::max(c.max_residual, rec.residual);
  }
  for (const auto& info : check_catalogue()) {
    const auto it = by_check.find(info.id);
    if (it != by_check.end()) s.checks.push_back(it->second);
  }
  return s;
}

VerificationReport run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  report.seed = cfg.seed;
  report.version = version();
  Recorder rec(cfg, report.records);

  std::vector<Pipeline> pipelines;
  if (cfg.pipeline == Pipeline::all) {
    pipelines = {Pipeline::parametric, Pipeline::levelset, Pipeline::helicoidal, Pipeline::complex, Pipeline::pseudo};
  } else {
    pipelines = {cfg.pipeline};
  }
  for (Pipeline pipeline : pipelines)
    for (const Triple& t : sweep_triples(cfg))
      for (int s = 0; s < cfg.samples; ++s) {
        CounterRng rng(cfg.seed, stream_id(pipeline, t, s));
        switch (pipeline) {
          case Pipeline::parametric: run_parametric(t, s, rng, rec); break;
          case Pipeline::levelset: run_levelset(t, s, rng, rec); break;
          case Pipeline::helicoidal: run_helicoidal(t, s, rng, rec); break;
          case Pipeline::complex: run_complex(t, s, rng, rec); break;
          case Pipeline::pseudo: run_pseudo(cfg, t, s, rng, rec); break;
          case Pipeline::all: break;
        }
      }
  report.summary = summarize(report.records);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Format parse_format(const std::string& name) {
  if (name == "json") return Format::json;
  if (name == "csv") return Format::csv;
  if (name == "text") return Format::text;
  throw std::invalid_argument("unknown format '" + name + "' (expected json, csv or text)");
}

namespace {

json records_json(const std::vector<Record>& records) {
  json arr = json::array();
  for (const auto& r : records) {
    json j = {{"check", r.check},         {"anchor", r.anchor},       {"point", r.point},
              {"residual", r.residual},   {"tolerance", r.tolerance}, {"verdict", to_string(r.verdict)}};
    if (!r.detail.empty()) j["detail"] = r.detail;
    arr.push_back(std::move(j));
  }
  return arr;
}

json summary_json(const Summary& s) {
  json checks = json::array();
  for (const auto& c : s.checks)
    checks.push_back({{"check", c.check}, {"pass", c.pass}, {"fail", c.fail}, {"skipped", c.skipped},
                      {"evidence", c.evidence}, {"max_residual", c.max_residual}});
  return {{"total", s.total}, {"pass", s.pass},       {"fail", s.fail},
          {"skipped", s.skipped}, {"evidence", s.evidence}, {"checks", checks}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_csv(const std::vector<Record>& records) {
  std::string out = "check,anchor,point,residual,tolerance,verdict,detail\n";
  for (const auto& r : records) {
    out += csv_field(r.check) + ',' + csv_field(r.anchor) + ',' + csv_field(r.point) + ',' + shortest(r.residual) +
           ',' + shortest(r.tolerance) + ',' + to_string(r.verdict) + ',' + csv_field(r.detail) + '\n';
  }
  return out;
}

std::string render_text_records(const std::vector<Record>& records) {
  std::ostringstream out;
  for (const auto& r : records)
    if (r.verdict == Verdict::fail || r.verdict == Verdict::skipped_degenerate)
      out << to_string(r.verdict) << "  " << r.check << "  " << r.point << "  residual " << shortest(r.residual)
          << " > " << shortest(r.tolerance) << (r.detail.empty() ? "" : "  (" + r.detail + ")") << '\n';
  return out.str();
}

std::string render_text(const VerificationReport& report) {
  std::ostringstream out;
  char line[256];
  out << "detvar " << report.version << "  seed " << report.seed << "  wall time "
      << shortest(std::round(report.wall_time * 1000.0) / 1000.0) << " s\n\n";
  std::snprintf(line, sizeof line, "%-34s %6s %6s %6s %6s  %-12s %s\n", "check", "pass", "fail", "skip", "evid",
                "max residual", "tolerance");
  out << line;
  for (const auto& c : report.summary.checks) {
    const CheckInfo* info = find_check(c.check);
    std::snprintf(line, sizeof line, "%-34s %6d %6d %6d %6d  %-12.3e %.0e\n", c.check.c_str(), c.pass, c.fail,
                  c.skipped, c.evidence, c.max_residual, info ? info->tolerance : 0.0);
    out << line;
  }
  const Summary& s = report.summary;
  out << "\n" << s.total << " records: " << s.pass << " pass, " << s.fail << " fail, " << s.skipped << " skipped, "
      << s.evidence << " evidence\n";
  const std::string details = render_text_records(report.records);
  if (!details.empty()) out << "\n" << details;
  out << (report.passed() ? "VERDICT: PASS\n" : "VERDICT: FAIL\n");
  return out.str();
}

}  // namespace

std::string render(const VerificationReport& report, Format format) {
  switch (format) {
    case Format::json: {
      json j = {{"meta",
                 {{"schema_version", "1"},
                  {"seed", report.seed},
                  {"version", report.version},
                  {"wall_time", report.wall_time}}},
                {"records", records_json(report.records)},
                {"summary", summary_json(report.summary)}};
      return j.dump(2) + "\n";
    }
    case Format::csv: return render_csv(report.records);
    case Format::text: return render_text(report);
  }
  return "";
}

std::string render_records(const VerificationReport& report, Format format) {
  switch (format) {
    case Format::json: return records_json(report.records).dump(2) + "\n";
    case Format::csv: return render_csv(report.records);
    case Format::text: return render_text_records(report.records);
  }
  return "";
}

void emit_report(const VerificationReport& report, Format format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  out << render(report, format);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed: " + std::strerror(errno));
}

VerificationReport parse_json_report(const std::string& text) {
  const json j = json::parse(text);
  VerificationReport report;
  report.seed = j.at("meta").at("seed").get<std::uint64_t>();
  report.version = j.at("meta").at("version").get<std::string>();
  report.wall_time = j.at("meta").at("wall_time").get<double>();
  for (const auto& r : j.at("records")) {
    Record rec;
    rec.check = r.at("check").get<std::string>();
    rec.anchor = r.at("anchor").get<std::string>();
    rec.point = r.at("point").get<std::string>();
    rec.residual = r.at("residual").is_null() ? kInf : r.at("residual").get<double>();
    rec.tolerance = r.at("tolerance").get<double>();
    const std::string verdict = r.at("verdict").get<std::string>();
    for (Verdict v : {Verdict::pass, Verdict::fail, Verdict::skipped_degenerate, Verdict::evidence})
      if (to_string(v) == verdict) rec.verdict = v;
    if (r.contains("detail")) rec.detail = r.at("detail").get<std::string>();
    report.records.push_back(std::move(rec));
  }
  report.summary = summarize(report.records);
  return report;
}

namespace {

void apply_setting(SweepConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "pipeline") {
    cfg.pipeline = parse_pipeline(value);
  } else if (key == "p") {
    cfg.p = parse_range(value);
  } else if (key == "q") {
    cfg.q = parse_range(value);
  } else if (key == "r") {
    cfg.r = parse_range(value);
  } else if (key == "samples") {
    cfg.samples = parse_int(value);
  } else if (key == "seed") {
    const std::string t = trim(value);
    std::uint64_t seed = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), seed);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw std::invalid_argument("bad seed '" + value + "'");
    cfg.seed = seed;
  } else if (key == "tol") {
    for (const auto& item : split(value, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("tolerance must be name=value, got '" + item + "'");
      cfg.tolerances[trim(item.substr(0, eq))] = parse_double(item.substr(eq + 1));
    }
  } else if (key == "form") {
    for (const auto& item : split(value, ',')) {
      const auto eq = item.find('=');
      const std::string name = eq == std::string::npos ? "" : trim(item.substr(0, eq));
      if (name == "eta") {
        cfg.eta = trim(item.substr(eq + 1));
      } else if (name == "zeta") {
        cfg.zeta = trim(item.substr(eq + 1));
      } else {
        throw std::invalid_argument("form must look like eta=++-,zeta=+-, got '" + item + "'");
      }
    }
  } else if (key == "eta") {
    cfg.eta = trim(value);
  } else if (key == "zeta") {
    cfg.zeta = trim(value);
  } else if (key == "format") {
    cfg.format = trim(value);
  } else if (key == "out") {
    cfg.out = trim(value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

}  // namespace

SweepConfig parse_config(const std::string& text) {
  SweepConfig cfg;
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    const json j = json::parse(t);
    for (const auto& [key, value] : j.items()) {
      if (key == "tol" && value.is_object()) {
        for (const auto& [name, tol] : value.items()) cfg.tolerances[name] = tol.get<double>();
      } else if (value.is_string()) {
        apply_setting(cfg, key, value.get<std::string>());
      } else if (value.is_number_unsigned()) {
        apply_setting(cfg, key, std::to_string(value.get<std::uint64_t>()));
      } else if (value.is_number_integer()) {
        apply_setting(cfg, key, std::to_string(value.get<std::int64_t>()));
      } else {
        throw std::invalid_argument("config key '" + key + "' has an unsupported value");
      }
    }
    return cfg;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string l = trim(line.substr(0, line.find('#')));
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(cfg, trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
  }
  return cfg;
}

std::string version() { return DETVAR_VERSION; }

}  // namespace detvar::report
