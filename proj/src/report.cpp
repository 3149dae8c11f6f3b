#include "gibbsgeom/report.hpp"

#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/oracles.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace gibbsgeom {

namespace {

/// Output-path problems get their own exit code (4), so they must stay
/// distinguishable from estimator failures (3).
struct IoFailure : std::runtime_error {
  explicit IoFailure(const std::string& what) : std::runtime_error(what) {}
};

const std::set<std::string>& known_kinds() {
  static const std::set<std::string> k = {
      "sample",   "variance-scan", "clt-scan", "sigma2",
      "tails",    "mismatch",      "probe",    "oracle-check"};
  return k;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> k = {
      "experiment.dim",
      "potential.kind", "potential.r", "potential.a",
      "model.tau", "model.beta",
      "score.kind", "score.value", "score.k", "score.s",
      "score.region_offset", "score.region_slope", "score.region_lambda",
      "score.speed", "score.cap",
      "grid.lambdas", "grid.rhos", "grid.tail",
      "mc.n_reps", "mc.seed", "mc.n_point", "mc.n_pair", "mc.threads",
      "rho.c",
      "quadrature.r_cut", "quadrature.nodes",
      "window.boundary", "window.insertion_side",
      "sampler.max_padding", "sampler.max_clan_points", "sampler.max_events",
      "sampler.marks", "sampler.allow_near_critical",
      "tails.mode", "tails.require_fit",
      "probe.r_volume", "probe.t_volume", "probe.n_outer", "probe.n_inner",
      "out.dir",
  };
  return k;
}

struct Entry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::map<std::string, Entry> read_entries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, Entry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    for (char c : key) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
        throw ConfigError("line " + std::to_string(lineno) +
                          ": bad character in key '" + key + "'");
    }
    auto it = entries.find(key);
    if (it != entries.end())
      throw ConfigError("duplicate key '" + key + "' at line " +
                        std::to_string(lineno) + " (first at line " +
                        std::to_string(it->second.line) + ")");
    entries[key] = Entry{value, lineno};
  }
  return entries;
}

class ConfigMap {
 public:
  explicit ConfigMap(std::map<std::string, Entry> e) : e_(std::move(e)) {}

  bool has(const std::string& key) const { return e_.count(key) != 0; }

  const Entry& at(const std::string& key) const { return e_.find(key)->second; }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    auto it = e_.find(key);
    std::string where =
        it == e_.end() ? "" : " at line " + std::to_string(it->second.line);
    throw ConfigError("key '" + key + "'" + where + ": " + why);
  }

  double get_double(const std::string& key, double def) const {
    if (!has(key)) return def;
    return parse_double(key);
  }

  double require_double(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required key '" + key + "'");
    return parse_double(key);
  }

  long get_long(const std::string& key, long def) const {
    if (!has(key)) return def;
    const std::string& v = at(key).value;
    char* end = nullptr;
    long out = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') fail(key, "not an integer");
    return out;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const {
    if (!has(key)) return def;
    const std::string& v = at(key).value;
    char* end = nullptr;
    unsigned long long out = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') fail(key, "not an unsigned integer");
    return out;
  }

  bool get_bool(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const std::string& v = at(key).value;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "not a boolean (true/false)");
  }

  std::string get_string(const std::string& key, const std::string& def) const {
    return has(key) ? at(key).value : def;
  }

  std::string require_string(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required key '" + key + "'");
    return at(key).value;
  }

  std::vector<double> require_list(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required key '" + key + "'");
    const std::string& v = at(key).value;
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
      std::size_t comma = v.find(',', pos);
      std::string item =
          trim(comma == std::string::npos ? v.substr(pos)
                                          : v.substr(pos, comma - pos));
      if (item.empty()) fail(key, "empty list element");
      char* end = nullptr;
      double d = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0')
        fail(key, "list element '" + item + "' is not a number");
      out.push_back(d);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  const std::map<std::string, Entry>& entries() const { return e_; }

 private:
  double parse_double(const std::string& key) const {
    const std::string& v = at(key).value;
    char* end = nullptr;
    double out = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') fail(key, "not a number");
    return out;
  }

  std::map<std::string, Entry> e_;
};

Potential parse_potential(const ConfigMap& cm) {
  std::string kind = cm.require_string("potential.kind");
  try {
    if (kind == "hard_core") return Potential::hard_core(cm.require_double("potential.r"));
    if (kind == "strauss")
      return Potential::strauss(cm.require_double("potential.r"),
                                cm.get_double("potential.a", 1.0));
    if (kind == "area_interaction")
      return Potential::area_interaction(cm.require_double("potential.r"));
  } catch (const InvalidParams& e) {
    throw ConfigError(std::string("potential parameters: ") + e.what());
  }
  cm.fail("potential.kind", "unknown potential '" + kind + "'");
}

ScoreSpec parse_score(const ConfigMap& cm) {
  std::string kind = cm.get_string("score.kind", "constant");
  try {
    if (kind == "constant") return ScoreSpec::constant(cm.get_double("score.value", 1.0));
    if (kind == "clique")
      return ScoreSpec::clique(static_cast<int>(cm.get_long("score.k", 1)),
                               cm.get_double("score.s", 1.0));
    if (kind == "knn_length")
      return ScoreSpec::knn_length(static_cast<int>(cm.get_long("score.k", 1)));
    if (kind == "voronoi_length") return ScoreSpec::voronoi_length();
    if (kind == "maximal")
      return ScoreSpec::maximal(
          region_a(cm.get_double("score.region_offset", 1.0),
                   cm.get_double("score.region_slope", -0.5)),
          cm.get_double("score.region_lambda", 1.0));
    if (kind == "birth_growth")
      return ScoreSpec::birth_growth(cm.get_double("score.speed", 1.0));
    if (kind == "insurance")
      return ScoreSpec::insurance(static_cast<int>(cm.get_long("score.k", 1)),
                                  cm.get_double("score.cap", 1.0));
  } catch (const InvalidParams& e) {
    throw ConfigError(std::string("score parameters: ") + e.what());
  }
  cm.fail("score.kind", "unknown score '" + kind + "'");
}

bool kind_samples(const std::string& kind) { return kind != "oracle-check"; }

bool kind_needs_lambdas(const std::string& kind) {
  return kind == "sample" || kind == "variance-scan" || kind == "clt-scan" ||
         kind == "tails" || kind == "mismatch";
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

RunConfig parse_run_config(const std::string& path, const std::string& kind) {
  if (!known_kinds().count(kind))
    throw ConfigError("unknown experiment kind '" + kind + "'");
  ConfigMap cm(read_entries(path));
  for (const auto& [key, entry] : cm.entries()) {
    if (!known_keys().count(key))
      throw ConfigError("unknown key '" + key + "' at line " +
                        std::to_string(entry.line));
  }
  RunConfig cfg;
  cfg.kind = kind;
  for (const auto& [key, entry] : cm.entries()) cfg.raw[key] = entry.value;

  ExperimentSpec& spec = cfg.spec;
  spec.dim = static_cast<int>(cm.get_long("experiment.dim", 2));
  if (spec.dim < 1 || spec.dim > kMaxDim)
    cm.fail("experiment.dim", "dimension out of range");
  if (kind_samples(kind)) {
    spec.pot = parse_potential(cm);
    spec.tau = cm.require_double("model.tau");
    if (!(spec.tau > 0.0)) cm.fail("model.tau", "must be positive");
    spec.beta = cm.get_double("model.beta", 0.0);
    if (spec.beta < 0.0) cm.fail("model.beta", "must be nonnegative");
  }
  spec.score = parse_score(cm);
  if (kind_needs_lambdas(kind)) {
    spec.lambdas = cm.require_list("grid.lambdas");
    for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
      if (spec.lambdas[i] <= 0.0) cm.fail("grid.lambdas", "volumes must be positive");
      if (i > 0 && spec.lambdas[i] <= spec.lambdas[i - 1])
        cm.fail("grid.lambdas", "volumes must be strictly ascending");
    }
  }
  spec.n_reps = cm.get_long("mc.n_reps", 100);
  if (spec.n_reps < 1) cm.fail("mc.n_reps", "must be >= 1");
  spec.seed = cm.get_u64("mc.seed", 1);
  spec.n_point = cm.get_long("mc.n_point", 20000);
  spec.n_pair = cm.get_long("mc.n_pair", 20000);
  spec.n_threads = static_cast<int>(cm.get_long("mc.threads", 1));
  if (spec.n_threads < 1) cm.fail("mc.threads", "must be >= 1");
  spec.rho_c = cm.get_double("rho.c", -1.0);
  spec.quad_r_cut = cm.get_double("quadrature.r_cut", -1.0);
  spec.quad_nodes = static_cast<int>(cm.get_long("quadrature.nodes", 48));
  std::string boundary = cm.get_string("window.boundary", "free");
  if (boundary == "free")
    spec.boundary = Boundary::kFree;
  else if (boundary == "periodic")
    spec.boundary = Boundary::kPeriodic;
  else
    cm.fail("window.boundary", "expected 'free' or 'periodic'");
  spec.insertion_side = cm.get_double("window.insertion_side", -1.0);
  spec.sampler.max_padding = cm.get_double("sampler.max_padding", -1.0);
  spec.sampler.max_clan_points = static_cast<std::size_t>(
      cm.get_long("sampler.max_clan_points",
                  static_cast<long>(spec.sampler.max_clan_points)));
  spec.sampler.max_events = static_cast<std::size_t>(cm.get_long(
      "sampler.max_events", static_cast<long>(spec.sampler.max_events)));
  spec.sampler.allow_near_critical =
      cm.get_bool("sampler.allow_near_critical", false);
  std::string marks = cm.get_string("sampler.marks", "none");
  if (marks == "none")
    spec.sampler.marks = MarkDist::kNone;
  else if (marks == "uniform01")
    spec.sampler.marks = MarkDist::kUniform01;
  else if (marks == "exp1")
    spec.sampler.marks = MarkDist::kExp1;
  else
    cm.fail("sampler.marks", "expected none, uniform01, or exp1");
  if (spec.score.needs_marks() && spec.sampler.marks == MarkDist::kNone &&
      kind_samples(kind))
    throw ConfigError("score '" + cm.get_string("score.kind", "constant") +
                      "' needs marks; set sampler.marks");

  if (kind == "mismatch") cfg.rho_grid = cm.require_list("grid.rhos");
  if (kind == "tails") {
    cfg.tail_grid = cm.require_list("grid.tail");
    std::string mode = cm.get_string("tails.mode", "stabilization_radius");
    if (mode == "stabilization_radius")
      cfg.tail_mode = TailMode::kStabilizationRadius;
    else if (mode == "clan_diameter")
      cfg.tail_mode = TailMode::kClanDiameter;
    else
      cm.fail("tails.mode", "expected stabilization_radius or clan_diameter");
    cfg.tail_require_fit = cm.get_bool("tails.require_fit", false);
  }
  if (kind == "probe") {
    cfg.probe_r_volume = cm.require_double("probe.r_volume");
    cfg.probe_t_volume = cm.require_double("probe.t_volume");
    cfg.probe_n_outer = cm.get_long("probe.n_outer", 50);
    cfg.probe_n_inner = cm.get_long("probe.n_inner", 50);
  }
  cfg.out_dir = cm.get_string("out.dir", "out");
  return cfg;
}

ValidationReport validate_run(const RunConfig& cfg) {
  ValidationReport rep;
  if (!kind_samples(cfg.kind)) {
    rep.rho_rule = "n/a";
    return rep;
  }
  rep.margin =
      admissibility_margin(cfg.spec.pot, cfg.spec.tau, cfg.spec.beta, cfg.spec.dim);
  if (cfg.spec.rho_c >= 0.0) {
    rep.rho_rule = "rho = " + format_g17(cfg.spec.rho_c) + " * ln(lambda) (pinned)";
  } else if (cfg.spec.beta == 0.0) {
    rep.rho_rule = "rho = 0 (no interaction; truncation exact)";
  } else {
    rep.rho_rule =
        "rho = c * ln(lambda), c calibrated from the clan-tail pilot at run time";
  }
  if (rep.margin >= 1.0 && cfg.spec.beta > 0.0 &&
      !cfg.spec.sampler.allow_near_critical) {
    rep.ok = false;
    rep.message =
        "admissibility margin " + format_g17(rep.margin) +
        " >= 1; the thinning construction may not terminate. Pass "
        "--allow-near-critical to force.";
  }
  return rep;
}

namespace {

class CsvFile {
 public:
  explicit CsvFile(const fs::path& p) : path_(p.string()) {
    f_ = std::fopen(path_.c_str(), "wb");
    if (!f_) throw IoFailure("cannot write " + path_);
  }
  ~CsvFile() {
    if (f_) std::fclose(f_);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  void line(const std::string& s) {
    if (std::fputs(s.c_str(), f_) < 0 || std::fputc('\n', f_) == EOF)
      throw IoFailure("write failed on " + path_);
  }

  /// Writes pre-assembled rows (already newline-terminated) verbatim.
  void raw(const std::string& s) {
    if (!s.empty() && std::fputs(s.c_str(), f_) < 0)
      throw IoFailure("write failed on " + path_);
  }

 private:
  std::string path_;
  std::FILE* f_ = nullptr;
};

/// Executes one experiment kind, appending rows and summary fields.
/// Returns 0 (ok) or 3 (partial/failed estimator work).
int execute_kind(const RunConfig& cfg, const fs::path& dir,
                 nlohmann::json& summary, std::vector<std::string>& outputs) {
  const ExperimentSpec& spec = cfg.spec;
  if (cfg.kind == "oracle-check") {
    std::vector<OracleRow> rows = run_oracle_suites(spec.seed);
    CsvFile csv(dir / "oracle.csv");
    outputs.push_back("oracle.csv");
    csv.line("suite,cases,failures,max_err");
    long failures = 0;
    for (const auto& r : rows) {
      failures += r.failures;
      csv.line(r.suite + "," + std::to_string(r.cases) + "," +
               std::to_string(r.failures) + "," + format_g17(r.max_err));
    }
    summary["suites"] = rows.size();
    summary["failures"] = failures;
    if (failures > 0) {
      summary["status"] = "failed";
      summary["error"] = "oracle suites reported failures";
      return 3;
    }
    summary["status"] = "ok";
    return 0;
  }

  if (cfg.kind == "sample") {
    const long n = spec.n_reps;
    std::vector<std::string> blocks(n);
    parallel_for(n, spec.n_threads, [&](long rep) {
      GibbsSample s = experiment_replicate(spec, 0, rep);
      std::string b;
      for (std::size_t i = 0; i < s.config.size(); ++i) {
        b += std::to_string(rep);
        for (int ax = 0; ax < spec.dim; ++ax)
          b += "," + format_g17(s.config.points[i][ax]);
        if (s.config.has_marks()) b += "," + format_g17(s.config.marks[i]);
        b += "," + format_g17(s.clan_diameter[i]);
        b += '\n';
      }
      blocks[rep] = std::move(b);
    });
    CsvFile csv(dir / "points.csv");
    outputs.push_back("points.csv");
    std::string header = "rep";
    for (int ax = 0; ax < spec.dim; ++ax) header += ",x" + std::to_string(ax);
    if (spec.sampler.marks != MarkDist::kNone) header += ",mark";
    header += ",clan_diameter";
    csv.line(header);
    for (long rep = 0; rep < n; ++rep) csv.raw(blocks[rep]);
    summary["status"] = "ok";
    return 0;
  }

  if (cfg.kind == "variance-scan") {
    std::string rho_note;
    ExperimentSpec scan_spec = spec;
    if (scan_spec.rho_c < 0.0)
      scan_spec.rho_c = resolve_rho_c(spec, &rho_note);
    summary["rho_c"] = scan_spec.rho_c;
    if (!rho_note.empty()) summary["rho_note"] = rho_note;
    std::vector<SummaryRecord> recs = variance_scan(scan_spec);
    CsvFile csv(dir / "scan.csv");
    outputs.push_back("scan.csv");
    csv.line("lambda,n_reps,mean,var,var_se,var_over_lambda,d_k,mismatch");
    bool partial = false;
    nlohmann::json notes = nlohmann::json::array();
    for (const auto& r : recs) {
      if (!r.ok) {
        partial = true;
        notes.push_back({{"lambda", r.lambda}, {"error", r.note}});
        continue;
      }
      csv.line(format_g17(r.lambda) + "," + std::to_string(r.n_reps) + "," +
               format_g17(r.mean_w) + "," + format_g17(r.var_w) + "," +
               format_g17(r.var_se) + "," + format_g17(r.var_over_lambda) +
               "," + format_g17(r.d_k) + "," + format_g17(r.mismatch));
      if (!r.note.empty())
        notes.push_back({{"lambda", r.lambda}, {"note", r.note}});
    }
    summary["notes"] = notes;
    summary["status"] = partial ? "partial" : "ok";
    if (partial) summary["error"] = "one or more lambda levels failed";
    return partial ? 3 : 0;
  }

  if (cfg.kind == "clt-scan") {
    CltResult res = clt_scan(spec);
    CsvFile csv(dir / "clt.csv");
    outputs.push_back("clt.csv");
    csv.line("lambda,n_reps,d_k,d_k_se");
    for (const auto& p : res.points)
      csv.line(format_g17(p.lambda) + "," + std::to_string(p.n_reps) + "," +
               format_g17(p.d_k) + "," + format_g17(p.d_k_se));
    summary["monotone"] = res.monotone;
    summary["status"] = "ok";
    return 0;
  }

  if (cfg.kind == "sigma2") {
    Sigma2Estimate e = estimate_sigma2(spec);
    CsvFile csv(dir / "sigma2.csv");
    outputs.push_back("sigma2.csv");
    csv.line("sigma2,se,tail_bound,c_point,c_sq,nodes_used,r_stop,window_side,n");
    csv.line(format_g17(e.value) + "," + format_g17(e.se) + "," +
             format_g17(e.tail_bound) + "," + format_g17(e.c_point) + "," +
             format_g17(e.c_sq) + "," + std::to_string(e.nodes_used) + "," +
             format_g17(e.r_stop) + "," + format_g17(e.window_side) + "," +
             std::to_string(e.n));
    summary["status"] = "ok";
    return 0;
  }

  if (cfg.kind == "tails") {
    TailEstimate e =
        tail_estimate(cfg.tail_mode, spec, cfg.tail_grid, cfg.tail_require_fit);
    CsvFile csv(dir / "tails.csv");
    outputs.push_back("tails.csv");
    csv.line("t,survival,se,w_survival,w_se");
    for (std::size_t i = 0; i < e.grid.size(); ++i)
      csv.line(format_g17(e.grid[i]) + "," + format_g17(e.survival[i]) + "," +
               format_g17(e.se[i]) + "," + format_g17(e.w_survival[i]) + "," +
               format_g17(e.w_se[i]));
    summary["n_points"] = e.n_points;
    summary["fit_ok"] = e.fit_ok;
    summary["fit_slope"] = e.fit.slope;
    summary["fit_intercept"] = e.fit.intercept;
    summary["fit_r2"] = e.fit.r2;
    summary["w_fit_ok"] = e.w_fit_ok;
    summary["w_fit_slope"] = e.w_fit.slope;
    summary["w_fit_r2"] = e.w_fit.r2;
    summary["status"] = "ok";
    return 0;
  }

  if (cfg.kind == "mismatch") {
    std::vector<MismatchPoint> pts = truncation_mismatch(spec, cfg.rho_grid);
    CsvFile csv(dir / "mismatch.csv");
    outputs.push_back("mismatch.csv");
    csv.line("rho,fraction,se");
    for (const auto& p : pts)
      csv.line(format_g17(p.rho) + "," + format_g17(p.fraction) + "," +
               format_g17(p.se));
    summary["status"] = "ok";
    return 0;
  }

  if (cfg.kind == "probe") {
    ProbeEstimate e = conditional_variance_probe(
        spec, cfg.probe_r_volume, cfg.probe_t_volume, cfg.probe_n_outer,
        cfg.probe_n_inner);
    CsvFile csv(dir / "probe.csv");
    outputs.push_back("probe.csv");
    csv.line("value,se,n_outer,n_inner");
    csv.line(format_g17(e.value) + "," + format_g17(e.se) + "," +
             std::to_string(e.n_outer) + "," + std::to_string(e.n_inner));
    summary["status"] = "ok";
    return 0;
  }

  throw ConfigError("unknown experiment kind '" + cfg.kind + "'");
}

}  // namespace

int run_cli(const CliOptions& opt) {
  try {
    RunConfig cfg;
    if (!opt.config_path.empty()) {
      cfg = parse_run_config(opt.config_path, opt.kind);
    } else if (opt.kind == "oracle-check") {
      cfg.kind = opt.kind;
    } else {
      throw ConfigError("--config is required for kind '" + opt.kind + "'");
    }
    if (const char* es = std::getenv("GIBBSGEOM_SEED")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(es, &end, 10);
      if (end == es || *end != '\0')
        throw ConfigError("GIBBSGEOM_SEED is not an unsigned integer");
      cfg.spec.seed = v;
    }
    if (opt.has_seed) cfg.spec.seed = opt.seed;
    if (const char* eo = std::getenv("GIBBSGEOM_OUT")) cfg.out_dir = eo;
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (opt.threads > 0) cfg.spec.n_threads = opt.threads;
    if (opt.allow_near_critical) cfg.spec.sampler.allow_near_critical = true;

    ValidationReport v = validate_run(cfg);
    std::printf("margin %s\n", format_g17(v.margin).c_str());
    std::printf("rho %s\n", v.rho_rule.c_str());
    std::fflush(stdout);
    if (!v.ok) {
      std::fprintf(stderr, "validation failed: %s\n", v.message.c_str());
      return 2;
    }
    if (opt.validate_only) {
      std::printf("ok\n");
      return 0;
    }

    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
      std::fprintf(stderr, "cannot create output directory %s: %s\n",
                   cfg.out_dir.c_str(), ec.message().c_str());
      return 4;
    }

    const auto t0 = std::chrono::steady_clock::now();
    nlohmann::json summary;
    summary["kind"] = cfg.kind;
    summary["version"] = kVersion;
    summary["seed"] = cfg.spec.seed;
    summary["margin"] = v.margin;
    summary["rho_rule"] = v.rho_rule;
    nlohmann::json echo = nlohmann::json::object();
    for (const auto& [k, val] : cfg.raw) echo[k] = val;
    summary["config"] = echo;
    summary["error"] = "";
    std::vector<std::string> outputs;
    int code = 0;
    try {
      code = execute_kind(cfg, dir, summary, outputs);
    } catch (const IoFailure& e) {
      std::fprintf(stderr, "i/o error: %s\n", e.what());
      summary["status"] = "failed";
      summary["error"] = e.what();
      code = 4;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "run failed: %s\n", e.what());
      summary["status"] = "failed";
      summary["error"] = e.what();
      code = 3;
    }
    const auto t1 = std::chrono::steady_clock::now();
    summary["wall_clock_s"] =
        std::chrono::duration<double>(t1 - t0).count();
    summary["outputs"] = outputs;
    std::ofstream os(dir / "summary.json", std::ios::binary);
    if (!os) {
      std::fprintf(stderr, "cannot write summary.json\n");
      return 4;
    }
    os << summary.dump(2) << '\n';
    if (!os) {
      std::fprintf(stderr, "write failed on summary.json\n");
      return 4;
    }
    return code;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InvalidParams& e) {
    std::fprintf(stderr, "invalid parameters: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace gibbsgeom
