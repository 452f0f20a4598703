#include "blochspec/cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "blochspec/cli/cache.hpp"
#include "blochspec/cli/plot.hpp"
#include "blochspec/convergence.hpp"
#include "blochspec/floquet.hpp"
#include "blochspec/hill.hpp"
#include "blochspec/parallel.hpp"

namespace blochspec::cli {

using nlohmann::json;

namespace {

std::string csv_header(const RunConfig& c, const std::string& columns) {
  return "# " + std::string(kVersionTag) + " config_hash=" + c.hash + " task=" + c.task + "\n" +
         columns + "\n";
}

json json_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json envelope(const RunConfig& c, json result) {
  json out;
  out["version"] = kVersionTag;
  out["config_hash"] = c.hash;
  out["task"] = c.task;
  out["config"] = c.canonical;
  out["result"] = std::move(result);
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

EvansVariant resolve_variant(const RunConfig& c) {
  if (c.params.variant == "standard") return EvansVariant::standard;
  if (c.params.variant == "principal") return EvansVariant::principal;
  return c.op.has_identity_principal() ? EvansVariant::standard : EvansVariant::principal;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

ComputeResult spectrum_task(const RunConfig& c, int threads) {
  const SpectrumResult res = sweep(c.op, c.params.sigmas, c.params.J, threads);
  ComputeResult out;
  std::string csv = csv_header(c, "sigma,re_lambda,im_lambda,J");
  json entries = json::array();
  int ok = 0;
  for (const SpectrumEntry& e : res.entries) {
    json entry;
    entry["sigma"] = e.sigma;
    entry["status"] = e.ok ? "ok" : "failed";
    if (!e.ok) entry["error"] = e.error;
    json eigs = json::array();
    for (cplx z : e.eigenvalues) {
      csv += fmt(e.sigma) + "," + fmt(z.real()) + "," + fmt(z.imag()) + "," + std::to_string(e.J) + "\n";
      eigs.push_back(complex_json(z));
    }
    entry["eigenvalues"] = eigs;
    entries.push_back(entry);
    ok += e.ok;
  }
  const int total = static_cast<int>(res.entries.size());
  out.status = ok == total ? kExitOk : ok > 0 ? kExitPartial : kExitNumerical;
  json result;
  result["J"] = c.params.J;
  result["spec_hash"] = res.spec_hash;
  result["points_ok"] = ok;
  result["points_failed"] = total - ok;
  result["spectra"] = entries;
  out.files["spectrum.csv"] = csv;
  out.files["spectrum.json"] = dump(envelope(c, result));
  if (ok > 0) out.files["band-structure.svg"] = band_structure_svg(res, c.op.period());
  out.summary = std::to_string(ok) + "/" + std::to_string(total) + " sigma points solved";
  return out;
}

ComputeResult evans_task(const RunConfig& c, int threads) {
  const TaskParams& p = c.params;
  const EvansFunction fn(c.op, p.sigma, p.J, resolve_variant(c), p.det2_path);
  const LambdaGrid& g = p.grid;
  EvansGrid grid{g, std::vector<double>(static_cast<std::size_t>(g.re_points) * g.im_points), p.sigma, p.J};
  std::vector<EvansValue> values(grid.log_mag.size());
  auto lambda_at = [&](std::size_t idx) {
    const int i = static_cast<int>(idx / g.re_points), r = static_cast<int>(idx % g.re_points);
    return cplx(g.re_min + (g.re_max - g.re_min) * r / (g.re_points - 1),
                g.im_min + (g.im_max - g.im_min) * i / (g.im_points - 1));
  };
  parallel_for(values.size(), threads, [&](std::size_t idx) { values[idx] = fn(lambda_at(idx)); });

  std::string csv = csv_header(c, "sigma,re_lambda,im_lambda,log_mag,phase,J");
  json rows = json::array();
  std::size_t argmin = 0;
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    const cplx l = lambda_at(idx);
    const EvansValue& v = values[idx];
    grid.log_mag[idx] = v.log_mag;
    if (v.log_mag < values[argmin].log_mag) argmin = idx;
    csv += fmt(p.sigma) + "," + fmt(l.real()) + "," + fmt(l.imag()) + "," + fmt(v.log_mag) + "," +
           fmt(v.phase) + "," + std::to_string(p.J) + "\n";
    rows.push_back(json::array({l.real(), l.imag(), json_number(v.log_mag), v.phase}));
  }
  json result;
  result["variant"] = resolve_variant(c) == EvansVariant::standard ? "standard" : "principal";
  result["columns"] = json::array({"re_lambda", "im_lambda", "log_mag", "phase"});
  result["values"] = rows;
  result["min_log_mag"] = {{"lambda", complex_json(lambda_at(argmin))},
                           {"log_mag", json_number(values[argmin].log_mag)}};
  if (!fn.warning().empty()) result["warning"] = fn.warning();
  ComputeResult out;
  out.files["evans.csv"] = csv;
  out.files["evans.json"] = dump(envelope(c, result));
  out.files["evans-landscape.svg"] = evans_landscape_svg(grid);
  out.summary = std::to_string(values.size()) + " Evans values";
  return out;
}

ComputeResult roots_task(const RunConfig& c) {
  const TaskParams& p = c.params;
  const EvansFunction fn(c.op, p.sigma, p.J, resolve_variant(c), p.det2_path);
  const AnalyticFn f = [&fn](cplx z) { return fn(z); };
  const LocalizeResult res = localize_roots(f, p.region, p.min_box);
  std::string csv = csv_header(c, "re_root,im_root,multiplicity,box_size");
  json roots = json::array();
  for (const Root& r : res.roots) {
    csv += fmt(r.location.real()) + "," + fmt(r.location.imag()) + "," + std::to_string(r.multiplicity) +
           "," + fmt(r.box_size) + "\n";
    roots.push_back({{"location", complex_json(r.location)},
                     {"multiplicity", r.multiplicity},
                     {"box_size", r.box_size}});
  }
  json result;
  result["region_winding"] = res.region_winding;
  result["region"] = {{"re_min", res.region.lo.real()}, {"re_max", res.region.hi.real()},
                      {"im_min", res.region.lo.imag()}, {"im_max", res.region.hi.imag()}};
  result["roots"] = roots;
  if (!fn.warning().empty()) result["warning"] = fn.warning();
  ComputeResult out;
  out.files["roots.csv"] = csv;
  out.files["roots.json"] = dump(envelope(c, result));
  out.summary = std::to_string(res.roots.size()) + " distinct roots, total multiplicity " +
                std::to_string(res.region_winding);
  return out;
}

json report_json(const ConvergenceReport& r, const std::vector<double>& errors) {
  json j;
  j["J"] = r.J_values;
  j["J_ref"] = r.J_ref;
  j["R"] = r.R;
  j["errors"] = errors;
  j["fitted_rate"] = r.fitted_rate ? json(*r.fitted_rate) : json(nullptr);
  j["exact"] = r.exact;
  j["notes"] = r.notes;
  return j;
}

ComputeResult converge_task(const RunConfig& c, int threads) {
  const TaskParams& p = c.params;
  ComputeResult out;
  json result;
  std::optional<ConvergenceReport> ev, sp;
  auto table = [&](const ConvergenceReport& r, const std::vector<double>& errors) {
    std::string csv = csv_header(c, "J,error");
    for (std::size_t i = 0; i < errors.size(); ++i)
      csv += std::to_string(r.J_values[i]) + "," + fmt(errors[i]) + "\n";
    return csv;
  };
  if (p.study != "spectral") {
    const std::vector<cplx> ref = eigenvalues(assemble_matrix(c.op, p.sigma, p.J_ref));
    ev = evans_convergence(c.op, p.sigma, p.J_list, p.J_ref, probe_set(p.probes, p.R, p.seed, ref),
                           threads);
    json j = report_json(*ev, ev->evans_errors);
    json probes = json::array();
    for (cplx z : ev->probes) probes.push_back(complex_json(z));
    j["probes"] = probes;
    result["evans"] = j;
    out.files["convergence_evans.csv"] = table(*ev, ev->evans_errors);
  }
  if (p.study != "evans") {
    sp = spectral_convergence(c.op, p.sigma, p.J_list, p.J_ref, p.R, threads);
    json j = report_json(*sp, sp->spectral_errors);
    json mult = json::array();
    for (const MultiplicityCheck& m : sp->multiplicities)
      mult.push_back({{"center", complex_json(m.center)},
                      {"radius", m.radius},
                      {"expected", m.expected},
                      {"windings", m.windings}});
    j["multiplicities"] = mult;
    j["multiplicities_stable"] = sp->multiplicities_stable;
    result["spectral"] = j;
    out.files["convergence_spectral.csv"] = table(*sp, sp->spectral_errors);
  }
  out.files["convergence.json"] = dump(envelope(c, result));
  out.files["convergence.svg"] = convergence_svg(ev ? &*ev : nullptr, sp ? &*sp : nullptr);
  auto describe = [](const char* name, const ConvergenceReport& r) {
    return std::string(name) + (r.exact ? " exact" : r.fitted_rate ? " rate " + sci(*r.fitted_rate) : " no fit");
  };
  std::string summary;
  if (ev) summary = describe("evans", *ev);
  if (sp) summary += (summary.empty() ? "" : "; ") + describe("spectral", *sp);
  out.summary = summary;
  if (sp && !sp->multiplicities_stable) {
    out.status = kExitNumerical;
    out.summary += "; winding multiplicities differ between the two largest J";
  }
  return out;
}

struct OracleRow {
  double sigma = 0.0;
  LocalizeResult gardner;
  std::vector<cplx> hill;     // inside the region used
  std::vector<cplx> oracle;   // Gardner roots repeated by multiplicity
  MatchReport match;
  std::string error;
};

ComputeResult oracle_task(const RunConfig& c, int threads) {
  const TaskParams& p = c.params;
  std::vector<OracleRow> rows(p.sigmas.size());
  const Rectangle square{cplx(-p.R, -p.R), cplx(p.R, p.R)};
  parallel_for(rows.size(), threads, [&](std::size_t s) {
    OracleRow& row = rows[s];
    row.sigma = p.sigmas[s];
    try {
      row.gardner = localize_roots(gardner_function(c.op, row.sigma, p.ode_tol), square, p.min_box);
      const Rectangle& used = row.gardner.region;
      for (cplx z : eigenvalues(assemble_matrix(c.op, row.sigma, p.J)))
        if (z.real() >= used.lo.real() && z.real() <= used.hi.real() && z.imag() >= used.lo.imag() &&
            z.imag() <= used.hi.imag())
          row.hill.push_back(z);
      for (const Root& r : row.gardner.roots)
        for (int m = 0; m < r.multiplicity; ++m) row.oracle.push_back(r.location);
      row.match = match_spectra(row.hill, row.oracle, std::numeric_limits<double>::max());
    } catch (const NumericalError& e) {
      row.error = e.what();
    }
  });

  std::string csv = csv_header(c, "sigma,re_hill,im_hill,re_oracle,im_oracle,distance");
  json per_sigma = json::array();
  double worst = 0.0;
  bool agree = true, failed = false;
  for (const OracleRow& row : rows) {
    json j;
    j["sigma"] = row.sigma;
    if (!row.error.empty()) {
      j["status"] = "failed";
      j["error"] = row.error;
      failed = true;
      per_sigma.push_back(j);
      continue;
    }
    std::vector<std::pair<int, int>> pairs = row.match.pairs;
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [a, b] : pairs) {
      const cplx h = row.hill[a], o = row.oracle[b];
      csv += fmt(row.sigma) + "," + fmt(h.real()) + "," + fmt(h.imag()) + "," + fmt(o.real()) + "," +
             fmt(o.imag()) + "," + fmt(std::abs(h - o)) + "\n";
    }
    const bool counts = row.match.unmatched_a == 0 && row.match.unmatched_b == 0;
    agree = agree && counts;
    worst = std::max(worst, row.match.max_distance);
    json roots = json::array();
    for (const Root& r : row.gardner.roots)
      roots.push_back({{"location", complex_json(r.location)}, {"multiplicity", r.multiplicity}});
    j["status"] = "ok";
    j["hill_count"] = row.hill.size();
    j["oracle_count"] = row.oracle.size();
    j["max_discrepancy"] = row.match.max_distance;
    j["multiplicities_agree"] = counts;
    j["oracle_roots"] = roots;
    per_sigma.push_back(j);
  }
  const bool pass = !failed && agree && worst < p.tolerance;
  std::string summary = "max root discrepancy " + sci(worst) + (worst < p.tolerance ? " < " : " >= ") +
                        sci(p.tolerance) + ", multiplicities " + (agree ? "agree" : "disagree");
  if (failed) summary += ", some sigma points failed";
  json result;
  result["per_sigma"] = per_sigma;
  result["max_discrepancy"] = worst;
  result["multiplicities_agree"] = agree;
  result["pass"] = pass;
  result["summary"] = summary;
  ComputeResult out;
  out.files["oracle.csv"] = csv;
  out.files["oracle.json"] = dump(envelope(c, result));
  out.summary = summary;
  out.status = pass ? kExitOk : kExitNumerical;
  return out;
}

ComputeResult validate_task(const RunConfig& c) {
  const ValidationReport v = validate(c.op, c.params.grid_n);
  json result;
  result["lower_bound"] = v.lower_bound;
  result["argmin_x"] = v.argmin_x;
  result["symmetry_defect"] = v.symmetry_defect;
  result["spd"] = v.spd;
  result["status"] = v.status;
  result["spec_hash"] = c.op.content_hash();
  ComputeResult out;
  out.files["validate.json"] = dump(envelope(c, result));
  out.summary = v.status;
  return out;
}

bool wanted(const RunConfig& c, const std::string& name) {
  const auto dot = name.rfind('.');
  return dot != std::string::npos && c.wants(name.substr(dot + 1));
}

}  // namespace

ComputeResult compute(const RunConfig& config, int threads) {
  ComputeResult out;
  if (config.task == "spectrum") out = spectrum_task(config, threads);
  else if (config.task == "evans-eval") out = evans_task(config, threads);
  else if (config.task == "roots") out = roots_task(config);
  else if (config.task == "converge") out = converge_task(config, threads);
  else if (config.task == "oracle-compare") out = oracle_task(config, threads);
  else if (config.task == "validate") out = validate_task(config);
  else throw ConfigError("unknown task '" + config.task + "'");
  for (auto it = out.files.begin(); it != out.files.end();)
    it = wanted(config, it->first) ? std::next(it) : out.files.erase(it);
  return out;
}

RunOutcome run(const RunConfig& config, const RunOptions& options) {
  std::ostringstream sink;
  std::ostream& log = options.log ? *options.log : sink;
  RunOutcome outcome;
  outcome.out_dir = options.out_dir.value_or(config.out_dir);
  const std::string tag = config.task + " [" + config.hash.substr(0, 12) + "]";

  std::optional<ResultCache> cache;
  if (options.use_cache) cache.emplace(options.cache_dir.value_or(ResultCache::default_root()));
  try {
    if (cache) {
      if (auto hit = cache->load(config.hash)) {
        write_artifacts(outcome.out_dir, hit->files);
        outcome.exit_code = hit->status;
        outcome.cached = true;
        outcome.files = std::move(hit->files);
        outcome.message = "cached";
        log << "blochspec: " << tag << ": cached (" << cache->root().string() << ")\n";
        return outcome;
      }
    }
    const auto start = std::chrono::steady_clock::now();
    ComputeResult result = compute(config, options.threads);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_artifacts(outcome.out_dir, result.files);
    outcome.exit_code = result.status;
    outcome.files = std::move(result.files);
    outcome.message = result.summary;
    log << "blochspec: " << tag << ": " << result.summary << " (" << sci(seconds) << " s)\n";
    if (cache && (outcome.exit_code == kExitOk || outcome.exit_code == kExitPartial)) {
      try {
        cache->store(config.hash, {outcome.exit_code, outcome.files});
      } catch (const std::exception& e) {
        log << "blochspec: warning: " << e.what() << "\n";
      }
    }
  } catch (const ConfigError& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = config.task + ": " + e.what();
  } catch (const DomainError& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = config.task + ": " + e.what();
  } catch (const NumericalError& e) {
    outcome.exit_code = kExitNumerical;
    outcome.message = config.task + ": " + e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = kExitNumerical;
    outcome.message = config.task + ": " + e.what();
  }
  if (outcome.exit_code == kExitConfig || (outcome.files.empty() && outcome.exit_code != kExitOk))
    log << "blochspec: error: " << outcome.message << "\n";
  return outcome;
}

}  // namespace blochspec::cli
