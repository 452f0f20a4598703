#include "blochspec/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "blochspec/hash.hpp"

namespace blochspec::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  throw ConfigError("config: " + key + ": " + message);
}

std::string read_file(const std::filesystem::path& path, const std::string& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(key, "cannot open file '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Tracks which keys of a JSON object were read so leftovers can be rejected.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

  const json* find(const std::string& name) {
    used_.insert(name);
    const auto it = j_.find(name);
    return it == j_.end() ? nullptr : &*it;
  }

  bool has(const std::string& name) const { return j_.contains(name); }

  double number(const std::string& name, std::optional<double> fallback = std::nullopt) {
    const json* v = find(name);
    if (!v) {
      if (!fallback) fail(key(name), "missing required key");
      return *fallback;
    }
    if (!v->is_number()) fail(key(name), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(key(name), "must be finite");
    return x;
  }

  long long integer(const std::string& name, std::optional<long long> fallback = std::nullopt) {
    const json* v = find(name);
    if (!v) {
      if (!fallback) fail(key(name), "missing required key");
      return *fallback;
    }
    if (!v->is_number_integer()) fail(key(name), "expected an integer");
    return v->get<long long>();
  }

  std::string string(const std::string& name, const std::vector<std::string>& allowed,
                     std::optional<std::string> fallback = std::nullopt) {
    const json* v = find(name);
    if (!v) {
      if (!fallback) fail(key(name), "missing required key");
      return *fallback;
    }
    if (!v->is_string()) fail(key(name), "expected a string");
    const std::string s = v->get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(key(name), "'" + s + "' is not one of " + list);
    }
    return s;
  }

  void finish() const {
    for (const auto& [name, value] : j_.items())
      if (!used_.count(name)) fail(key(name), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool condition, const std::string& key, const std::string& message) {
  if (!condition) fail(key, message);
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

CMatrix matrix_entry(const json& v, int dim, const std::string& key) {
  CMatrix m = CMatrix::Zero(dim, dim);
  if (dim == 1 && v.is_number()) {
    m(0, 0) = v.get<double>();
    return m;
  }
  require(v.is_array() && static_cast<int>(v.size()) == dim, key,
          "expected " + std::string(dim == 1 ? "a number" : std::to_string(dim) + "x" +
                                                               std::to_string(dim) + " array"));
  for (int p = 0; p < dim; ++p) {
    const json& row = v[p];
    require(row.is_array() && static_cast<int>(row.size()) == dim, key,
            "row " + std::to_string(p) + " must have " + std::to_string(dim) + " entries");
    for (int q = 0; q < dim; ++q) {
      require(row[q].is_number(), key, "entries must be numbers");
      m(p, q) = row[q].get<double>();
    }
  }
  return m;
}

json matrix_json(const CMatrix& m, bool imag) {
  if (m.rows() == 1) return imag ? m(0, 0).imag() : m(0, 0).real();
  json rows = json::array();
  for (Eigen::Index p = 0; p < m.rows(); ++p) {
    json row = json::array();
    for (Eigen::Index q = 0; q < m.cols(); ++q) row.push_back(imag ? m(p, q).imag() : m(p, q).real());
    rows.push_back(row);
  }
  return rows;
}

// Peeks at the first data line of a sample file to name a dimension mismatch.
void check_sample_dim(const std::string& text, int dim, const std::string& key, const std::string& file) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    int count = 0;
    double v;
    while (ls >> v) ++count;
    const int n = static_cast<int>(std::lround(std::sqrt(count / 2.0)));
    if (count != 2 * dim * dim) {
      std::string found = 2 * n * n == count ? std::to_string(n) + "x" + std::to_string(n) + " matrices"
                                             : std::to_string(count) + " numbers per line";
      fail(key, "dimension mismatch: sample file '" + file + "' holds " + found +
                    " but operator.dim = " + std::to_string(dim));
    }
    return;
  }
  fail(key, "sample file '" + file + "' has no data lines");
}

struct Coefficient {
  FourierSeries series;
  json canonical;
};

Coefficient parse_coefficient(const json& j, const std::string& path, double period, int dim,
                              const std::filesystem::path& base_dir, int& order_out) {
  Reader r(j, path);
  order_out = static_cast<int>(r.integer("order"));
  json out;
  out["order"] = order_out;
  const int sources = r.has("fourier") + r.has("table") + r.has("samples");
  require(sources == 1, path, "exactly one of fourier, table or samples is required");
  std::optional<FourierSeries> series;

  if (r.has("fourier")) {
    const json& terms = *r.find("fourier");
    require(terms.is_array(), r.key("fourier"), "expected an array of {k, re, im}");
    std::vector<std::pair<int, CMatrix>> parsed;
    int cutoff = 0;
    json echoed = json::array();
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tk = r.key("fourier") + "[" + std::to_string(t) + "]";
      Reader term(terms[t], tk);
      const int k = static_cast<int>(term.integer("k"));
      const json* re = term.find("re");
      const json* im = term.find("im");
      const CMatrix zero = CMatrix::Zero(dim, dim);
      const CMatrix value = (re ? matrix_entry(*re, dim, tk + ".re") : zero) +
                            kI * (im ? matrix_entry(*im, dim, tk + ".im") : zero);
      term.finish();
      for (const auto& [k2, v] : parsed)
        require(k2 != k, tk + ".k", "frequency " + std::to_string(k) + " listed twice");
      parsed.push_back({k, value});
      cutoff = std::max(cutoff, std::abs(k));
    }
    std::sort(parsed.begin(), parsed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<CMatrix> coeffs(2 * cutoff + 1, CMatrix::Zero(dim, dim));
    for (const auto& [k, v] : parsed) {
      coeffs[k + cutoff] = v;
      echoed.push_back({{"k", k}, {"re", matrix_json(v, false)}, {"im", matrix_json(v, true)}});
    }
    series.emplace(period, std::move(coeffs));
    out["fourier"] = echoed;
  } else if (r.has("table")) {
    const json* v = r.find("table");
    require(v->is_string(), r.key("table"), "expected a file path");
    const std::string file = v->get<std::string>();
    const std::string text = read_file(base_dir / file, r.key("table"));
    std::istringstream in(text);
    try {
      series.emplace(read_table(in));
    } catch (const Error& e) {
      fail(r.key("table"), e.what());
    }
    require(series->dim() == dim, r.key("table"),
            "dimension mismatch: table '" + file + "' has dim " + std::to_string(series->dim()) +
                " but operator.dim = " + std::to_string(dim));
    require(std::abs(series->period() - period) <= 1e-12 * period, r.key("table"),
            "table period does not match operator.period");
    std::vector<CMatrix> table_coeffs;
    for (int k = -series->cutoff(); k <= series->cutoff(); ++k) table_coeffs.push_back(series->coeff(k));
    series.emplace(period, std::move(table_coeffs));
    out["table"] = file;
    out["sha256"] = sha256_hex(text);
  } else {
    const json* v = r.find("samples");
    require(v->is_string(), r.key("samples"), "expected a file path");
    const std::string file = v->get<std::string>();
    require(r.has("cutoff"), r.key("cutoff"), "required with samples");
    const long long cutoff = r.integer("cutoff");
    require(cutoff >= 0, r.key("cutoff"), "must be >= 0");
    const std::string text = read_file(base_dir / file, r.key("samples"));
    check_sample_dim(text, dim, r.key("samples"), file);
    std::istringstream in(text);
    try {
      const std::vector<CMatrix> samples = read_samples(in, dim);
      series.emplace(from_samples(samples, period, static_cast<int>(cutoff)));
    } catch (const Error& e) {
      fail(r.key("samples"), e.what());
    }
    out["samples"] = file;
    out["cutoff"] = cutoff;
    out["sha256"] = sha256_hex(text);
  }
  r.finish();
  return {std::move(*series), std::move(out)};
}

OperatorSpec parse_operator(const json& j, const std::filesystem::path& base_dir, json& canonical) {
  Reader r(j, "operator");
  double period = 0.0;
  {
    const json* v = r.find("period");
    require(v != nullptr, "operator.period", "missing required key");
    if (v->is_string() && v->get<std::string>() == "2pi")
      period = kTwoPi;
    else if (v->is_number())
      period = v->get<double>();
    else
      fail("operator.period", "expected a number or \"2pi\"");
    require(std::isfinite(period) && period > 0.0, "operator.period", "must be positive");
  }
  const long long dim = r.integer("dim", 1);
  require(dim >= 1 && dim <= 16, "operator.dim", "must lie in [1, 16]");
  std::optional<std::vector<int>> composite;
  int order = 0;
  require(r.has("order") != r.has("composite_orders"), "operator",
          "exactly one of order and composite_orders is required");
  if (r.has("order")) {
    order = static_cast<int>(r.integer("order"));
    require(order >= 1 && order <= 8, "operator.order", "must lie in [1, 8]");
  } else {
    const json& c = *r.find("composite_orders");
    require(c.is_array() && static_cast<long long>(c.size()) == dim, "operator.composite_orders",
            "expected one order per component (" + std::to_string(dim) + ")");
    composite.emplace();
    for (const json& o : c) {
      require(o.is_number_integer() && o.get<int>() >= 1 && o.get<int>() <= 8,
              "operator.composite_orders", "orders must be integers in [1, 8]");
      composite->push_back(o.get<int>());
    }
    order = *std::max_element(composite->begin(), composite->end());
  }
  const std::string form = r.string("form", {"divergence", "nondivergence"}, "divergence");

  const json* cs = r.find("coefficients");
  require(cs && cs->is_array(), "operator.coefficients", "expected an array");
  std::vector<std::optional<Coefficient>> coeffs(order + 1);
  for (std::size_t i = 0; i < cs->size(); ++i) {
    const std::string path = "operator.coefficients[" + std::to_string(i) + "]";
    int k = -1;
    Coefficient c = parse_coefficient((*cs)[i], path, period, static_cast<int>(dim), base_dir, k);
    require(k >= 0 && k <= order, path + ".order", "must lie in [0, " + std::to_string(order) + "]");
    require(!coeffs[k], path + ".order", "order " + std::to_string(k) + " given twice");
    coeffs[k] = std::move(c);
  }
  require(coeffs[order].has_value(), "operator.coefficients",
          "the principal coefficient (order " + std::to_string(order) + ") is required");
  r.finish();

  std::vector<FourierSeries> series;
  json echoed = json::array();
  for (int k = 0; k <= order; ++k) {
    if (!coeffs[k]) coeffs[k] = Coefficient{FourierSeries(period, static_cast<int>(dim), 0),
                                            json{{"order", k}, {"fourier", json::array()}}};
    series.push_back(coeffs[k]->series);
    echoed.push_back(coeffs[k]->canonical);
  }
  canonical = json::object();
  canonical["period"] = period;
  canonical["dim"] = dim;
  if (composite)
    canonical["composite_orders"] = *composite;
  else
    canonical["order"] = order;
  canonical["form"] = form;
  canonical["coefficients"] = echoed;
  try {
    return OperatorSpec(std::move(series),
                        form == "divergence" ? OperatorForm::divergence : OperatorForm::nondivergence,
                        composite);
  } catch (const DomainError& e) {
    fail("operator", e.what());
  }
}

std::vector<double> parse_sigma_list(Reader& r, double width, json& out) {
  const json* v = r.find("sigma");
  std::vector<double> sigmas;
  if (!v) {
    out["sigma"] = {{"start", 0.0}, {"stop", width}, {"points", 16}, {"endpoint", false}};
    v = &out["sigma"];
  }
  if (v->is_array()) {
    require(!v->empty(), r.key("sigma"), "must not be empty");
    for (const json& s : *v) {
      require(s.is_number() && std::isfinite(s.get<double>()), r.key("sigma"), "entries must be numbers");
      sigmas.push_back(s.get<double>());
    }
    out["sigma"] = sigmas;
    return sigmas;
  }
  Reader g(*v, r.key("sigma"));
  const double start = g.number("start", 0.0);
  const double stop = g.number("stop", width);
  const long long points = g.integer("points", 16);
  require(points >= 1 && points <= 100000, g.key("points"), "must lie in [1, 100000]");
  const json* ep = g.find("endpoint");
  require(!ep || ep->is_boolean(), g.key("endpoint"), "expected true or false");
  const bool endpoint = ep ? ep->get<bool>() : false;
  g.finish();
  const double denom = endpoint ? std::max<double>(points - 1, 1) : static_cast<double>(points);
  for (long long i = 0; i < points; ++i) sigmas.push_back(start + (stop - start) * i / denom);
  out["sigma"] = {{"start", start}, {"stop", stop}, {"points", points}, {"endpoint", endpoint}};
  return sigmas;
}

int parse_J(Reader& r, json& out) {
  const long long J = r.integer("J", 16);
  require(J >= 1 && J <= 2048, r.key("J"), "must lie in [1, 2048]");
  out["J"] = J;
  return static_cast<int>(J);
}

double parse_scalar_sigma(Reader& r, json& out) {
  const double s = r.number("sigma", 0.0);
  out["sigma"] = s;
  return s;
}

void parse_variant(Reader& r, json& out, TaskParams& p, const std::string& default_path) {
  p.variant = r.string("variant", {"auto", "standard", "principal"}, "auto");
  const std::string path = r.string("det2_path", {"eigenvalues", "factorization"}, default_path);
  p.det2_path = path == "eigenvalues" ? Det2Path::eigenvalues : Det2Path::factorization;
  out["variant"] = p.variant;
  out["det2_path"] = path;
}

double positive(Reader& r, const std::string& name, double fallback, json& out) {
  const double v = r.number(name, fallback);
  require(v > 0.0, r.key(name), "must be positive");
  out[name] = v;
  return v;
}

TaskParams parse_params(const std::string& task, const json& j, const OperatorSpec& op, json& out) {
  Reader r(j, "params");
  TaskParams p;
  out = json::object();
  const double width = brillouin_width(op.period());
  if (task == "spectrum") {
    p.sigmas = parse_sigma_list(r, width, out);
    p.J = parse_J(r, out);
  } else if (task == "evans-eval") {
    p.sigma = parse_scalar_sigma(r, out);
    p.J = parse_J(r, out);
    parse_variant(r, out, p, "eigenvalues");
    const json* g = r.find("grid");
    const json empty = json::object();
    Reader gr(g ? *g : empty, "params.grid");
    LambdaGrid& lg = p.grid;
    lg.re_min = gr.number("re_min", lg.re_min);
    lg.re_max = gr.number("re_max", lg.re_max);
    lg.im_min = gr.number("im_min", lg.im_min);
    lg.im_max = gr.number("im_max", lg.im_max);
    lg.re_points = static_cast<int>(gr.integer("re_points", lg.re_points));
    lg.im_points = static_cast<int>(gr.integer("im_points", lg.im_points));
    gr.finish();
    require(lg.re_max > lg.re_min && lg.im_max > lg.im_min, "params.grid", "empty lambda range");
    require(lg.re_points >= 2 && lg.im_points >= 2 && lg.re_points <= 1000 && lg.im_points <= 1000,
            "params.grid", "point counts must lie in [2, 1000]");
    out["grid"] = {{"re_min", lg.re_min}, {"re_max", lg.re_max},       {"im_min", lg.im_min},
                   {"im_max", lg.im_max}, {"re_points", lg.re_points}, {"im_points", lg.im_points}};
  } else if (task == "roots") {
    p.sigma = parse_scalar_sigma(r, out);
    p.J = parse_J(r, out);
    parse_variant(r, out, p, "factorization");
    const json* g = r.find("region");
    const json empty = json::object();
    Reader gr(g ? *g : empty, "params.region");
    const double re_min = gr.number("re_min", -5.0), re_max = gr.number("re_max", 5.0);
    const double im_min = gr.number("im_min", -5.0), im_max = gr.number("im_max", 5.0);
    gr.finish();
    require(re_max > re_min && im_max > im_min, "params.region", "empty region");
    p.region = {cplx(re_min, im_min), cplx(re_max, im_max)};
    out["region"] = {{"re_min", re_min}, {"re_max", re_max}, {"im_min", im_min}, {"im_max", im_max}};
    p.min_box = positive(r, "min_box", 1e-6, out);
  } else if (task == "converge") {
    p.sigma = parse_scalar_sigma(r, out);
    const json* J = r.find("J");
    const bool list = J && J->is_array();
    require(list && J->size() >= 2, "params.J", "J list must contain ≥ 2 values");
    for (const json& v : *J) {
      require(v.is_number_integer() && v.get<int>() >= 1 && v.get<int>() <= 2048, "params.J",
              "entries must be integers in [1, 2048]");
      p.J_list.push_back(v.get<int>());
    }
    for (std::size_t i = 1; i < p.J_list.size(); ++i)
      require(p.J_list[i] > p.J_list[i - 1], "params.J", "J list must be strictly increasing");
    out["J"] = p.J_list;
    const long long ref = r.integer("J_ref", 4LL * p.J_list.back());
    require(ref >= 2LL * p.J_list.back() && ref <= 4096, "params.J_ref",
            "must lie in [2 max(J), 4096]");
    p.J_ref = static_cast<int>(ref);
    out["J_ref"] = ref;
    p.R = positive(r, "R", 4.0, out);
    const long long probes = r.integer("probes", 16);
    require(probes >= 1 && probes <= 4096, "params.probes", "must lie in [1, 4096]");
    p.probes = static_cast<int>(probes);
    out["probes"] = probes;
    const long long seed = r.integer("seed", 0);
    require(seed >= 0, "params.seed", "must be >= 0");
    p.seed = static_cast<std::uint64_t>(seed);
    out["seed"] = seed;
    p.study = r.string("study", {"evans", "spectral", "both"}, "both");
    out["study"] = p.study;
  } else if (task == "oracle-compare") {
    const json* s = r.find("sigma");
    p.sigmas = {0.0};
    if (s) {
      require(s->is_array() && !s->empty(), "params.sigma", "expected a non-empty array of numbers");
      p.sigmas.clear();
      for (const json& v : *s) {
        require(v.is_number(), "params.sigma", "entries must be numbers");
        p.sigmas.push_back(v.get<double>());
      }
    }
    out["sigma"] = p.sigmas;
    p.J = parse_J(r, out);
    p.R = positive(r, "R", 3.0, out);
    p.min_box = positive(r, "min_box", 1e-6, out);
    p.ode_tol = r.number("ode_tol", 1e-12);
    require(p.ode_tol >= 1e-12 && p.ode_tol <= 1e-4, "params.ode_tol", "must lie in [1e-12, 1e-4]");
    out["ode_tol"] = p.ode_tol;
    p.tolerance = positive(r, "tolerance", 1e-6, out);
  } else {
    const long long n = r.integer("grid_n", 256);
    require(n >= 2 && n <= 1 << 20, "params.grid_n", "must lie in [2, 2^20]");
    p.grid_n = static_cast<int>(n);
    out["grid_n"] = n;
  }
  r.finish();
  return p;
}

}  // namespace

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                            const std::optional<std::string>& task_override) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string detail = e.what();
    if (const auto pos = detail.find(": syntax error"); pos != std::string::npos) detail = detail.substr(pos + 2);
    throw ConfigError("config: syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + detail);
  }
  Reader r(root, "");
  std::string task;
  if (r.has("task")) {
    task = r.string("task", kTasks);
    if (task_override && *task_override != task)
      fail("task", "config task '" + task + "' differs from the command-line task '" +
                       *task_override + "'");
  } else {
    if (!task_override) fail("task", "missing required key");
    task = *task_override;
    if (std::find(kTasks.begin(), kTasks.end(), task) == kTasks.end())
      fail("task", "unknown task '" + task + "'");
  }

  json canonical;
  canonical["task"] = task;
  const json* op_json = r.find("operator");
  require(op_json != nullptr, "operator", "missing required key");
  json op_canonical;
  OperatorSpec op = parse_operator(*op_json, base_dir, op_canonical);
  canonical["operator"] = op_canonical;

  const json* pj = r.find("params");
  const json empty = json::object();
  json params_canonical;
  TaskParams params = parse_params(task, pj ? *pj : empty, op, params_canonical);
  canonical["params"] = params_canonical;

  std::filesystem::path out_dir = "out";
  std::vector<std::string> formats = {"csv", "json", "svg"};
  if (const json* oj = r.find("output")) {
    Reader o(*oj, "output");
    if (const json* d = o.find("dir")) {
      require(d->is_string() && !d->get<std::string>().empty(), "output.dir", "expected a path");
      out_dir = d->get<std::string>();
    }
    if (const json* f = o.find("formats")) {
      require(f->is_array() && !f->empty(), "output.formats", "expected a non-empty array");
      std::set<std::string> chosen;
      for (const json& v : *f) {
        require(v.is_string(), "output.formats", "entries must be strings");
        const std::string s = v.get<std::string>();
        require(s == "csv" || s == "json" || s == "svg", "output.formats",
                "'" + s + "' is not one of csv, json, svg");
        chosen.insert(s);
      }
      formats.clear();
      for (const char* s : {"csv", "json", "svg"})
        if (chosen.count(s)) formats.push_back(s);
    }
    o.finish();
  }
  canonical["output"] = {{"formats", formats}};
  r.finish();

  const std::string hash = sha256_hex(canonical.dump() + "\n" + kVersionTag);
  return RunConfig{task, std::move(op), std::move(params), out_dir.lexically_normal(),
                   std::move(formats), std::move(canonical), hash};
}

RunConfig parse_config(const std::filesystem::path& path, const std::optional<std::string>& task_override) {
  const std::string text = read_file(path, "config");
  return parse_config_text(text, path.parent_path().empty() ? "." : path.parent_path(), task_override);
}

}  // namespace blochspec::cli
