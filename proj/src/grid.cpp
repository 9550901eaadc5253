#include "fdrpower/grid.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace fdrpower {

using nlohmann::json;

namespace {

std::vector<double> parse_range(const json& j) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(v.get<double>());
  } else if (j.is_object()) {
    const double lo = j.at("lo").get<double>();
    const double hi = j.at("hi").get<double>();
    const double step = j.at("step").get<double>();
    if (!(step > 0.0)) throw std::runtime_error("range step must be > 0");
    for (double v = lo; v <= hi + 1e-12 * std::fabs(step); v += step)
      out.push_back(v);
  } else if (j.is_number()) {
    out.push_back(j.get<double>());
  } else {
    throw std::runtime_error("expected number, list, or {lo,step,hi} range");
  }
  return out;
}

std::string design_key(const DesignPoint& d) {
  std::ostringstream os;
  os.precision(17);
  os << d.m << '|' << d.r << '|' << d.f << '|' << d.theta << '|' << d.n << '|'
     << (d.family == Family::FoldedT ? "t" : "normal");
  return os.str();
}

json report_to_json(const PowerReport& rep) {
  json j;
  j["degenerate"] = rep.degenerate;
  j["gamma"] = rep.gamma;
  j["pi_pi"] = rep.pi_pi;
  j["pi_oracle"] = rep.pi_oracle;
  if (rep.pi_lower) j["pi_lower"] = *rep.pi_lower;
  j["f0"] = rep.f0;
  if (rep.clt) {
    j["tau2"] = rep.clt->tau2;
    j["sigma2"] = rep.clt->sigma2;
    j["alpha2"] = rep.clt->alpha2;
  }
  j["lambda75"] = rep.lambda75;
  j["lambda90"] = rep.lambda90;
  j["lambda_eq"] = rep.lambda_eq;
  if (rep.f_reduced_closed) j["f_reduced_closed"] = *rep.f_reduced_closed;
  if (rep.f_reduced_numeric) j["f_reduced_numeric"] = *rep.f_reduced_numeric;
  return j;
}

PowerReport report_from_json(const json& j) {
  PowerReport rep;
  rep.degenerate = j.value("degenerate", false);
  rep.gamma = j.value("gamma", 0.0);
  rep.pi_pi = j.value("pi_pi", 0.0);
  rep.pi_oracle = j.value("pi_oracle", 0.0);
  if (j.contains("pi_lower")) rep.pi_lower = j["pi_lower"].get<double>();
  rep.f0 = j.value("f0", 0.0);
  if (j.contains("sigma2")) {
    CltVariances v;
    v.tau2 = j.value("tau2", 0.0);
    v.sigma2 = j.value("sigma2", 0.0);
    v.alpha2 = j.value("alpha2", 0.0);
    rep.clt = v;
  }
  rep.lambda75 = j.value("lambda75", 0.0);
  rep.lambda90 = j.value("lambda90", 0.0);
  rep.lambda_eq = j.value("lambda_eq", 0.0);
  if (j.contains("f_reduced_closed"))
    rep.f_reduced_closed = j["f_reduced_closed"].get<double>();
  if (j.contains("f_reduced_numeric"))
    rep.f_reduced_numeric = j["f_reduced_numeric"].get<double>();
  return rep;
}

}  // namespace

GridConfig GridConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  GridConfig cfg;
  cfg.theta = parse_range(j.at("theta"));
  if (j.contains("expected_m")) cfg.expected_m = parse_range(j["expected_m"]);
  if (j.contains("r")) cfg.r = parse_range(j["r"]);
  if (cfg.r.empty() == cfg.expected_m.empty())
    throw std::runtime_error("config needs exactly one of r / expected_m");
  cfg.f = parse_range(j.at("f"));
  cfg.m = j.at("m").get<std::int64_t>();
  if (j.contains("n")) {
    for (double v : parse_range(j["n"]))
      cfg.n.push_back(static_cast<std::int64_t>(std::llround(v)));
  }
  if (j.contains("family")) {
    const std::string fam = j["family"].get<std::string>();
    if (fam == "t")
      cfg.family = Family::FoldedT;
    else if (fam == "normal")
      cfg.family = Family::FoldedNormal;
    else
      throw std::runtime_error("family must be 't' or 'normal'");
  }
  if (j.contains("simulate")) cfg.simulate = j["simulate"].get<bool>();
  if (j.contains("reps")) cfg.reps = j["reps"].get<std::int64_t>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("thresholds"))
    cfg.thresholds = j["thresholds"].get<std::vector<double>>();
  if (j.contains("correlation")) {
    CorrelationSpec cs;
    cs.rho = j["correlation"].at("rho").get<double>();
    cs.block_size = j["correlation"].value("block_size", std::int64_t{100});
    cfg.correlation = cs;
  }
  if (j.contains("power_window")) {
    cfg.power_window_lo = j["power_window"].at("lo").get<double>();
    cfg.power_window_hi = j["power_window"].at("hi").get<double>();
    if (j["power_window"].contains("n_step"))
      cfg.n_step = j["power_window"]["n_step"].get<std::int64_t>();
  }
  if (cfg.n.empty() && !cfg.power_window_lo)
    throw std::runtime_error("config needs n or a power_window");
  return cfg;
}

GridConfig GridConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return from_json_text(buf.str());
}

std::vector<DesignPoint> expand_grid(const GridConfig& cfg) {
  std::vector<double> rs = cfg.r;
  if (rs.empty()) {
    for (double em : cfg.expected_m)
      rs.push_back(em / static_cast<double>(cfg.m));
  }
  std::vector<DesignPoint> out;
  for (double theta : cfg.theta) {
    for (double r : rs) {
      for (double f : cfg.f) {
        std::vector<std::int64_t> ns = cfg.n;
        if (ns.empty()) {
          // auto-n: window endpoints via the average-power sample size,
          // stepped by n_step
          std::int64_t lo, hi;
          try {
            lo = sample_size_avg(theta, r, f, *cfg.power_window_lo, cfg.family);
            hi = sample_size_avg(theta, r, f, *cfg.power_window_hi, cfg.family);
          } catch (const SearchExhausted&) {
            continue;
          }
          for (std::int64_t n = lo; n <= hi; n += cfg.n_step) ns.push_back(n);
          if (ns.empty()) ns.push_back(lo);
        }
        for (std::int64_t n : ns) {
          DesignPoint d;
          d.m = cfg.m;
          d.r = r;
          d.f = f;
          d.theta = theta;
          d.n = n;
          d.family = cfg.family;
          out.push_back(d);
        }
      }
    }
  }
  if (out.empty()) throw std::runtime_error("expand_grid: empty grid");
  return out;
}

std::string row_to_json(const ResultRow& row) {
  json j;
  j["m"] = row.design.m;
  j["r"] = row.design.r;
  j["f"] = row.design.f;
  j["theta"] = row.design.theta;
  j["n"] = row.design.n;
  j["family"] = row.design.family == Family::FoldedT ? "t" : "normal";
  j["report"] = report_to_json(row.report);
  if (row.sim) {
    json s;
    s["mean_tpf"] = row.sim->mean_tpf;
    s["se_mean_tpf"] = row.sim->se_mean_tpf;
    s["fdr_hat"] = row.sim->fdr_hat;
    s["fdf_tail_hat"] = row.sim->fdf_tail_hat;
    s["fdf_excess_point"] = row.sim->fdf_excess_point;
    s["mean_pcf"] = row.sim->mean_pcf;
    s["reps"] = row.sim->reps;
    s["seed"] = row.sim->seed;
    json lp = json::object();
    for (const auto& [lam, p] : row.sim->lambda_power_hat)
      lp[std::to_string(lam)] = p;
    s["lambda_power_hat"] = lp;
    j["sim"] = s;
  }
  if (!row.error.empty()) j["error"] = row.error;
  j["wall_seconds"] = row.wall_seconds;
  return j.dump();
}

ResultRow row_from_json(const std::string& line) {
  const json j = json::parse(line);
  ResultRow row;
  row.design.m = j.at("m").get<std::int64_t>();
  row.design.r = j.at("r").get<double>();
  row.design.f = j.at("f").get<double>();
  row.design.theta = j.at("theta").get<double>();
  row.design.n = j.at("n").get<std::int64_t>();
  row.design.family =
      j.value("family", "t") == std::string("t") ? Family::FoldedT
                                                 : Family::FoldedNormal;
  if (j.contains("report")) row.report = report_from_json(j["report"]);
  if (j.contains("sim")) {
    SimSummary s;
    const json& sj = j["sim"];
    s.mean_tpf = sj.value("mean_tpf", 0.0);
    s.se_mean_tpf = sj.value("se_mean_tpf", 0.0);
    s.fdr_hat = sj.value("fdr_hat", 0.0);
    s.fdf_tail_hat = sj.value("fdf_tail_hat", 0.0);
    s.fdf_excess_point = sj.value("fdf_excess_point", 0.0);
    s.mean_pcf = sj.value("mean_pcf", 0.0);
    s.reps = sj.value("reps", std::int64_t{0});
    s.seed = sj.value("seed", std::uint64_t{0});
    if (sj.contains("lambda_power_hat"))
      for (const auto& [k, v] : sj["lambda_power_hat"].items())
        s.lambda_power_hat[std::stod(k)] = v.get<double>();
    row.sim = s;
  }
  row.error = j.value("error", "");
  row.wall_seconds = j.value("wall_seconds", 0.0);
  return row;
}

std::vector<ResultRow> run_grid(const GridConfig& cfg, int workers,
                                const std::string& jsonl_path) {
  const std::vector<DesignPoint> designs = expand_grid(cfg);
  std::vector<ResultRow> rows(designs.size());

  // resume: skip designs already present in the output file
  std::map<std::string, ResultRow> done;
  if (!jsonl_path.empty()) {
    std::ifstream is(jsonl_path);
    std::string line;
    while (is && std::getline(is, line)) {
      if (line.empty()) continue;
      try {
        ResultRow r = row_from_json(line);
        done[design_key(r.design)] = std::move(r);
      } catch (...) {
      }
    }
  }

  auto evaluate = [&](size_t idx) {
    const DesignPoint& d = designs[idx];
    ResultRow row;
    row.design = d;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      row.report = power_report(d);
      if (cfg.simulate) {
        SimConfig sc;
        sc.design = d;
        sc.reps = cfg.reps;
        sc.seed = cfg.seed;
        sc.thresholds = cfg.thresholds;
        sc.correlation = cfg.correlation;
        row.sim = run_sim(sc, 1);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    rows[idx] = std::move(row);
  };

  std::vector<size_t> todo;
  for (size_t i = 0; i < designs.size(); ++i) {
    auto it = done.find(design_key(designs[i]));
    if (it != done.end())
      rows[i] = it->second;
    else
      todo.push_back(i);
  }

  workers = std::max(1, workers);
  if (workers == 1 || todo.size() <= 1) {
    for (size_t i : todo) evaluate(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<size_t>(workers, todo.size()); ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const size_t k = next.fetch_add(1);
          if (k >= todo.size()) break;
          evaluate(todo[k]);
        }
      });
    for (auto& t : pool) t.join();
  }

  if (!jsonl_path.empty()) {
    // deterministic order, full rewrite keeps the file canonical
    std::ofstream os(jsonl_path, std::ios::trunc);
    for (const auto& row : rows) os << row_to_json(row) << '\n';
  }
  return rows;
}

void write_jsonl(const std::vector<ResultRow>& rows, std::ostream& os) {
  for (const auto& row : rows) os << row_to_json(row) << '\n';
}

std::vector<ResultRow> read_jsonl(std::istream& is) {
  std::vector<ResultRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) rows.push_back(row_from_json(line));
  }
  return rows;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << "m,r,f,theta,n,family,gamma,pi_pi,pi_oracle,pi_lower,f0,tau2,sigma2,"
        "alpha2,lambda75,lambda90,lambda_eq,f_reduced_closed,"
        "f_reduced_numeric,mean_tpf,fdr_hat,error\n";
  os.precision(6);
  for (const auto& row : rows) {
    const PowerReport& p = row.report;
    os << row.design.m << ',' << row.design.r << ',' << row.design.f << ','
       << row.design.theta << ',' << row.design.n << ','
       << (row.design.family == Family::FoldedT ? "t" : "normal") << ','
       << p.gamma << ',' << p.pi_pi << ',' << p.pi_oracle << ',';
    if (p.pi_lower) os << *p.pi_lower;
    os << ',' << p.f0 << ',';
    if (p.clt)
      os << p.clt->tau2 << ',' << p.clt->sigma2 << ',' << p.clt->alpha2;
    else
      os << ",,";
    os << ',' << p.lambda75 << ',' << p.lambda90 << ',' << p.lambda_eq << ',';
    if (p.f_reduced_closed) os << *p.f_reduced_closed;
    os << ',';
    if (p.f_reduced_numeric) os << *p.f_reduced_numeric;
    os << ',';
    if (row.sim) os << row.sim->mean_tpf;
    os << ',';
    if (row.sim) os << row.sim->fdr_hat;
    os << ',' << row.error << '\n';
  }
}

CompareOutcome compare_report(const std::vector<ResultRow>& rows,
                              const std::string& reference_csv_path,
                              double abs_tol) {
  std::ifstream is(reference_csv_path);
  if (!is)
    throw std::runtime_error("cannot open reference: " + reference_csv_path);

  std::string header;
  std::getline(is, header);
  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  auto col_idx = [&](const std::string& name) {
    for (size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int im = col_idx("m"), ir = col_idx("r"), iff = col_idx("f"),
            ith = col_idx("theta"), in = col_idx("n");
  if (im < 0 || ir < 0 || iff < 0 || ith < 0 || in < 0)
    throw std::runtime_error("reference csv must carry m,r,f,theta,n columns");

  std::map<std::string, const ResultRow*> index;
  for (const auto& row : rows) index[design_key(row.design)] = &row;

  json failures = json::array();
  CompareOutcome out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    DesignPoint d;
    d.m = std::stoll(cells[static_cast<size_t>(im)]);
    d.r = std::stod(cells[static_cast<size_t>(ir)]);
    d.f = std::stod(cells[static_cast<size_t>(iff)]);
    d.theta = std::stod(cells[static_cast<size_t>(ith)]);
    d.n = std::stoll(cells[static_cast<size_t>(in)]);
    auto it = index.find(design_key(d));
    if (it == index.end()) {
      json f;
      f["design"] = design_key(d);
      f["issue"] = "missing row";
      failures.push_back(f);
      ++out.cells_failed;
      continue;
    }
    const ResultRow& row = *it->second;
    for (size_t k = 0; k < cols.size() && k < cells.size(); ++k) {
      const std::string& name = cols[k];
      double got;
      if (name == "pi_pi")
        got = row.report.pi_pi;
      else if (name == "pi_oracle")
        got = row.report.pi_oracle;
      else if (name == "pi_lower")
        got = row.report.pi_lower.value_or(std::nan(""));
      else if (name == "lambda75")
        got = row.report.lambda75;
      else if (name == "lambda90")
        got = row.report.lambda90;
      else if (name == "lambda_eq")
        got = row.report.lambda_eq;
      else if (name == "mean_tpf")
        got = row.sim ? row.sim->mean_tpf : std::nan("");
      else
        continue;
      const double want = std::stod(cells[k]);
      ++out.cells_checked;
      if (!(std::fabs(got - want) <= abs_tol)) {
        json f;
        f["design"] = design_key(d);
        f["column"] = name;
        f["want"] = want;
        f["got"] = got;
        failures.push_back(f);
        ++out.cells_failed;
      }
    }
  }
  json rep;
  rep["cells_checked"] = out.cells_checked;
  rep["cells_failed"] = out.cells_failed;
  rep["failures"] = failures;
  out.report_json = rep.dump(2);
  return out;
}

}  // namespace fdrpower
