// fastla: decompositions on matrix files, verification suites, operation-count
// benchmarks and Monte Carlo experiments. Reports are JSON with sorted keys;
// everything except the optional "timings" object is a function of the
// command line alone.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "fastla/baseline.hpp"
#include "fastla/eig.hpp"
#include "fastla/inverse.hpp"
#include "fastla/io.hpp"
#include "fastla/lu.hpp"
#include "fastla/matmul.hpp"
#include "fastla/norms.hpp"
#include "fastla/oracle.hpp"
#include "fastla/precision.hpp"
#include "fastla/qr.hpp"
#include "fastla/random.hpp"
#include "fastla/rurv.hpp"
#include "fastla/sylvester.hpp"
#include "json.hpp"
#include "verify.hpp"

using namespace fastla;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 7;
  std::string engine = "conv";
  Index cutoff = 64;
  std::string precision = "working";
  std::string out;      // report path; stdout when empty
  std::string out_dir;  // directory for output matrices; none when empty
  bool timings = false;
  std::string command;  // echo, without output paths

  MmEngine make_engine(OpCounter* counter) const {
    MmEngine e;
    try {
      e.kind = parse_engine_kind(engine);
    } catch (const Error& ex) {
      throw UsageError(ex.what());
    }
    if (cutoff < 1) throw UsageError("--cutoff must be at least 1");
    e.cutoff = cutoff;
    e.block = cutoff;
    e.counter = counter;
    return e;
  }
  Precision make_precision() const {
    try {
      return parse_precision(precision);
    } catch (const Error& ex) {
      throw UsageError(ex.what());
    }
  }
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Assemble and emit a RunReport.
struct Report {
  json body = json::object();
  json assertions = json::array();
  json timings = json::object();
  bool ok = true;

  void check(const std::string& name, bool passed, double value, double limit) {
    assertions.push_back({{"name", name}, {"passed", passed}, {"value", value}, {"limit", limit}});
    ok = ok && passed;
  }
  void check(const std::string& name, bool passed) {
    assertions.push_back({{"name", name}, {"passed", passed}});
    ok = ok && passed;
  }

  int emit(const Globals& g, const OpCounter* ops = nullptr) {
    json r = body;
    r["schema"] = 1;
    r["command"] = g.command;
    r["seed"] = g.seed;
    r["engine"] = {{"kind", g.engine}, {"cutoff", g.cutoff}};
    r["precision"] = g.precision;
    if (ops) r["op_counts"] = {{"mults", ops->scalar_mults}, {"adds", ops->scalar_adds}};
    r["assertions"] = assertions;
    r["passed"] = ok;
    if (g.timings) r["timings"] = timings;
    const std::string text = r.dump(2) + "\n";
    if (g.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(g.out, std::ios::binary);
      if (!f) throw IoError("cannot write report " + g.out);
      f << text;
    }
    return ok ? kExitOk : kExitFail;
  }
};

Matrix load(const std::string& path) {
  if (path.empty()) throw UsageError("missing input matrix (--in)");
  return read_matrix(path);
}

void save(const Globals& g, Report& rep, const std::string& name, const ConstMatrixRef& m) {
  if (g.out_dir.empty()) return;
  std::filesystem::create_directories(g.out_dir);
  const std::string path = (std::filesystem::path(g.out_dir) / (name + ".mat")).string();
  write_matrix(path, m);
  rep.body["outputs"].push_back(name + ".mat");
}

Matrix column(const std::vector<double>& v) {
  Matrix m(v.size(), 1);
  for (Index i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

json stability_json(const StabilityReport& s) {
  json j = {{"residual", s.residual}, {"orth_defect", s.orth_defect}, {"norm", to_string(s.norm_kind)},
            {"flags", s.flags}};
  if (s.cond_estimate) j["cond_estimate"] = *s.cond_estimate;
  return j;
}

double nsq(Index n) { return static_cast<double>(n) * static_cast<double>(n); }

// ------------------------------------------------------------------ operations

struct OpArgs {
  std::string in, a, b, c;
  std::string step_b = "solve";
  Index panel_cutoff = 8;
  std::string kind = "general";
  bool symmetric = false;
  bool vectors = false;
  Index rank = 0;
};

int run_qr(const Globals& g, const OpArgs& args) {
  const Matrix a = load(args.in);
  OpCounter ops;
  const MmEngine e = g.make_engine(&ops);
  Report rep;
  const auto t0 = Clock::now();
  const QrResult r = qrr(a.view(), e, {args.panel_cutoff, true});
  rep.timings["qrr"] = seconds_since(t0);
  const Index n = std::max(a.rows(), a.cols());
  const double limit = (e.kind == EngineKind::strassen ? 1e4 : 1e3) * nsq(n) * kEps;
  rep.body["stability"] = stability_json(r.report);
  rep.check("residual <= c n^2 eps", r.report.residual <= limit, r.report.residual, limit);
  rep.check("orthogonality <= c n^2 eps", r.report.orth_defect <= limit, r.report.orth_defect, limit);
  save(g, rep, "Q", form_q(r.q).view());
  save(g, rep, "R", r.R.view());
  return rep.emit(g, &ops);
}

int run_lu(const Globals& g, const OpArgs& args) {
  const Matrix a = load(args.in);
  OpCounter ops;
  const MmEngine e = g.make_engine(&ops);
  LurConfig cfg;
  cfg.panel_cutoff = args.panel_cutoff;
  try {
    cfg.step_b = parse_step_b(args.step_b);
  } catch (const Error& ex) {
    throw UsageError(ex.what());
  }
  Report rep;
  const auto t0 = Clock::now();
  const LuResult f = lur(a.view(), e, cfg);
  rep.timings["lur"] = seconds_since(t0);
  const double limit = 1e3 * nsq(a.rows()) * kEps * f.growth;
  rep.body["stability"] = stability_json(f.report);
  rep.body["growth"] = f.growth;
  rep.body["l_cond"] = f.l_cond;
  rep.body["perm"] = f.perm;
  rep.body["step_b"] = to_string(cfg.step_b);
  rep.check("no zero pivot", !f.singular());
  rep.check("residual <= 1e3 n^2 eps g", f.report.residual <= limit, f.report.residual, limit);
  save(g, rep, "L", f.L.view());
  save(g, rep, "U", f.U.view());
  return rep.emit(g, &ops);
}

int run_invert(const Globals& g, const OpArgs& args) {
  const Matrix a = load(args.in);
  OpCounter ops;
  const MmEngine e = g.make_engine(&ops);
  const Precision p = g.make_precision();
  Report rep;
  const auto t0 = Clock::now();
  InvResult r;
  MatrixDW truth;
  if (args.kind == "tri") {
    r = tri_inv(a.view(), e, p);
    truth = dw_tri_inverse(a.view());
  } else if (args.kind == "spd") {
    r = spd_inv(a.view(), e, p);
    truth = dw_spd_inverse(a.view());
  } else if (args.kind == "general") {
    r = gen_inv(a.view(), e, p);
    truth = dw_inverse(a.view());
  } else {
    throw UsageError("--kind must be tri, spd or general");
  }
  rep.timings["invert"] = seconds_since(t0);
  const double err = dw_distance(r.X.view(), truth.view()) / frobenius_norm(narrow(truth.view()).view());
  rep.body["kind"] = args.kind;
  rep.body["report"] = {{"residual_left", r.report.residual_left},
                        {"residual_right", r.report.residual_right},
                        {"kappa", r.report.kappa},
                        {"precision_used", to_string(r.report.precision_used)},
                        {"predicted_bound", r.report.predicted_bound}};
  rep.body["forward_error"] = err;
  rep.check("forward error <= predicted bound", err <= r.report.predicted_bound, err, r.report.predicted_bound);
  if (p == Precision::extended) {
    const double lim = 1e3 * nsq(a.rows()) * kEps * r.report.kappa;
    rep.check("extended forward error <= 1e3 n^2 eps kappa", err <= lim, err, lim);
  }
  save(g, rep, "X", r.X.view());
  return rep.emit(g, &ops);
}

int run_rurv(const Globals& g, const OpArgs& args) {
  const Matrix a = load(args.in);
  OpCounter ops;
  const MmEngine e = g.make_engine(&ops);
  RngStream rng(g.seed);
  Report rep;
  const auto t0 = Clock::now();
  const UrvResult u = rurv(a.view(), rng, e);
  rep.timings["rurv"] = seconds_since(t0);
  const Index n = a.rows();
  const double limit = 1e3 * nsq(n) * kEps;
  rep.body["stability"] = stability_json(u.report);
  if (args.rank > 0) {
    if (args.rank >= n) throw UsageError("--rank must be below the matrix size");
    const RankRevealReport rr = rank_reveal_report(u, args.rank);
    rep.body["rank_reveal"] = {{"r", rr.r},
                               {"sigma_min_leading", rr.sigma_min_leading},
                               {"sigma_max_trailing", rr.sigma_max_trailing}};
  }
  rep.check("residual <= 1e3 n^2 eps", u.report.residual <= limit, u.report.residual, limit);
  save(g, rep, "U", form_q(u.U).view());
  save(g, rep, "R", u.R.view());
  save(g, rep, "V", u.V.view());
  return rep.emit(g, &ops);
}

int run_sylvester(const Globals& g, const OpArgs& args) {
  if (args.a.empty() || args.b.empty() || args.c.empty()) throw UsageError("sylvester needs --a, --b and --c");
  const SylvesterProblem p{read_matrix(args.a), read_matrix(args.b), read_matrix(args.c)};
  OpCounter ops;
  const MmEngine e = g.make_engine(&ops);
  Report rep;
  const auto t0 = Clock::now();
  const SylrResult s = sylr(p, e);
  rep.timings["sylr"] = seconds_since(t0);
  const auto t1 = Clock::now();
  const SepEstimate sep = sep_estimate(p.A.view(), p.B.view());
  rep.timings["sep"] = seconds_since(t1);
  const Index n = p.A.rows(), m = p.B.rows();
  const double na = frobenius_norm(p.A.view()), nb = frobenius_norm(p.B.view());
  rep.body["stability"] = stability_json(s.report);
  rep.body["sep"] = {{"value", sep.value}, {"method", to_string(sep.method)}, {"upper_bound_only", sep.upper_bound_only()}};
  rep.body["predicted_bound"] =
      sylr_predicted_bound(n, m, na, nb, frobenius_norm(p.C.view()), frobenius_norm(s.R.view()), sep.value, e);
  const double limit = 1e3 * nsq(n + m) * kEps;
  rep.check("residual <= 1e3 (n+m)^2 eps", s.report.residual <= limit, s.report.residual, limit);
  save(g, rep, "R", s.R.view());
  return rep.emit(g, &ops);
}

json tree_json(const std::vector<SplitNode>& tree) {
  json t = json::array();
  for (const auto& s : tree)
    t.push_back({{"lo", s.lo},
                 {"size", s.size},
                 {"r", s.r},
                 {"region", s.region},
                 {"norm_a21", s.norm_a21},
                 {"attempts", s.attempts},
                 {"sign_iterations", s.sign_iterations},
                 {"accepted", s.accepted}});
  return t;
}

int run_eig(const Globals& g, const OpArgs& args) {
  const Matrix a = load(args.in);
  if (a.rows() != a.cols()) throw UsageError("eig needs a square matrix");
  OpCounter ops;
  const MmEngine e = g.make_engine(&ops);
  RngStream rng(g.seed);
  Report rep;
  const Index n = a.rows();
  const double anorm = frobenius_norm(a.view());
  const double orth_limit = 1e3 * nsq(n) * kEps;
  const auto t0 = Clock::now();
  if (args.symmetric) {
    const SymEigResult s = symmetric_eig(a.view(), rng, e);
    rep.timings["eig"] = seconds_since(t0);
    Matrix ql(s.Q);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) ql(i, j) *= s.values[j];
    const double res = frobenius_distance(multiply(ql.view(), s.Q.transpose().view()).view(), a.view()) / anorm;
    rep.body["values"] = s.values;
    rep.body["tree"] = tree_json(s.tree);
    rep.body["flags"] = s.flags;
    rep.body["stability"] = {{"residual", res}, {"orth_defect", orthogonality_defect(s.Q.view())}};
    rep.check("orthogonality <= 1e3 n^2 eps", orthogonality_defect(s.Q.view()) <= orth_limit,
              orthogonality_defect(s.Q.view()), orth_limit);
    const double lim = 1e3 * static_cast<double>(n) * kEps;
    rep.check("residual <= 1e3 n eps", res <= lim, res, lim);
    save(g, rep, "Lambda", column(s.values).view());
    save(g, rep, "Q", s.Q.view());
    return rep.emit(g, &ops);
  }

  const SchurResult s = schur_dandc(a.view(), rng, e);
  rep.timings["schur"] = seconds_since(t0);
  const Matrix back = multiply(multiply(s.Q.view(), s.T.view()).view(), s.Q.transpose().view());
  const double res = frobenius_distance(back.view(), a.view());
  const double res_limit = 10.0 * static_cast<double>(std::max<Index>(s.accepted_splits(), 1)) * s.split_tol * anorm;
  json ev = json::array();
  for (const auto& z : schur_eigenvalues(s.T.view())) ev.push_back({z.real(), z.imag()});
  rep.body["eigenvalues"] = ev;
  rep.body["tree"] = tree_json(s.tree);
  rep.body["flags"] = s.flags;
  rep.body["split_tol"] = s.split_tol;
  rep.body["stability"] = {{"residual", res / anorm}, {"orth_defect", orthogonality_defect(s.Q.view())}};
  rep.check("||A - Q T Q^T||_F <= 10 #splits split_tol ||A||_F", res <= res_limit, res, res_limit);
  rep.check("orthogonality <= 1e3 n^2 eps", orthogonality_defect(s.Q.view()) <= orth_limit,
            orthogonality_defect(s.Q.view()), orth_limit);
  rep.check("T is quasi-upper-triangular", is_quasi_upper_triangular(s.T.view()));
  save(g, rep, "T", s.T.view());
  save(g, rep, "Q", s.Q.view());
  if (args.vectors) {
    if (!is_quasi_upper_triangular(s.T.view())) {
      rep.check("eigenvectors computed", false);
    } else {
      const auto t1 = Clock::now();
      const EvecResult v = evecr(s.T.view(), e);
      rep.timings["evecr"] = seconds_since(t1);
      const double tn = frobenius_norm(s.T.view());
      double worst = 0.0;
      for (double r : evec_residuals(s.T.view(), v.V.view())) worst = std::max(worst, r / tn);
      rep.body["eigenvectors"] = {{"s_floor", v.err.s_floor},
                                  {"predicted_evec_bound", v.err.predicted_evec_bound},
                                  {"worst_residual", worst}};
      rep.check("eigenvector residuals <= predicted bound", worst <= v.err.predicted_evec_bound, worst,
                v.err.predicted_evec_bound);
      save(g, rep, "V", multiply(s.Q.view(), v.V.view()).view());
    }
  }
  return rep.emit(g, &ops);
}

int run_svd(const Globals& g, const OpArgs& args) {
  const Matrix a = load(args.in);
  if (a.rows() != a.cols()) throw UsageError("svd needs a square matrix");
  OpCounter ops;
  const MmEngine e = g.make_engine(&ops);
  RngStream rng(g.seed);
  Report rep;
  const auto t0 = Clock::now();
  const GramSvdResult s = svd_via_gram(a.view(), rng, e);
  rep.timings["svd"] = seconds_since(t0);
  const Index n = a.rows();
  Matrix us(s.U);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) us(i, j) *= s.s[j];
  const double anorm = frobenius_norm(a.view());
  const double res = frobenius_distance(multiply(us.view(), s.V.transpose().view()).view(), a.view()) /
                     (anorm > 0.0 ? anorm : 1.0);
  const double lim = 1e3 * static_cast<double>(n) * kEps;
  rep.body["singular_values"] = s.s;
  rep.body["flags"] = s.flags;
  rep.body["stability"] = {{"residual", res},
                           {"orth_defect_u", orthogonality_defect(s.U.view())},
                           {"orth_defect_v", orthogonality_defect(s.V.view())}};
  rep.check("residual <= 1e3 n eps", res <= lim, res, lim);
  save(g, rep, "U", s.U.view());
  save(g, rep, "S", column(s.s).view());
  save(g, rep, "V", s.V.view());
  return rep.emit(g, &ops);
}

// ------------------------------------------------------------------- bench

std::vector<Index> parse_sizes(const std::string& text) {
  std::vector<Index> out;
  auto as_index = [](const std::string& s) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(s, &pos);
      if (pos != s.size()) throw UsageError("bad size '" + s + "'");
      return static_cast<Index>(v);
    } catch (const std::logic_error&) {
      throw UsageError("bad size '" + s + "'");
    }
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const Index lo = as_index(text.substr(0, dots)), hi = as_index(text.substr(dots + 2));
    for (Index n = lo; n >= 1 && n <= hi; n *= 2) out.push_back(n);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(as_index(item));
  }
  if (out.empty()) throw UsageError("--sizes is empty");
  for (Index n : out)
    if (n == 0 || (n & (n - 1)) != 0) throw UsageError("--sizes must be powers of two");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) throw UsageError("--sizes must be increasing");
  return out;
}

struct BenchArgs {
  std::string algo;
  std::string sizes = "32..256";
  double gamma = 0.0;
  Index block = 0;
  std::string format = "csv";
  std::optional<double> expect;
  double tol = 0.15;
};

int run_bench(const Globals& g, const BenchArgs& args) {
  const std::vector<Index> sizes = parse_sizes(args.sizes);
  if (args.format != "csv" && args.format != "json") throw UsageError("--format must be csv or json");
  const MmEngine base = g.make_engine(nullptr);
  struct Row {
    Index n, b;
    std::uint64_t mults, adds;
    double residual, seconds;
  };
  std::vector<Row> rows;
  const std::string& algo = args.algo;
  const double gamma = args.gamma > 0.0 ? args.gamma : 3.0;

  auto run_one = [&](Index n, Index b) {
    RngStream rng(g.seed ^ (n * 7919 + b));
    OpCounter ops;
    const MmEngine e = base.with_counter(&ops);
    double residual = 0.0;
    const auto t0 = Clock::now();
    if (algo == "matmul") {
      const Matrix a = gaussian_matrix(n, n, rng), bm = gaussian_matrix(n, n, rng);
      multiply(a.view(), bm.view(), e);
    } else if (algo == "qrr") {
      const Matrix a = gaussian_matrix(n, n, rng);
      residual = qrr(a.view(), e, {8, false}).report.residual;
    } else if (algo == "lur") {
      const Matrix a = gaussian_matrix(n, n, rng);
      LurConfig cfg;
      cfg.compute_report = false;
      const LuResult f = lur(a.view(), e, cfg);
      residual = lu_residual(a.view(), f);
    } else if (algo == "block-lu") {
      const Matrix a = gaussian_matrix(n, n, rng);
      residual = lu_residual(a.view(), block_lu(a.view(), {b, gamma}, e));
    } else if (algo == "tri-inv") {
      Matrix t = gaussian_matrix(n, n, rng);
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < i; ++j) t(i, j) = 0.0;
        t(i, i) += (t(i, i) >= 0 ? 1.0 : -1.0) * std::sqrt(static_cast<double>(n));
      }
      residual = tri_inv(t.view(), e, Precision::working, false).report.residual_left;
    } else if (algo == "sylr") {
      Matrix a(n, n), bb(n, n);
      for (Index i = 0; i < n; ++i) {
        a(i, i) = 3.0 + rng.next_uniform();
        bb(i, i) = -2.0 + rng.next_uniform();
        for (Index j = i + 1; j < n; ++j) {
          a(i, j) = 0.1 * rng.next_gaussian();
          bb(i, j) = 0.1 * rng.next_gaussian();
        }
      }
      const Matrix c = gaussian_matrix(n, n, rng);
      residual = sylr(a.view(), bb.view(), c.view(), e).report.residual;
    } else if (algo == "evecr") {
      Matrix t(n, n);
      for (Index i = 0; i < n; ++i) {
        t(i, i) = static_cast<double>(i) + 1.0;
        for (Index j = i + 1; j < n; ++j) t(i, j) = rng.next_gaussian();
      }
      EvecConfig cfg;
      cfg.compute_sep = false;
      evecr(t.view(), e, cfg);
    } else if (algo == "rurv") {
      const Matrix a = gaussian_matrix(n, n, rng);
      residual = rurv(a.view(), rng, e).report.residual;
    } else {
      throw UsageError("unknown bench algorithm '" + algo + "'");
    }
    rows.push_back({n, b, ops.scalar_mults, ops.scalar_adds, residual, seconds_since(t0)});
  };

  for (Index n : sizes) {
    if (algo == "block-lu") {
      std::vector<Index> bs;
      if (args.block > 0) {
        bs = {std::min(args.block, n)};
      } else {
        for (Index b = 1; b <= n / 2; b *= 2) bs.push_back(b);
        const Index rec = BlockConfig::recommended(n, gamma);
        if (std::find(bs.begin(), bs.end(), rec) == bs.end()) bs.push_back(rec);
        std::sort(bs.begin(), bs.end());
      }
      for (Index b : bs) run_one(n, b);
    } else {
      run_one(n, 0);
    }
  }

  Report rep;
  json jrows = json::array();
  for (const Row& r : rows) {
    json j = {{"n", r.n}, {"mults", r.mults}, {"adds", r.adds}, {"residual", r.residual}};
    if (algo == "block-lu") j["b"] = r.b;
    jrows.push_back(j);
    rep.timings["n=" + std::to_string(r.n) + (algo == "block-lu" ? ",b=" + std::to_string(r.b) : "")] = r.seconds;
  }
  rep.body["algorithm"] = algo;
  rep.body["rows"] = jrows;
  rep.body["sizes"] = sizes;

  std::optional<double> exponent;
  if (algo == "block-lu") {
    // Two-term cost model c1 n^2 b + c2 n^3 b^{gamma-3}, fitted on total counts.
    double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
    for (const Row& r : rows) {
      const double n = static_cast<double>(r.n), b = static_cast<double>(r.b);
      const double cost = static_cast<double>(r.mults + r.adds);
      const double x1 = n * n * b / cost, x2 = n * n * n * std::pow(b, gamma - 3.0) / cost;
      s11 += x1 * x1;
      s12 += x1 * x2;
      s22 += x2 * x2;
      t1 += x1;
      t2 += x2;
    }
    const double det = s11 * s22 - s12 * s12;
    if (rows.size() >= 2 && det != 0.0) {
      const double c1 = (t1 * s22 - t2 * s12) / det, c2 = (s11 * t2 - s12 * t1) / det;
      double worst = 0.0;
      for (const Row& r : rows) {
        const double n = static_cast<double>(r.n), b = static_cast<double>(r.b);
        const double cost = static_cast<double>(r.mults + r.adds);
        worst = std::max(worst, std::fabs(c1 * n * n * b + c2 * n * n * n * std::pow(b, gamma - 3.0) - cost) / cost);
      }
      rep.body["model"] = {{"gamma", gamma}, {"c1", c1}, {"c2", c2}, {"max_relative_misfit", worst}};
    }
  } else if (sizes.size() >= 2) {
    std::vector<double> counts;
    for (const Row& r : rows) counts.push_back(static_cast<double>(r.mults));
    exponent = fit_exponent(sizes, counts);
    rep.body["exponent"] = *exponent;
  }
  if (args.expect) {
    if (!exponent) throw UsageError("--expect needs an algorithm with a fitted exponent and two or more sizes");
    const double d = std::fabs(*exponent - *args.expect);
    rep.check("fitted exponent within tolerance", d <= args.tol, d, args.tol);
  }

  if (args.format == "csv") {
    std::ostream& os = std::cout;
    os << (algo == "block-lu" ? "n,b,mults,adds,residual" : "n,mults,adds,residual") << (g.timings ? ",seconds" : "")
       << "\n";
    os.precision(17);
    for (const Row& r : rows) {
      os << r.n << ",";
      if (algo == "block-lu") os << r.b << ",";
      os << r.mults << "," << r.adds << "," << r.residual;
      if (g.timings) os << "," << r.seconds;
      os << "\n";
    }
    if (exponent) os << "# exponent " << *exponent << "\n";
    if (!g.out.empty()) return rep.emit(g);
    return rep.ok ? kExitOk : kExitFail;
  }
  return rep.emit(g);
}

// ------------------------------------------------------------ verify / experiment

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FASTLA_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    } catch (const std::exception&) {
      throw UsageError("FASTLA_THREADS must be a positive integer");
    }
  }
  return n;
}

struct VerifyArgs {
  std::string suite;
  bool quick = false;
  std::optional<Index> n, r, trials;
};

int run_verify(const Globals& g, const VerifyArgs& args) {
  verify::Options opts;
  opts.seed = g.seed;
  opts.quick = args.quick;
  opts.n = args.n;
  opts.r = args.r;
  opts.trials = args.trials;
  opts.threads = thread_cap();
  if (g.engine == "strassen") opts.cutoff = g.cutoff;

  std::vector<const verify::SuiteInfo*> chosen;
  if (args.suite == "all") {
    for (const auto& s : verify::suites()) chosen.push_back(&s);
  } else if (const auto* s = verify::find_suite(args.suite)) {
    chosen.push_back(s);
  } else {
    std::string names;
    for (const auto& s : verify::suites()) names += " " + s.name;
    throw UsageError("unknown suite '" + args.suite + "'; available: all" + names);
  }

  Report rep;
  json results = json::array();
  for (const auto* s : chosen) {
    const verify::SuiteResult r = verify::run_suite(*s, opts);
    std::cerr << (r.passed ? "PASS" : "FAIL") << " criterion " << r.criterion << " " << r.name << " ("
              << r.seconds << " s)\n";
    results.push_back({{"name", r.name}, {"criterion", r.criterion}, {"passed", r.passed}, {"details", r.details}});
    rep.timings[r.name] = r.seconds;
    rep.check("suite " + r.name, r.passed);
  }
  rep.body["suites"] = results;
  rep.body["quick"] = args.quick;
  return rep.emit(g);
}

struct ExperimentArgs {
  Index n = 32, r = 16, trials = 500;
  std::string csv;
};

int run_fstat(const Globals& g, const ExperimentArgs& args) {
  if (args.r < 1 || args.r >= args.n) throw UsageError("need 1 <= r < n");
  if (args.trials < 1) throw UsageError("--trials must be positive");
  const RngStream rng(g.seed);
  const auto t0 = Clock::now();
  const FStatSummary s = f_statistic_experiment(args.n, args.r, args.trials, rng, thread_cap());
  std::ostringstream csv;
  csv.precision(17);
  csv << "rank,f\n";
  for (Index i = 0; i < s.samples.size(); ++i) csv << i << "," << s.samples[i] << "\n";
  if (args.csv.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(args.csv, std::ios::binary);
    if (!f) throw IoError("cannot write " + args.csv);
    f << csv.str();
  }
  if (g.out.empty()) return kExitOk;
  Report rep;
  rep.timings["f-stat"] = seconds_since(t0);
  rep.body["summary"] = {{"n", s.n},
                         {"r", s.r},
                         {"trials", s.trials},
                         {"median", s.median},
                         {"prob_below_r2_sqrt_n", s.prob_below_a_one},
                         {"prob_below_r15_sqrt_n", s.prob_below_a_half}};
  return rep.emit(g);
}

// Command echo without the output paths, so reports written to different
// files still compare equal.
std::string command_echo(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" || a == "--report" || a == "--out-dir" || a == "--csv") {
      ++i;
      continue;
    }
    if (a.rfind("--out=", 0) == 0 || a.rfind("--report=", 0) == 0 || a.rfind("--out-dir=", 0) == 0 ||
        a.rfind("--csv=", 0) == 0 || a == "--timings")
      continue;
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

void add_op_options(CLI::App* sub, OpArgs& a, const std::string& op) {
  if (op == "sylvester") {
    sub->add_option("--a", a.a, "upper quasi-triangular A")->required();
    sub->add_option("--b", a.b, "upper quasi-triangular B")->required();
    sub->add_option("--c", a.c, "right-hand side C")->required();
    return;
  }
  sub->add_option("--in", a.in, "input matrix file")->required();
  if (op == "qr" || op == "lu") sub->add_option("--panel-cutoff", a.panel_cutoff, "columns at which recursion stops");
  if (op == "lu") sub->add_option("--step-b", a.step_b, "solve or invert");
  if (op == "invert") sub->add_option("--kind", a.kind, "tri, spd or general");
  if (op == "eig") {
    sub->add_flag("--symmetric", a.symmetric, "use the symmetric solver");
    sub->add_flag("--vectors", a.vectors, "also compute eigenvectors");
  }
  if (op == "rurv") sub->add_option("--rank", a.rank, "report the split at this rank");
}

int dispatch_op(const std::string& op, const Globals& g, const OpArgs& a) {
  if (op == "qr") return run_qr(g, a);
  if (op == "lu") return run_lu(g, a);
  if (op == "invert") return run_invert(g, a);
  if (op == "rurv") return run_rurv(g, a);
  if (op == "sylvester") return run_sylvester(g, a);
  if (op == "eig") return run_eig(g, a);
  return run_svd(g, a);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fastla: recursive dense linear algebra with stability instrumentation"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--engine,--mm", g.engine, "multiplication engine: conv, strassen or blocked");
  app.add_option("--cutoff", g.cutoff, "strassen leaf size or blocked tile edge");
  app.add_option("--precision", g.precision, "working or extended");
  app.add_option("--out,--report", g.out, "write the JSON report here instead of stdout");
  app.add_option("--out-dir", g.out_dir, "directory for output matrices");
  app.add_flag("--timings", g.timings, "include wall-clock timings in reports");

  const std::vector<std::string> ops = {"qr", "lu", "invert", "rurv", "sylvester", "eig", "svd"};
  OpArgs op_args;
  std::vector<std::pair<CLI::App*, std::string>> op_cmds;
  CLI::App* decompose = app.add_subcommand("decompose", "run one decomposition on matrix files");
  decompose->require_subcommand(1);
  for (const auto& op : ops) {
    CLI::App* sub = decompose->add_subcommand(op, op + " on matrix files");
    add_op_options(sub, op_args, op);
    op_cmds.emplace_back(sub, op);
  }
  for (const auto& op : {"invert", "sylvester", "eig", "svd", "rurv"}) {
    CLI::App* sub = app.add_subcommand(op, std::string("same as decompose ") + op);
    add_op_options(sub, op_args, op);
    op_cmds.emplace_back(sub, op);
  }

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "operation counts across sizes with a fitted exponent");
  bench->add_option("algorithm", bench_args.algo, "matmul, qrr, lur, block-lu, tri-inv, sylr, evecr or rurv")
      ->required();
  bench->add_option("--sizes", bench_args.sizes, "powers of two: 16,32,64 or 32..256");
  bench->add_option("--gamma", bench_args.gamma, "block-lu: multiplication exponent for the block size rule");
  bench->add_option("--block", bench_args.block, "block-lu: fixed block size (default sweeps powers of two)");
  bench->add_option("--format", bench_args.format, "csv or json on stdout");
  bench->add_option("--expect", bench_args.expect, "fail unless the fitted exponent is within --tol of this");
  bench->add_option("--tol", bench_args.tol, "tolerance for --expect");

  VerifyArgs verify_args;
  CLI::App* verify_cmd = app.add_subcommand("verify", "run a verification suite, or all of them");
  verify_cmd->add_option("suite", verify_args.suite, "suite name or all")->required();
  verify_cmd->add_flag("--quick", verify_args.quick, "smaller trial counts and sizes");
  verify_cmd->add_option("--n", verify_args.n, "override the matrix size");
  verify_cmd->add_option("--r", verify_args.r, "override the rank");
  verify_cmd->add_option("--trials", verify_args.trials, "override the trial count");

  ExperimentArgs exp_args;
  CLI::App* experiment = app.add_subcommand("experiment", "Monte Carlo experiments with CSV output");
  experiment->require_subcommand(1);
  CLI::App* fstat = experiment->add_subcommand("f-stat", "samples of sigma_min of a Haar leading block");
  fstat->add_option("--n", exp_args.n, "matrix size");
  fstat->add_option("--r", exp_args.r, "leading block size");
  fstat->add_option("--trials", exp_args.trials, "number of samples");
  fstat->add_option("--csv", exp_args.csv, "write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "fastla: " << e.what() << "\n";
    return kExitUsage;
  }
  g.command = command_echo(argc, argv);

  try {
    for (const auto& [sub, op] : op_cmds)
      if (sub->parsed()) return dispatch_op(op, g, op_args);
    if (bench->parsed()) return run_bench(g, bench_args);
    if (verify_cmd->parsed()) return run_verify(g, verify_args);
    if (fstat->parsed()) return run_fstat(g, exp_args);
  } catch (const UsageError& e) {
    std::cerr << "fastla: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "fastla: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "fastla: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DimensionError& e) {
    std::cerr << "fastla: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "fastla: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "fastla: " << e.what() << "\n";
    return kExitFail;
  }
  std::cerr << "fastla: no command\n";
  return kExitUsage;
}
