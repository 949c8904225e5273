#include "verify.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>

#include "fastla/baseline.hpp"
#include "fastla/eig.hpp"
#include "fastla/inverse.hpp"
#include "fastla/lu.hpp"
#include "fastla/matmul.hpp"
#include "fastla/norms.hpp"
#include "fastla/oracle.hpp"
#include "fastla/precision.hpp"
#include "fastla/qr.hpp"
#include "fastla/random.hpp"
#include "fastla/rurv.hpp"
#include "fastla/sylvester.hpp"

namespace fastla::verify {

using nlohmann::json;

void Checks::Gate::record(double value, double limit) {
  ++trials;
  const bool ok = value <= limit;
  if (!ok) ++failures;
  const double ratio = limit > 0.0 ? value / limit : (value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  if (trials == 1 || ratio > worst_ratio) {
    worst_ratio = ratio;
    worst_value = value;
    worst_limit = limit;
  }
}

void Checks::add(const std::string& name, bool ok, double value, double limit) {
  items_.push_back({{"name", name}, {"passed", ok}, {"value", value}, {"limit", limit}});
  ok_ = ok_ && ok;
}

void Checks::add(const std::string& name, bool ok) {
  items_.push_back({{"name", name}, {"passed", ok}});
  ok_ = ok_ && ok;
}

Checks::Gate& Checks::gate(const std::string& name) {
  for (auto& g : gates_)
    if (g.name == name) return g;
  gates_.push_back({name});
  return gates_.back();
}

bool Checks::passed() const {
  if (!ok_) return false;
  for (const auto& g : gates_)
    if (g.failures > 0 || g.trials == 0) return false;
  return true;
}

json Checks::to_json() const {
  json out = items_;
  for (const auto& g : gates_)
    out.push_back({{"name", g.name},
                   {"passed", g.failures == 0 && g.trials > 0},
                   {"trials", g.trials},
                   {"failures", g.failures},
                   {"worst_value", g.worst_value},
                   {"worst_limit", g.worst_limit},
                   {"worst_ratio", g.worst_ratio}});
  return out;
}

namespace {

constexpr double eps = kEps;

Matrix random_orthogonal(Index n, RngStream& rng) { return householder_qr(gaussian_matrix(n, n, rng).view()).Q; }

Matrix scale_cols(const Matrix& a, const std::vector<double>& s) {
  Matrix out(a);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out(i, j) *= s[j];
  return out;
}

// U diag(s) V^T with Haar-like U and V; V is returned for the RURV checks.
Matrix planted(const std::vector<double>& s, RngStream& rng, Matrix* v_out = nullptr) {
  const Index n = s.size();
  const Matrix u = random_orthogonal(n, rng);
  const Matrix v = random_orthogonal(n, rng);
  if (v_out) *v_out = v;
  return multiply(scale_cols(u, s).view(), v.transpose().view(), MmEngine::conventional());
}

std::vector<double> geometric_spectrum(Index n, double kappa) {
  std::vector<double> s(n);
  for (Index i = 0; i < n; ++i) s[i] = std::pow(kappa, -static_cast<double>(i) / static_cast<double>(n - 1));
  return s;
}

Matrix random_symmetric(Index n, RngStream& rng) {
  Matrix a = gaussian_matrix(n, n, rng);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j) a(i, j) = a(j, i);
  return a;
}

Matrix symmetric_from(const Matrix& q, const std::vector<double>& d) {
  Matrix h = multiply(scale_cols(q, d).view(), q.transpose().view(), MmEngine::conventional());
  for (Index i = 0; i < h.rows(); ++i)
    for (Index j = 0; j < i; ++j) h(i, j) = h(j, i);
  return h;
}

double forward_error(const Matrix& x, const MatrixDW& truth) {
  return dw_distance(x.view(), truth.view()) / frobenius_norm(narrow(truth.view()).view());
}

std::vector<Index> pow2_range(Index lo, Index hi) {
  std::vector<Index> out;
  for (Index n = lo; n <= hi; n *= 2) out.push_back(n);
  return out;
}

MmEngine strassen_for(const Options& o) { return MmEngine::strassen(o.cutoff); }

// Largest distance from a reference eigenvalue to its nearest unused
// computed one.
double match_spectra(std::vector<std::complex<double>> ref, std::vector<std::complex<double>> got) {
  if (ref.size() != got.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(got.size(), false);
  double worst = 0.0;
  for (const auto& z : ref) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    for (std::size_t k = 0; k < got.size(); ++k)
      if (!used[k] && std::abs(got[k] - z) < best) {
        best = std::abs(got[k] - z);
        bi = k;
      }
    used[bi] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

// ---------------------------------------------------------------- criterion 1

SuiteResult suite_matmul(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const std::vector<Index> sizes = pow2_range(16, 256);
  std::vector<double> sc, cc;
  json rows = json::array();
  for (Index n : sizes) {
    const Matrix a = gaussian_matrix(n, n, rng), b = gaussian_matrix(n, n, rng);
    OpCounter s, k;
    multiply(a.view(), b.view(), MmEngine::strassen(1, &s));
    multiply(a.view(), b.view(), MmEngine::conventional(&k));
    sc.push_back(static_cast<double>(s.scalar_mults));
    cc.push_back(static_cast<double>(k.scalar_mults));
    rows.push_back({{"n", n}, {"strassen_mults", s.scalar_mults}, {"conventional_mults", k.scalar_mults}});
  }
  const double es = fit_exponent(sizes, sc), ec = fit_exponent(sizes, cc);
  c.add("strassen exponent within 0.01 of log2(7)", std::fabs(es - std::log2(7.0)) <= 0.01,
        std::fabs(es - std::log2(7.0)), 0.01);
  c.add("conventional exponent within 0.01 of 3", std::fabs(ec - 3.0) <= 0.01, std::fabs(ec - 3.0), 0.01);
  return {"", 0, c.passed(),
          {{"checks", c.to_json()}, {"rows", rows}, {"strassen_exponent", es}, {"conventional_exponent", ec}}};
}

// ---------------------------------------------------------------- criterion 2

SuiteResult suite_cost(const Options& o) {
  Checks c;
  const std::vector<Index> sizes = pow2_range(64, o.quick ? 256 : 512);
  json fits = json::object();
  struct Case {
    const char* algo;
    const char* engine;
    MmEngine e;
    double target;
  };
  const Case cases[] = {{"qrr", "strassen", MmEngine::strassen(1), std::log2(7.0)},
                        {"qrr", "conventional", MmEngine::conventional(), 3.0},
                        {"lur", "strassen", MmEngine::strassen(1), std::log2(7.0)},
                        {"lur", "conventional", MmEngine::conventional(), 3.0}};
  for (const Case& k : cases) {
    std::vector<double> counts;
    for (Index n : sizes) {
      RngStream rng(o.seed ^ n);
      const Matrix a = gaussian_matrix(n, n, rng);
      OpCounter ops;
      if (std::string(k.algo) == "qrr") {
        qrr(a.view(), k.e.with_counter(&ops), {8, false});
      } else {
        LurConfig cfg;
        cfg.compute_report = false;
        lur(a.view(), k.e.with_counter(&ops), cfg);
      }
      counts.push_back(static_cast<double>(ops.scalar_mults));
    }
    const double slope = fit_exponent(sizes, counts);
    const std::string name = std::string(k.algo) + " " + k.engine;
    fits[name] = {{"exponent", slope}, {"target", k.target}, {"mults", counts}};
    c.add(name + " exponent within 0.15", std::fabs(slope - k.target) <= 0.15, std::fabs(slope - k.target), 0.15);
  }
  return {"", 0, c.passed(), {{"checks", c.to_json()}, {"fits", fits}, {"sizes", sizes}}};
}

// ---------------------------------------------------------------- criterion 3

SuiteResult suite_block_lu(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  // gamma is the fitted exponent of the engine that block_lu runs on.
  std::vector<Index> msizes = pow2_range(16, 256);
  std::vector<double> mcounts;
  for (Index n : msizes) {
    OpCounter ops;
    const Matrix a = gaussian_matrix(n, n, rng);
    multiply(a.view(), a.view(), MmEngine::strassen(1, &ops));
    mcounts.push_back(static_cast<double>(ops.scalar_mults));
  }
  const double gamma = fit_exponent(msizes, mcounts);

  // Cost is the multiplication count, as in the other exponent checks. Block
  // sizes sweep the powers of two: other sizes leave a fringe that the
  // rectangular Strassen tiling does conventionally, which the model does not
  // describe. The recommended size is still measured and reported.
  const std::vector<Index> ns = o.quick ? std::vector<Index>{128, 256} : std::vector<Index>{128, 256, 512};
  struct Row {
    Index n, b;
    double mults, residual;
  };
  std::vector<Row> rows;
  json recommended = json::array();
  for (Index n : ns) {
    const Matrix a = gaussian_matrix(n, n, rng);
    for (Index b : pow2_range(1, n / 2)) {
      OpCounter ops;
      const LuFactors f = block_lu(a.view(), {b, gamma}, MmEngine::strassen(1, &ops));
      rows.push_back({n, b, static_cast<double>(ops.scalar_mults), lu_residual(a.view(), f)});
    }
    const Index rec = BlockConfig::recommended(n, gamma);
    OpCounter ops;
    const LuFactors f = block_lu(a.view(), {rec, gamma}, MmEngine::strassen(1, &ops));
    recommended.push_back({{"n", n}, {"b", rec}, {"mults", ops.scalar_mults}, {"residual", lu_residual(a.view(), f)}});
  }

  // Least squares for c1, c2 in mults ~ c1 n^2 b + c2 n^3 b^{gamma-3}, in
  // relative terms so every row weighs the same.
  double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
  for (const Row& r : rows) {
    const double n = static_cast<double>(r.n), b = static_cast<double>(r.b);
    const double x1 = n * n * b / r.mults, x2 = n * n * n * std::pow(b, gamma - 3.0) / r.mults;
    s11 += x1 * x1;
    s12 += x1 * x2;
    s22 += x2 * x2;
    t1 += x1;
    t2 += x2;
  }
  const double det = s11 * s22 - s12 * s12;
  const double c1 = (t1 * s22 - t2 * s12) / det, c2 = (s11 * t2 - s12 * t1) / det;
  json jrows = json::array();
  auto& fit_gate = c.gate("two-term model within 20% of measured mults");
  for (const Row& r : rows) {
    const double n = static_cast<double>(r.n), b = static_cast<double>(r.b);
    const double model = c1 * n * n * b + c2 * n * n * n * std::pow(b, gamma - 3.0);
    fit_gate.record(std::fabs(model - r.mults) / r.mults, 0.2);
    jrows.push_back({{"n", r.n}, {"b", r.b}, {"mults", r.mults}, {"model", model}, {"residual", r.residual}});
  }
  json minima = json::array();
  auto& min_gate = c.gate("cost-minimizing b within x2 of n^(1/(4-gamma))");
  for (Index n : ns) {
    const Row* best = nullptr;
    for (const Row& r : rows)
      if (r.n == n && (!best || r.mults < best->mults)) best = &r;
    const double predicted = std::pow(static_cast<double>(n), 1.0 / (4.0 - gamma));
    const double factor = std::max(static_cast<double>(best->b) / predicted, predicted / static_cast<double>(best->b));
    // Minimizer of the fitted model itself, for comparison.
    const double model_best = std::pow((3.0 - gamma) * c2 / c1 * static_cast<double>(n), 1.0 / (4.0 - gamma));
    min_gate.record(factor, 2.0);
    minima.push_back({{"n", n},
                      {"b_best", best->b},
                      {"b_predicted", predicted},
                      {"b_model_minimizer", model_best},
                      {"factor", factor}});
  }
  return {"",
          0,
          c.passed(),
          {{"checks", c.to_json()},
           {"gamma", gamma},
           {"c1", c1},
           {"c2", c2},
           {"rows", jrows},
           {"recommended", recommended},
           {"minima", minima}}};
}

// ---------------------------------------------------------------- criterion 4

SuiteResult suite_qr(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const std::vector<Index> ns = o.n ? std::vector<Index>{*o.n} : std::vector<Index>{16, 64, 128};
  const Index trials = o.trials.value_or(o.quick ? 10 : 100);
  for (Index n : ns)
    for (int which = 0; which < 2; ++which) {
      const MmEngine e = which == 0 ? MmEngine::conventional() : strassen_for(o);
      const double limit = (which == 0 ? 1e3 : 1e4) * static_cast<double>(n * n) * eps;
      const std::string tag = std::string(which == 0 ? "conventional" : "strassen") + " n=" + std::to_string(n);
      auto& res = c.gate("residual " + tag);
      auto& orth = c.gate("orthogonality " + tag);
      for (Index t = 0; t < trials; ++t) {
        const Matrix a = gaussian_matrix(n, n, rng);
        const QrResult r = qrr(a.view(), e);
        res.record(r.report.residual, limit);
        orth.record(r.report.orth_defect, limit);
      }
    }
  return {"", 0, c.passed(), {{"checks", c.to_json()}, {"trials", trials}, {"cutoff", o.cutoff}}};
}

// ---------------------------------------------------------------- criterion 5

SuiteResult suite_lu(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const std::vector<Index> ns = o.n ? std::vector<Index>{*o.n} : std::vector<Index>{16, 64, 128};
  const Index trials = o.trials.value_or(o.quick ? 10 : 100);
  double worst_growth = 0.0;
  for (Index n : ns)
    for (int which = 0; which < 2; ++which) {
      const MmEngine e = which == 0 ? MmEngine::conventional() : strassen_for(o);
      auto& g = c.gate(std::string("residual ") + (which == 0 ? "conventional" : "strassen") +
                       " n=" + std::to_string(n));
      for (Index t = 0; t < trials; ++t) {
        const Matrix a = gaussian_matrix(n, n, rng);
        const LuResult f = lur(a.view(), e);
        worst_growth = std::max(worst_growth, f.growth);
        // Relative residual against 1e3 n^2 eps g.
        g.record(f.report.residual, 1e3 * static_cast<double>(n * n) * eps * f.growth);
      }
    }
  const Index pivot_trials = o.quick ? 50 : 200;
  Index mismatches = 0;
  for (Index t = 0; t < pivot_trials; ++t) {
    const Matrix a = gaussian_matrix(16, 16, rng);
    LurConfig cfg;
    cfg.panel_cutoff = 1;
    cfg.compute_report = false;
    if (lur(a.view(), MmEngine::conventional(), cfg).perm != gepp_lu(a.view()).perm) ++mismatches;
  }
  c.add("pivot sequence equals gepp_lu on 16x16", mismatches == 0, static_cast<double>(mismatches), 0.0);
  return {"",
          0,
          c.passed(),
          {{"checks", c.to_json()}, {"trials", trials}, {"pivot_trials", pivot_trials}, {"max_growth", worst_growth}}};
}

// ---------------------------------------------------------------- criterion 6

SuiteResult suite_colscale(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const Index n = 64;
  Matrix a = gaussian_matrix(n, n, rng);
  // Thue-Morse scale pattern: every Strassen split pairs large and small
  // columns, so the sums in the recursion mix scales 1e9 apart.
  std::vector<bool> big(n);
  for (Index j = 0; j < n; ++j) big[j] = std::popcount(j) % 2 == 0;
  for (Index j = 0; j < n; ++j)
    if (big[j])
      for (Index i = 0; i < n; ++i) a(i, j) *= 1e9;
  const MmEngine e = MmEngine::strassen(4);
  const QrResult plain = qrr(a.view(), e);
  const QrResult wrapped = columnwise_scale_wrap(a.view(), [&](const ConstMatrixRef& x) { return qrr(x, e); });
  const auto rp = columnwise_residuals(a.view(), plain);
  const auto rw = columnwise_residuals(a.view(), wrapped);
  double worst_plain = 0, worst_wrapped = 0;
  for (Index j = 0; j < n; ++j) {
    if (big[j]) continue;
    worst_plain = std::max(worst_plain, rp[j]);
    worst_wrapped = std::max(worst_wrapped, rw[j]);
  }
  const double factor = worst_wrapped > 0.0 ? worst_plain / worst_wrapped : std::numeric_limits<double>::infinity();
  c.add("small-column residual improvement factor >= 1e4", factor >= 1e4, factor, 1e4);
  return {"",
          0,
          c.passed(),
          {{"checks", c.to_json()}, {"worst_plain", worst_plain}, {"worst_wrapped", worst_wrapped}}};
}

// ---------------------------------------------------------------- criterion 7

SuiteResult suite_inverse(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const Index n = o.n.value_or(64);
  json rows = json::array();
  for (double kappa : {1e1, 1e2, 1e3, 1e4}) {
    const Matrix t = householder_qr(planted(geometric_spectrum(n, kappa), rng).view()).R;
    const Matrix h = symmetric_from(random_orthogonal(n, rng), geometric_spectrum(n, kappa));
    const MatrixDW t_truth = dw_tri_inverse(t.view());
    const MatrixDW h_truth = dw_spd_inverse(h.view());
    for (int which = 0; which < 2; ++which) {
      const MmEngine e = which == 0 ? MmEngine::conventional() : strassen_for(o);
      const char* ename = which == 0 ? "conventional" : "strassen";
      const double ext_limit = 1e3 * static_cast<double>(n * n) * eps * kappa;

      const InvResult tw = tri_inv(t.view(), e);
      const InvResult tx = tri_inv(t.view(), e, Precision::extended);
      const InvResult sw = spd_inv(h.view(), e);
      const InvResult sx = spd_inv(h.view(), e, Precision::extended);
      const double etw = forward_error(tw.X, t_truth), etx = forward_error(tx.X, t_truth);
      const double esw = forward_error(sw.X, h_truth), esx = forward_error(sx.X, h_truth);
      c.gate("tri working error <= predicted bound").record(etw, tw.report.predicted_bound);
      c.gate("spd working error <= predicted bound").record(esw, sw.report.predicted_bound);
      c.gate("tri extended error <= 1e3 n^2 eps kappa").record(etx, ext_limit);
      c.gate("spd extended error <= 1e3 n^2 eps kappa").record(esx, ext_limit);
      rows.push_back({{"kappa", kappa},
                      {"engine", ename},
                      {"tri_working", etw},
                      {"tri_bound", tw.report.predicted_bound},
                      {"tri_extended", etx},
                      {"spd_working", esw},
                      {"spd_bound", sw.report.predicted_bound},
                      {"spd_extended", esx}});
    }
  }
  return {"", 0, c.passed(), {{"checks", c.to_json()}, {"n", n}, {"rows", rows}}};
}

// ---------------------------------------------------------------- criterion 8

SuiteResult suite_embedding(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const Inverter by_tri = [](const ConstMatrixRef& m) { return tri_inv(m, {}, Precision::working, false).X; };
  const Inverter by_gen = [](const ConstMatrixRef& m) { return gen_inv(m, {}, Precision::working, false).X; };
  const Index trials = o.trials.value_or(100);
  auto& g = c.gate("embedded product within 1e4 eps ||A|| ||B||");
  for (Index t = 0; t < trials; ++t) {
    const Index p = 1 + t % 32, q = 1 + (7 * t) % 32, r = 1 + (13 * t) % 32;
    const Matrix x = gaussian_matrix(p, q, rng), y = gaussian_matrix(q, r, rng);
    const Matrix ref = multiply(x.view(), y.view(), MmEngine::conventional());
    const Matrix got = theorem1_embedding(x.view(), y.view(), t % 2 ? by_gen : by_tri);
    const double scale = frobenius_norm(x.view()) * frobenius_norm(y.view());
    g.record(frobenius_distance(got.view(), ref.view()) / (eps * scale), 1e4);
  }
  return {"", 0, c.passed(), {{"checks", c.to_json()}, {"trials", trials}}};
}

// ---------------------------------------------------------------- criterion 9

SuiteResult suite_rurv(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const Index recon_trials = o.quick ? 5 : 20;
  for (Index n : {16, 64, 128})
    for (int which = 0; which < 2; ++which) {
      const MmEngine e = which == 0 ? MmEngine::conventional() : strassen_for(o);
      auto& g = c.gate("reconstruction <= 1e3 n^2 eps");
      for (Index t = 0; t < recon_trials; ++t) {
        const Matrix a = gaussian_matrix(n, n, rng);
        g.record(rurv(a.view(), rng, e).report.residual, 1e3 * static_cast<double>(n * n) * eps);
      }
    }

  // Planted spectrum: r leading values in [0.5, 1], then a 1e6 gap.
  const Index n = 64, r = o.r.value_or(8);
  std::vector<double> sigma(n);
  for (Index i = 0; i < n; ++i)
    sigma[i] = i < r ? std::pow(0.5, static_cast<double>(i) / static_cast<double>(r - 1 ? r - 1 : 1))
                     : 0.5e-6 * std::pow(0.9, static_cast<double>(i - r));
  const Index seeds = o.quick ? 10 : 50;
  Index not_applicable = 0;
  double min_f = std::numeric_limits<double>::infinity();
  for (Index s = 0; s < seeds; ++s) {
    RngStream local = rng.substream(1000 + s);
    Matrix v;
    const Matrix a = planted(sigma, local, &v);
    const UrvResult u = rurv(a.view(), local);
    const RankRevealReport rep = rank_reveal_report(u, r, &sigma, &v);
    min_f = std::min(min_f, *rep.f);
    c.gate("f sigma_r <= sigma_min(R11)").record(*rep.f * sigma[r - 1], rep.sigma_min_leading * (1 + 1e-6));
    c.gate("sigma_min(R11) <= sqrt(2) sigma_r").record(rep.sigma_min_leading, std::sqrt(2.0) * sigma[r - 1]);
    if (!rep.trailing_bound_check) {
      ++not_applicable;
      c.gate("trailing block bound").record(1.0, 0.0);
    } else {
      c.gate("trailing block bound").record(rep.sigma_max_trailing, *rep.trailing_bound);
    }
  }

  const Index probe_seeds = o.quick ? 20 : 100;
  Index probe_ok = 0;
  std::vector<double> exact(32, 0.0);
  for (Index i = 0; i < 5; ++i) exact[i] = 1.0 - 0.1 * static_cast<double>(i);
  for (Index s = 0; s < probe_seeds; ++s) {
    RngStream local = rng.substream(5000 + s);
    const Matrix a = planted(exact, local);
    if (exact_rank_probe(a.view(), local) == 5) ++probe_ok;
  }
  c.add("exact_rank_probe recovers planted rank 5 on every seed", probe_ok == probe_seeds,
        static_cast<double>(probe_ok), static_cast<double>(probe_seeds));
  return {"",
          0,
          c.passed(),
          {{"checks", c.to_json()},
           {"planted_seeds", seeds},
           {"r", r},
           {"min_f", min_f},
           {"trailing_not_applicable", not_applicable}}};
}

// --------------------------------------------------------------- criterion 10

SuiteResult suite_fstat(const Options& o) {
  Checks c;
  const Index trials = o.trials.value_or(500);
  std::vector<std::pair<Index, Index>> cases = {{32, 16}, {64, 32}};
  if (o.n) cases = {{*o.n, o.r.value_or(*o.n / 2)}};
  json rows = json::array();
  for (const auto& [n, r] : cases) {
    const RngStream rng = RngStream(o.seed).substream(n * 1000 + r);
    const FStatSummary s = f_statistic_experiment(n, r, trials, rng, o.threads);
    c.add("Pr[f < 1/(r^2 sqrt n)] <= 0.25 at n=" + std::to_string(n) + " r=" + std::to_string(r),
          s.prob_below_a_one <= 0.25, s.prob_below_a_one, 0.25);
    rows.push_back({{"n", n},
                    {"r", r},
                    {"trials", trials},
                    {"median", s.median},
                    {"prob_below_r2_sqrt_n", s.prob_below_a_one},
                    {"prob_below_r15_sqrt_n", s.prob_below_a_half}});
  }
  return {"", 0, c.passed(), {{"checks", c.to_json()}, {"rows", rows}}};
}

// --------------------------------------------------------------- criterion 11

Matrix random_tri(Index n, double lo, double off, RngStream& rng) {
  Matrix t(n, n);
  for (Index i = 0; i < n; ++i) {
    t(i, i) = lo + rng.next_uniform();
    for (Index j = i + 1; j < n; ++j) t(i, j) = off * rng.next_gaussian();
  }
  return t;
}

SuiteResult suite_sylvester(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const Index step = o.quick ? 3 : 1;
  auto& grid = c.gate("grid n,m <= 16: difference vs Kronecker solve");
  for (Index n = 1; n <= 16; n += step)
    for (Index m = 1; m <= 16; m += step) {
      const SylvesterProblem p{random_tri(n, 3.0, 0.3, rng), random_tri(m, -2.0, 0.3, rng),
                               gaussian_matrix(n, m, rng)};
      const MatrixDW truth = kronecker_sylvester(p.A.view(), p.B.view(), p.C.view());
      const double sep = sep_estimate(p.A.view(), p.B.view()).value;
      const double tol = 1e3 * eps * (frobenius_norm(p.A.view()) + frobenius_norm(p.B.view())) / sep;
      for (const MmEngine& e : {MmEngine::conventional(), MmEngine::strassen(1)})
        grid.record(forward_error(sylr(p, e).R, truth), tol);
    }

  const Index big_trials = o.trials.value_or(o.quick ? 3 : 100);
  auto& big = c.gate("random 64x64 with sep >= 1: difference vs oracle");
  auto& sep_gate = c.gate("random 64x64 problems have sep >= 1");
  double min_sep = std::numeric_limits<double>::infinity();
  for (Index t = 0; t < big_trials; ++t) {
    const SylvesterProblem p{random_tri(64, 3.0, 0.05, rng), random_tri(64, -2.0, 0.05, rng),
                             gaussian_matrix(64, 64, rng)};
    const double sep = sep_estimate(p.A.view(), p.B.view()).value;
    min_sep = std::min(min_sep, sep);
    sep_gate.record(1.0 / sep, 1.0);
    const MatrixDW truth = conventional_sylvester_dw(p.A.view(), p.B.view(), p.C.view());
    const double tol = 1e3 * eps * (frobenius_norm(p.A.view()) + frobenius_norm(p.B.view())) / sep;
    big.record(forward_error(sylr(p, t % 2 ? strassen_for(o) : MmEngine::conventional()).R, truth), tol);
  }

  const Index mono_trials = o.quick ? 1 : 3;
  auto& mono = c.gate("subproblem sep >= parent sep on every split of 8x8");
  for (Index t = 0; t < mono_trials; ++t) {
    const Matrix a = random_tri(8, 0.0, 1.0, rng), b = random_tri(8, 0.2, 1.0, rng);
    const double parent = sep_estimate(a.view(), b.view()).value;
    for (Index i = 1; i < 8; ++i)
      for (Index j = 1; j < 8; ++j) {
        const ConstMatrixRef as[2] = {a.block(0, 0, i, i), a.block(i, i, 8 - i, 8 - i)};
        const ConstMatrixRef bs[2] = {b.block(0, 0, j, j), b.block(j, j, 8 - j, 8 - j)};
        for (const auto& x : as)
          for (const auto& y : bs) mono.record(parent - sep_estimate(x, y).value, 1e-10 * parent);
      }
  }
  return {"", 0, c.passed(), {{"checks", c.to_json()}, {"big_trials", big_trials}, {"min_sep", min_sep}}};
}

// --------------------------------------------------------------- criterion 12

// X diag(lambda) X^{-1} with X a mild perturbation of an orthogonal matrix.
Matrix similar_to_diag(const std::vector<double>& lambda, RngStream& rng) {
  const Index n = lambda.size();
  Matrix x = random_orthogonal(n, rng);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) x(i, j) += 0.1 * rng.next_gaussian() / std::sqrt(static_cast<double>(n));
  const Matrix xi = solve_linear(x.view(), Matrix::identity(n).view());
  return multiply(scale_cols(x, lambda).view(), xi.view(), MmEngine::conventional());
}

// Q blockdiag([[a, b], [-b, a]], ...) Q^T, plus a 1x1 block when n is odd.
Matrix normal_with_pairs(Index n, RngStream& rng, std::vector<std::complex<double>>& ev) {
  Matrix d(n, n);
  ev.clear();
  Index i = 0;
  for (; i + 1 < n; i += 2) {
    const double re = -3.0 + 6.0 * rng.next_uniform(), im = 0.2 + rng.next_uniform();
    d(i, i) = d(i + 1, i + 1) = re;
    d(i, i + 1) = im;
    d(i + 1, i) = -im;
    ev.emplace_back(re, im);
    ev.emplace_back(re, -im);
  }
  if (i < n) {
    d(i, i) = -3.0 + 6.0 * rng.next_uniform();
    ev.emplace_back(d(i, i), 0.0);
  }
  const Matrix q = random_orthogonal(n, rng);
  return multiply(multiply(q.view(), d.view()).view(), q.transpose().view(), MmEngine::conventional());
}

SuiteResult suite_schur(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const std::vector<Index> ns = o.n ? std::vector<Index>{*o.n}
                                    : (o.quick ? std::vector<Index>{16, 32} : std::vector<Index>{16, 32, 64});
  json rows = json::array();
  Index flagged = 0;
  auto run = [&](const std::string& kind, const Matrix& a, const std::vector<std::complex<double>>& ref) {
    const Index n = a.rows();
    const SchurResult s = schur_dandc(a.view(), rng);
    const double anorm = frobenius_norm(a.view());
    const Matrix back = multiply(multiply(s.Q.view(), s.T.view()).view(), s.Q.transpose().view());
    const double residual = frobenius_distance(back.view(), a.view());
    const double splits = static_cast<double>(std::max<Index>(s.accepted_splits(), 1));
    c.gate("||A - Q T Q^T||_F <= 10 #splits split_tol ||A||_F")
        .record(residual, 10.0 * splits * s.split_tol * anorm);
    c.gate("||Q^T Q - I|| <= 1e3 n^2 eps")
        .record(orthogonality_defect(s.Q.view()), 1e3 * static_cast<double>(n * n) * eps);
    c.gate("T is quasi-upper-triangular").record(is_quasi_upper_triangular(s.T.view()) ? 0.0 : 1.0, 0.0);
    const double ev_err = match_spectra(ref, schur_eigenvalues(s.T.view()));
    c.gate("eigenvalues within 1e4 eps ||A||").record(ev_err, 1e4 * eps * anorm);
    if (!s.flags.empty()) ++flagged;
    rows.push_back({{"kind", kind},
                    {"n", n},
                    {"splits", s.accepted_splits()},
                    {"residual", residual / anorm},
                    {"eigenvalue_error", ev_err / anorm},
                    {"flags", s.flags}});
  };
  for (Index n : ns) {
    const Matrix sym = random_symmetric(n, rng);
    std::vector<std::complex<double>> ref;
    for (double v : jacobi_eigh(sym.view()).values) ref.emplace_back(v, 0.0);
    run("symmetric", sym, ref);

    std::vector<std::complex<double>> nev;
    const Matrix nrm = normal_with_pairs(n, rng, nev);
    run("normal", nrm, nev);

    std::vector<double> lambda(n);
    for (Index i = 0; i < n; ++i) lambda[i] = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    std::vector<std::complex<double>> pev;
    for (double v : lambda) pev.emplace_back(v, 0.0);
    run("planted", similar_to_diag(lambda, rng), pev);
  }

  // NormA21 recurrence on integer matrices, where every sum is exact.
  bool exact = true;
  for (Index n : {2, 5, 17, 64}) {
    Matrix a(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) a(i, j) = std::round(100.0 * rng.next_gaussian());
    const std::vector<double> p = norm_a21_profile(a.view());
    for (Index i = 0; i + 1 < n; ++i) {
      double direct = 0.0;
      for (Index j = i + 1; j < n; ++j)
        for (Index k = 0; k <= i; ++k) direct += std::fabs(a(j, k));
      exact = exact && p[i] == direct;
    }
  }
  c.add("NormA21 recurrence equals direct summation exactly", exact);
  return {"", 0, c.passed(), {{"checks", c.to_json()}, {"rows", rows}, {"flagged_runs", flagged}}};
}

// --------------------------------------------------------------- criterion 13

SuiteResult suite_symeig_svd(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const std::vector<Index> ns = o.n ? std::vector<Index>{*o.n}
                                    : (o.quick ? std::vector<Index>{16, 32} : std::vector<Index>{16, 32, 64});
  json rows = json::array();
  for (Index n : ns) {
    const Matrix a = random_symmetric(n, rng);
    const double an = frobenius_norm(a.view());
    const SymEigResult e = symmetric_eig(a.view(), rng);
    const EighResult ref = jacobi_eigh(a.view());
    double ev_err = 0.0;
    for (Index i = 0; i < n; ++i) ev_err = std::max(ev_err, std::fabs(e.values[i] - ref.values[i]));
    c.gate("symmetric eigenvalues within 1e4 eps ||A||").record(ev_err, 1e4 * eps * an);
    const Matrix qlq = multiply(scale_cols(e.Q, e.values).view(), e.Q.transpose().view());
    const double eig_res = frobenius_distance(qlq.view(), a.view()) / an;

    const Matrix g = gaussian_matrix(n, n, rng);
    const double gn = frobenius_norm(g.view());
    const GramSvdResult s = svd_via_gram(g.view(), rng);
    const std::vector<double> sv = singular_values(g.view());
    double sv_err = 0.0;
    for (Index i = 0; i < n; ++i) sv_err = std::max(sv_err, std::fabs(s.s[i] - sv[i]));
    c.gate("singular values within 1e4 eps ||A||").record(sv_err, 1e4 * eps * gn);
    const Matrix usv = multiply(scale_cols(s.U, s.s).view(), s.V.transpose().view());
    const double svd_res = frobenius_distance(usv.view(), g.view());
    c.gate("||A - U S V^T|| <= 1e4 eps ||A||").record(svd_res, 1e4 * eps * gn);
    rows.push_back({{"n", n},
                    {"eig_value_error", ev_err / an},
                    {"eig_residual", eig_res},
                    {"eig_flags", e.flags},
                    {"svd_value_error", sv_err / gn},
                    {"svd_residual", svd_res / gn},
                    {"svd_flags", s.flags}});
  }
  return {"", 0, c.passed(), {{"checks", c.to_json()}, {"rows", rows}}};
}

// --------------------------------------------------------------- criterion 14

Matrix separated_triangular(Index n, RngStream& rng) {
  Matrix t(n, n);
  for (Index i = 0; i < n; ++i) {
    t(i, i) = 4.0 * static_cast<double>(i) / static_cast<double>(n) + 0.1 * rng.next_uniform();
    for (Index j = i + 1; j < n; ++j) t(i, j) = 0.1 * rng.next_gaussian();
  }
  return t;
}

SuiteResult suite_evecr(const Options& o) {
  Checks c;
  RngStream rng(o.seed);
  const std::vector<Index> ns = o.n ? std::vector<Index>{*o.n}
                                    : (o.quick ? std::vector<Index>{16, 32} : std::vector<Index>{16, 32, 64});
  json rows = json::array();
  for (Index n : ns) {
    const Matrix t = separated_triangular(n, rng);
    const double tn = frobenius_norm(t.view());
    const EvecResult e = evecr(t.view(), strassen_for(o));
    double worst = 0.0;
    for (double r : evec_residuals(t.view(), e.V.view())) {
      worst = std::max(worst, r / tn);
      c.gate("per-vector residual <= predicted_evec_bound").record(r / tn, e.err.predicted_evec_bound);
    }
    rows.push_back({{"n", n},
                    {"worst_residual", worst},
                    {"s_floor", e.err.s_floor},
                    {"predicted_bound", e.err.predicted_evec_bound}});
  }

  const std::vector<Index> sizes = pow2_range(64, o.quick ? 256 : 512);
  json fits = json::object();
  for (int which = 0; which < 2; ++which) {
    const MmEngine base = which == 0 ? MmEngine::conventional() : MmEngine::strassen(1);
    const char* name = which == 0 ? "conventional" : "strassen";
    std::vector<double> ecounts, mcounts;
    for (Index n : sizes) {
      RngStream local(o.seed ^ n);
      Matrix t(n, n);
      for (Index i = 0; i < n; ++i) {
        t(i, i) = static_cast<double>(i) + 1.0;
        for (Index j = i + 1; j < n; ++j) t(i, j) = local.next_gaussian();
      }
      OpCounter ev, mm;
      EvecConfig cfg;
      cfg.compute_sep = false;
      evecr(t.view(), base.with_counter(&ev), cfg);
      multiply(t.view(), t.view(), base.with_counter(&mm));
      ecounts.push_back(static_cast<double>(ev.scalar_mults));
      mcounts.push_back(static_cast<double>(mm.scalar_mults));
    }
    const double ee = fit_exponent(sizes, ecounts), me = fit_exponent(sizes, mcounts);
    c.add(std::string("evecr exponent within 0.15 of the ") + name + " engine's", std::fabs(ee - me) <= 0.15,
          std::fabs(ee - me), 0.15);
    fits[name] = {{"evecr_exponent", ee}, {"engine_exponent", me}};
  }
  return {"", 0, c.passed(), {{"checks", c.to_json()}, {"rows", rows}, {"fits", fits}, {"sizes", sizes}}};
}

}  // namespace

const std::vector<SuiteInfo>& suites() {
  static const std::vector<SuiteInfo> all = {
      {"matmul", 1, "Strassen and conventional multiplication count exponents", suite_matmul},
      {"cost", 2, "qrr and lur count exponents inherit the engine exponent", suite_cost},
      {"block-lu", 3, "blocked LU two-term cost model and optimal block size", suite_block_lu},
      {"qr", 4, "qrr backward stability over random trials", suite_qr},
      {"lu", 5, "lur growth-scaled residuals and pivot agreement with GEPP", suite_lu},
      {"colscale", 6, "column scaling against planted 1e9 column scales", suite_colscale},
      {"inverse", 7, "triangular and SPD inversion forward errors", suite_inverse},
      {"embedding", 8, "products extracted from the inverse of a block embedding", suite_embedding},
      {"rurv", 9, "RURV reconstruction, planted-gap bounds and exact rank probe", suite_rurv},
      {"rurv-fstat", 10, "Monte Carlo tail of the f statistic", suite_fstat},
      {"sylvester", 11, "SylR against Kronecker and column-substitution oracles", suite_sylvester},
      {"schur", 12, "Schur divide and conquer residuals and spectra", suite_schur},
      {"symeig-svd", 13, "symmetric eigensolver and Gram SVD against Jacobi", suite_symeig_svd},
      {"evecr", 14, "eigenvector residuals and cost exponent", suite_evecr},
  };
  return all;
}

const SuiteInfo* find_suite(std::string_view name) {
  for (const auto& s : suites())
    if (s.name == name) return &s;
  return nullptr;
}

SuiteResult run_suite(const SuiteInfo& s, const Options& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r;
  try {
    r = s.run(opts);
  } catch (const std::exception& e) {
    r.passed = false;
    r.details = {{"error", e.what()}};
  }
  r.name = s.name;
  r.criterion = s.criterion;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace fastla::verify
