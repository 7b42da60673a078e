#ifndef CMAVG_ASYMPTOTIC_HPP
#define CMAVG_ASYMPTOTIC_HPP

// The average-order side: coefficient table g(k), logarithmic integral,
// truncated constant c_E with a quantified error budget, partial-sum
// aggregation over the record stream, and the verdicts for the two
// theorems and the pi_E(x;k) << x/k^2 envelope.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmavg/curve.hpp"
#include "cmavg/division.hpp"
#include "cmavg/factor.hpp"
#include "cmavg/modmath.hpp"
#include "cmavg/sieve.hpp"

namespace cmavg {

// g(k) = sum_{dm=k} mu(d)/m, held exactly. Equivalent closed form used for
// construction: g(k) = (sum_{d|k} d mu(d)) / k.
struct CoefficientTable {
  u32 K = 0;
  std::vector<Rational> g;  // g[k], index 0 unused

  Rational at(u32 k) const { return g.at(k); }
};

inline CoefficientTable coefficient_table(u32 K) {
  if (K < 1) throw std::invalid_argument("coefficient_table: K must be >= 1");
  ArithmeticFunctionTable t = build_arithmetic_tables(K);
  CoefficientTable ct;
  ct.K = K;
  ct.g.assign(K + 1, Rational());
  for (u32 k = 1; k <= K; ++k) {
    i64 s = 0;
    for (u32 d = 1; d * d <= k; ++d) {
      if (k % d != 0) continue;
      u32 d2 = k / d;
      s += static_cast<i64>(t.mu[d]) * d;
      if (d != d2) s += static_cast<i64>(t.mu[d2]) * d2;
    }
    ct.g[k] = Rational(s, static_cast<i64>(k));
    if (!(ct.g[k].abs() <= Rational(1, 1)))
      throw std::logic_error("coefficient_table: |g(k)| > 1 at k=" + std::to_string(k));
  }
  if (!(ct.g[1] == Rational(1, 1))) throw std::logic_error("coefficient_table: g(1) != 1");
  return ct;
}

namespace detail {

inline double li_integrand(double t) { return 1.0 / std::log(t); }

inline double li_simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double li_adaptive(double a, double b, double fa, double fm, double fb, double whole, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = li_integrand(lm), frm = li_integrand(rm);
  double left = li_simpson(a, m, fa, flm, fm);
  double right = li_simpson(m, b, fm, frm, fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return li_adaptive(a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         li_adaptive(m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

// Li(y) = integral from 2 to y of dt/log t, adaptive Simpson, relative
// error below 1e-9.
inline double li_of(double y) {
  if (y < 4.0) throw std::invalid_argument("li_of: y must be >= 4");
  double a = 2.0, b = y;
  double fa = detail::li_integrand(a), fb = detail::li_integrand(b);
  double m = 0.5 * (a + b), fm = detail::li_integrand(m);
  double crude = detail::li_simpson(a, b, fa, fm, fb);
  double eps = 1e-10 * std::max(1.0, std::abs(crude));
  return detail::li_adaptive(a, b, fa, fm, fb, crude, eps, 80);
}

struct CETruncation {
  double value = 0.0;
  double sigma_stat = 0.0;   // propagated statistical uncertainty
  double tail_bound = 0.0;   // Lemma-style envelope on the omitted k > K
  double envelope_c = 0.0;   // measured constant c with n_k >= c phi(k)^2
  u32 K = 0;
  std::vector<double> terms;  // g(k)/n_k contributions, index 0 unused
};

// Truncated c_E = sum_{k<=K} g(k)/n_k. Exact degrees go in for k <= 2, the
// statistical estimates beyond; the omitted tail is bounded through the
// measured envelope n_k >= c phi(k)^2.
inline CETruncation c_E_truncated(const CurveSpec& curve, u32 K,
                                  const std::vector<DivisionFieldEstimate>& estimates) {
  if (K < 1) throw std::invalid_argument("c_E_truncated: K must be >= 1");
  CoefficientTable ct = coefficient_table(K);
  std::vector<const DivisionFieldEstimate*> byk(K + 1, nullptr);
  for (const auto& e : estimates)
    if (e.k <= K) byk[e.k] = &e;
  DivisionFieldEstimate n2 = n2_exact(curve);

  CETruncation out;
  out.K = K;
  out.terms.assign(K + 1, 0.0);
  double var = 0.0;
  std::string missing;
  for (u32 k = 1; k <= K; ++k) {
    double gk = ct.at(k).value();
    double inv_nk, sig_inv = 0.0;
    if (k == 1) {
      inv_nk = 1.0;
    } else if (k == 2) {
      inv_nk = 1.0 / n2.value;
    } else {
      const DivisionFieldEstimate* e = byk[k];
      if (!e) {
        missing += (missing.empty() ? "" : ",") + std::to_string(k);
        continue;
      }
      if (e->lower_bound_only) {
        inv_nk = 0.0;  // no split seen: contribution below 1/pi(x_cal), folded into sigma
        sig_inv = 1.0 / e->value;
      } else {
        inv_nk = 1.0 / e->value;
        // sigma of 1/n from sigma of n
        sig_inv = e->sigma * inv_nk * inv_nk;
      }
    }
    out.terms[k] = gk * inv_nk;
    out.value += gk * inv_nk;
    var += (gk * sig_inv) * (gk * sig_inv);
  }
  if (!missing.empty())
    throw std::invalid_argument("c_E_truncated: missing n_k estimates for k in {" + missing + "}");
  out.sigma_stat = std::sqrt(var);

  // measured envelope constant: n_k >= c phi(k)^2 over the reliable estimates
  ArithmeticFunctionTable small = build_arithmetic_tables(std::max<u32>(K, 20));
  double c_lo = std::numeric_limits<double>::infinity();
  for (const auto& e : estimates) {
    if (e.k < 3 || e.k > 20 || !e.reliable || e.lower_bound_only) continue;
    double phi2 = static_cast<double>(small.phi[e.k]) * static_cast<double>(small.phi[e.k]);
    c_lo = std::min(c_lo, e.value / phi2);
  }
  if (!std::isfinite(c_lo)) c_lo = 1.0;  // no reliable data: fall back to the trivial constant
  out.envelope_c = c_lo;

  // tail: sum_{k>K} 1/(c phi(k)^2), explicit to M = 10^6, then a closed
  // Rosser-Schoenfeld style remainder (phi(t) > t / (e^gamma loglog t + 3)).
  constexpr u32 M = 1000000;
  static const std::vector<double> inv_phi2 = [] {
    ArithmeticFunctionTable big = build_arithmetic_tables(M);
    std::vector<double> v(M + 1, 0.0);
    for (u32 k = 1; k <= M; ++k) v[k] = 1.0 / (static_cast<double>(big.phi[k]) * static_cast<double>(big.phi[k]));
    return v;
  }();
  double tail = 0.0;
  for (u32 k = M; k > K; --k) tail += inv_phi2[k];
  const double egamma = 1.7810724179901979;  // e^gamma
  double a = egamma * std::log(std::log(static_cast<double>(M))) + 3.0;
  double b = egamma / std::log(static_cast<double>(M));
  tail += (a * a + 2.0 * a * b + 2.0 * b * b) / static_cast<double>(M);
  out.tail_bound = tail / c_lo;
  return out;
}

struct CheckpointRow {
  u64 x = 0;
  u128 sum_e = 0;
  u128 sum_d = 0;
  double sum_p_over_d = 0.0;
  double li_x2 = 0.0;
  double ratio = 0.0;        // R(x) = sum e_p / Li(x^2)
  double lemma23_sup = 0.0;  // sup_k pi_E(x;k) k^2 / x over 2 <= k <= 2 sqrt x
  double thm12_ratio = 0.0;  // sum d_p / (x log log x), 0 below x = 100
};

struct StructureViolation {
  u64 p = 0;
  std::string what;
};

struct AggregateReport {
  std::string curve_label;
  u64 x_max = 0;
  u64 x_cal = 0;
  std::vector<CheckpointRow> rows;
  std::vector<u64> pi_e_at_xcal;  // index k, up to k_max; pi_E(x_cal; k)
  u64 good_count_at_xcal = 0;
  u64 pi_total_at_xcal = 0;
  std::vector<DivisionFieldEstimate> nk;  // k = 2..nk_max at x_cal
  DivisionFieldEstimate n2;
  CETruncation ce;
  std::vector<StructureViolation> violations;  // per-record invariant failures
};

struct AggregateOptions {
  u32 K = 40;        // c_E truncation
  u64 x_cal = 0;     // 0: full record range
  u32 nk_max = 20;   // statistical estimates for k = 2..nk_max
};

// Streams the (gap-checked) records once, accumulating every partial sum in
// 128-bit integers; per-record structure and the pointwise Weil consequence
// |e_p - p/d_p| <= (2 sqrt p + 1)/d_p are checked along the way. Violations
// are collected, not thrown: a tampered cache must surface as a failed
// verdict with the offending primes named.
inline AggregateReport aggregate(const std::vector<PrimeRecord>& records, const CurveSpec& curve,
                                 std::vector<u64> checkpoints, const AggregateOptions& opts = {}) {
  if (checkpoints.empty()) throw std::invalid_argument("aggregate: no checkpoints");
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    if (checkpoints[i] <= checkpoints[i - 1]) throw std::invalid_argument("aggregate: checkpoints must ascend");
  u64 x_max = checkpoints.back();
  u64 x_cal = opts.x_cal == 0 ? x_max : opts.x_cal;
  if (x_cal > x_max) throw std::invalid_argument("aggregate: x_cal beyond the record range");

  // coverage: every good prime <= x_max must appear exactly once, in order
  {
    std::size_t i = 0;
    for (u64 p : primes_in_range(2, x_max + 1)) {
      if (curve.is_bad_prime(p)) continue;
      if (i >= records.size() || records[i].p != p)
        throw std::runtime_error("aggregate: record stream has a gap at p=" + std::to_string(p));
      ++i;
    }
  }

  AggregateReport rep;
  rep.curve_label = curve.label;
  rep.x_max = x_max;
  rep.x_cal = x_cal;

  u32 k_table = static_cast<u32>(2 * isqrt_u64(x_max) + 2);
  std::vector<u64> pi_e(k_table + 1, 0);
  u128 sum_e = 0, sum_d = 0;
  double sum_pd = 0.0;
  u64 good = 0;

  std::size_t ci = 0;
  bool cal_snapped = false;
  auto snapshot_checkpoint = [&](u64 x) {
    CheckpointRow row;
    row.x = x;
    row.sum_e = sum_e;
    row.sum_d = sum_d;
    row.sum_p_over_d = sum_pd;
    row.li_x2 = li_of(static_cast<double>(x) * static_cast<double>(x));
    row.ratio = static_cast<double>(sum_e) / row.li_x2;
    double sup = 0.0;
    u64 kcap = 2 * isqrt_u64(x);
    for (u32 k = 2; k <= kcap && k <= k_table; ++k)
      sup = std::max(sup, static_cast<double>(pi_e[k]) * k * k / static_cast<double>(x));
    row.lemma23_sup = sup;
    row.thm12_ratio = x >= 100 ? static_cast<double>(sum_d) / (static_cast<double>(x) * std::log(std::log(static_cast<double>(x)))) : 0.0;
    rep.rows.push_back(row);
  };
  auto snapshot_cal = [&]() {
    rep.pi_e_at_xcal.assign(pi_e.begin(), pi_e.end());
    rep.good_count_at_xcal = good;
    cal_snapped = true;
  };

  for (const auto& r : records) {
    if (r.p > x_max) break;
    while (ci < checkpoints.size() && checkpoints[ci] < r.p) snapshot_checkpoint(checkpoints[ci++]);
    if (!cal_snapped && r.p > x_cal) snapshot_cal();

    // unconditional invariants (Eq-type facts; violations are collected)
    if (r.d_p == 0 || r.e_p == 0 || r.n == 0) {
      rep.violations.push_back({r.p, "zero field in record"});
      continue;
    }
    u128 a_abs = static_cast<u128>(r.a_p < 0 ? -r.a_p : r.a_p);
    if (a_abs * a_abs >= static_cast<u128>(4) * r.p)
      rep.violations.push_back({r.p, "Hasse bound |a_p| < 2 sqrt p violated"});
    if (static_cast<u128>(r.d_p) * r.e_p != static_cast<u128>(r.n))
      rep.violations.push_back({r.p, "d_p * e_p != n"});
    if (r.e_p % r.d_p != 0) rep.violations.push_back({r.p, "d_p does not divide e_p"});
    if ((r.p - 1) % r.d_p != 0) rep.violations.push_back({r.p, "d_p does not divide p-1"});
    if (static_cast<i128>(r.n) != static_cast<i128>(r.p) + 1 - r.a_p)
      rep.violations.push_back({r.p, "n != p + 1 - a_p"});
    // pointwise Weil: |e_p d_p - p| = |1 - a_p| <= 2 sqrt p + 1
    u64 m = static_cast<u64>(r.a_p <= 1 ? 1 - r.a_p : r.a_p - 1);
    if (m > 0 && static_cast<u128>(m - 1) * (m - 1) > static_cast<u128>(4) * r.p)
      rep.violations.push_back({r.p, "pointwise Weil bound |1 - a_p| <= 2 sqrt p + 1 violated"});

    sum_e += r.e_p;
    sum_d += r.d_p;
    sum_pd += static_cast<double>(r.p) / static_cast<double>(r.d_p);
    ++good;
    for (u64 dv : divisors_of(r.d_p))
      if (dv <= k_table) ++pi_e[dv];
  }
  while (ci < checkpoints.size()) snapshot_checkpoint(checkpoints[ci++]);
  if (!cal_snapped) snapshot_cal();

  rep.pi_total_at_xcal = prime_count(x_cal);
  rep.n2 = n2_exact(curve);
  for (u32 k = 2; k <= std::max(opts.nk_max, opts.K); ++k) {
    DivisionFieldEstimate e;
    e.k = k;
    e.samples = k < rep.pi_e_at_xcal.size() ? rep.pi_e_at_xcal[k] : 0;
    if (e.samples == 0) {
      e.value = static_cast<double>(rep.pi_total_at_xcal);
      e.lower_bound_only = true;
    } else {
      double phat = static_cast<double>(e.samples) / static_cast<double>(rep.pi_total_at_xcal);
      double sigma_p = std::sqrt(phat * (1.0 - phat) / static_cast<double>(rep.pi_total_at_xcal));
      e.value = 1.0 / phat;
      e.sigma = sigma_p / (phat * phat);
      e.reliable = e.samples >= 30;
    }
    rep.nk.push_back(e);
  }
  rep.ce = c_E_truncated(curve, opts.K, rep.nk);
  return rep;
}

// sup over checkpoints of the measured Lemma-2.3 constant.
inline double lemma23_constant(const AggregateReport& rep) {
  double sup = 0.0;
  for (const auto& row : rep.rows) sup = std::max(sup, row.lemma23_sup);
  return sup;
}

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct TheoremVerdicts {
  std::vector<Verdict> checks;
  bool all_pass() const {
    for (const auto& v : checks)
      if (!v.pass) return false;
    return true;
  }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

// Machine-checkable rendering of the two theorems plus the envelope and
// n_k sanity gates. All thresholds are fixed here.
inline TheoremVerdicts theorem_reports(const AggregateReport& rep) {
  TheoremVerdicts out;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    out.checks.push_back({name, pass, detail});
  };

  {
    std::string d;
    for (std::size_t i = 0; i < rep.violations.size() && i < 8; ++i)
      d += (d.empty() ? "p=" : ", p=") + std::to_string(rep.violations[i].p) + " (" + rep.violations[i].what + ")";
    add("structure_invariants", rep.violations.empty(),
        rep.violations.empty() ? "no violations" : std::to_string(rep.violations.size()) + " violations: " + d);
  }

  {
    bool ok = true;
    std::string d;
    for (const auto& row : rep.rows) {
      if (row.x < 1000) continue;
      if (!(row.ratio > 0.0 && row.ratio < 1.0)) ok = false;
      d += (d.empty() ? "R=" : ", ") + detail::fmt(row.ratio);
    }
    add("ratio_in_unit_interval", ok, d);
  }

  {
    const auto& last = rep.rows.back();
    double gap = std::abs(last.ratio - rep.ce.value);
    double gate = rep.ce.sigma_stat + rep.ce.tail_bound + 0.05;
    add("thm11_convergence", gap <= gate,
        "|R(" + std::to_string(last.x) + ") - c_E_trunc| = " + detail::fmt(gap) + " vs sigma+tail+0.05 = " +
            detail::fmt(gate) + " (c_E_trunc = " + detail::fmt(rep.ce.value) + ")");
  }

  {
    double tv = 0.0;
    double prev = 0.0;
    bool have = false;
    for (const auto& row : rep.rows) {
      if (row.x < 10000) continue;
      if (have) tv += std::abs(row.ratio - prev);
      prev = row.ratio;
      have = true;
    }
    add("ratio_total_variation", tv < 0.2, "total variation beyond x=1e4: " + detail::fmt(tv));
  }

  {
    bool bounded = true;
    std::string d;
    for (const auto& row : rep.rows) {
      if (row.x < 10000) continue;
      if (row.thm12_ratio > 5.0) bounded = false;
      d += (d.empty() ? "" : ", ") + detail::fmt(row.thm12_ratio);
    }
    add("thm12_bounded", bounded, "sum d_p / (x log log x) at checkpoints >= 1e4: " + d);
  }

  {
    bool ok = true;
    std::string d = "n/a (needs checkpoints at 1e5 and beyond)";
    const CheckpointRow* prev = nullptr;
    for (const auto& row : rep.rows) {
      if (row.x < 100000) continue;
      if (prev && row.thm12_ratio > 1.10 * prev->thm12_ratio) {
        ok = false;
        d = "increase " + detail::fmt(row.thm12_ratio / prev->thm12_ratio - 1.0) + " from x=" + std::to_string(prev->x);
      }
      if (prev && ok) d = "max step " + detail::fmt(row.thm12_ratio / prev->thm12_ratio - 1.0);
      prev = &row;
    }
    add("thm12_no_growth", ok, d);
  }

  {
    bool ok = true;
    std::string d;
    for (const auto& row : rep.rows) {
      if (row.x < 100000) continue;
      if (row.lemma23_sup > 30.0) ok = false;
      d += (d.empty() ? "" : ", ") + detail::fmt(row.lemma23_sup);
    }
    add("lemma23_envelope", ok, "sup pi_E k^2/x at checkpoints >= 1e5: " + (d.empty() ? "n/a" : d));
  }

  {
    const DivisionFieldEstimate* n2hat = nullptr;
    for (const auto& e : rep.nk)
      if (e.k == 2) n2hat = &e;
    bool ok = n2hat && !n2hat->lower_bound_only &&
              std::abs(n2hat->value - rep.n2.value) <= 3.0 * std::max(n2hat->sigma, 1e-12);
    add("n2_within_3sigma", ok,
        n2hat ? "n2_exact=" + detail::fmt(rep.n2.value) + " n2_hat=" + detail::fmt(n2hat->value) + " sigma=" +
                    detail::fmt(n2hat->sigma)
              : "estimate missing");
  }

  {
    // parity is only demanded of estimates that can resolve it: the
    // rounding cell is 0.5 wide, so sigma must sit well inside it
    bool ok = true;
    std::string d;
    for (const auto& e : rep.nk) {
      if (e.k < 3 || e.k > 8 || !e.reliable) continue;
      long r = std::lround(e.value);
      bool resolvable = e.sigma <= 0.25;
      if (resolvable && r % 2 != 0) ok = false;
      d += (d.empty() ? "" : " ") + std::to_string(e.k) + ":" + std::to_string(r) + (resolvable ? "" : "~");
    }
    add("nk_parity_even", ok, "round(n_k) for k in [3,8] (~ = sigma too large to gate): " + d);
  }

  {
    bool ok = true;
    ArithmeticFunctionTable t = build_arithmetic_tables(32);
    double worst = 0.0;
    for (const auto& e : rep.nk) {
      if (e.k < 3 || e.k > 20 || !e.reliable || e.lower_bound_only) continue;
      double phi2 = static_cast<double>(t.phi[e.k]) * static_cast<double>(t.phi[e.k]);
      double r1 = phi2 / e.value, r2 = e.value / (static_cast<double>(e.k) * e.k);
      worst = std::max({worst, r1, r2});
      if (r1 > 30.0 || r2 > 30.0) ok = false;
    }
    add("lemma21_envelope", ok, "max of phi(k)^2/n_k and n_k/k^2 over reliable k <= 20: " + detail::fmt(worst));
  }

  if (rep.x_max >= 1000000) {
    const auto& last = rep.rows.back();
    double sep = static_cast<double>(last.sum_d) / static_cast<double>(last.sum_e);
    add("dp_much_smaller_than_ep", sep < 1e-2, "sum d_p / sum e_p = " + detail::fmt(sep));
  }

  return out;
}

}  // namespace cmavg

#endif  // CMAVG_ASYMPTOTIC_HPP
