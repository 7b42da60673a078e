#ifndef CMAVG_REPORT_IO_HPP
#define CMAVG_REPORT_IO_HPP

// Report emission: CSV (one row per checkpoint, fixed column set) and JSON
// (full detail plus machine-readable verdicts).

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cmavg/asymptotic.hpp"

namespace cmavg {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline std::string report_csv(const AggregateReport& rep) {
  std::string out = "x,sum_e_p,sum_d_p,sum_p_over_d_p,Li_x2,R_x,c_E_trunc,sigma_total,lemma23_sup,thm12_ratio\n";
  double sigma_total = rep.ce.sigma_stat + rep.ce.tail_bound;
  for (const auto& row : rep.rows) {
    out += std::to_string(row.x) + ",";
    out += u128_to_string(row.sum_e) + ",";
    out += u128_to_string(row.sum_d) + ",";
    out += detail::fmt_double(row.sum_p_over_d) + ",";
    out += detail::fmt_double(row.li_x2) + ",";
    out += detail::fmt_double(row.ratio) + ",";
    out += detail::fmt_double(rep.ce.value) + ",";
    out += detail::fmt_double(sigma_total) + ",";
    out += detail::fmt_double(row.lemma23_sup) + ",";
    out += detail::fmt_double(row.thm12_ratio) + "\n";
  }
  return out;
}

inline nlohmann::json report_json(const AggregateReport& rep, const TheoremVerdicts& verdicts) {
  nlohmann::json j;
  j["meta"]["curve"] = rep.curve_label;
  j["meta"]["x_max"] = rep.x_max;
  j["meta"]["x_cal"] = rep.x_cal;
  j["meta"]["li_definition"] = "Li(y) = integral_2^y dt/log t";
  j["meta"]["format_version"] = 1;

  auto& rows = j["checkpoints"];
  rows = nlohmann::json::array();
  for (const auto& row : rep.rows) {
    nlohmann::json r;
    r["x"] = row.x;
    r["sum_e_p"] = u128_to_string(row.sum_e);
    r["sum_d_p"] = u128_to_string(row.sum_d);
    r["sum_p_over_d_p"] = row.sum_p_over_d;
    r["Li_x2"] = row.li_x2;
    r["R_x"] = row.ratio;
    r["lemma23_sup"] = row.lemma23_sup;
    r["thm12_ratio"] = row.thm12_ratio;
    rows.push_back(r);
  }

  j["c_E"]["K"] = rep.ce.K;
  j["c_E"]["value"] = rep.ce.value;
  j["c_E"]["sigma_stat"] = rep.ce.sigma_stat;
  j["c_E"]["tail_bound"] = rep.ce.tail_bound;
  j["c_E"]["envelope_c"] = rep.ce.envelope_c;
  j["c_E"]["terms"] = rep.ce.terms;

  j["n2_exact"] = rep.n2.value;
  auto& nk = j["nk_estimates"];
  nk = nlohmann::json::array();
  for (const auto& e : rep.nk) {
    nlohmann::json r;
    r["k"] = e.k;
    r["value"] = e.value;
    r["sigma"] = e.sigma;
    r["samples"] = e.samples;
    r["reliable"] = e.reliable;
    r["lower_bound_only"] = e.lower_bound_only;
    nk.push_back(r);
  }

  auto& pe = j["pi_E_at_x_cal"];
  pe = nlohmann::json::array();
  for (u32 k = 1; k < rep.pi_e_at_xcal.size(); ++k) {
    if (rep.pi_e_at_xcal[k] == 0) continue;
    pe.push_back({{"k", k}, {"count", rep.pi_e_at_xcal[k]}});
  }
  j["pi_total_at_x_cal"] = rep.pi_total_at_xcal;
  j["good_primes_at_x_cal"] = rep.good_count_at_xcal;

  auto& vs = j["verdicts"];
  vs = nlohmann::json::array();
  for (const auto& v : verdicts.checks)
    vs.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  j["all_pass"] = verdicts.all_pass();

  if (!rep.violations.empty()) {
    auto& viol = j["violations"];
    viol = nlohmann::json::array();
    for (const auto& v : rep.violations) viol.push_back({{"p", v.p}, {"what", v.what}});
  }
  return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace cmavg

#endif  // CMAVG_REPORT_IO_HPP
