// cmavg: reduction-group invariants (d_p, e_p) of CM elliptic curves over Q
// and desk-scale verification of the average-order asymptotics for
// sum e_p (ratio against c_E Li(x^2)) and sum d_p (x log log x boundedness).
//
// Notes on conventions: p = 2 is always excluded (curve arithmetic assumes
// odd characteristic, and no asymptotic statement can see one prime);
// primes dividing the conductor or the model discriminant are skipped.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cmavg/asymptotic.hpp"
#include "cmavg/cache.hpp"
#include "cmavg/division.hpp"
#include "cmavg/pipeline.hpp"
#include "cmavg/presets.hpp"
#include "cmavg/report_io.hpp"

namespace fs = std::filesystem;
using namespace cmavg;

namespace {

u64 parse_count(const std::string& s) {
  // accept 100000 as well as 1e5
  try {
    if (s.find_first_of("eE.") != std::string::npos) {
      long double v = std::stold(s);
      if (v < 0 || v > 1.9e18) throw std::invalid_argument("out of range");
      return static_cast<u64>(v + 0.5L);
    }
    return std::stoull(s);
  } catch (const std::exception&) {
    throw CLI::ValidationError("'" + s + "' is not a count");
  }
}

std::vector<u64> parse_counts(const std::string& csv) {
  std::vector<u64> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t c = csv.find(',', pos);
    std::string tok = csv.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
    if (!tok.empty()) out.push_back(parse_count(tok));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return out;
}

struct CurveArgs {
  std::string preset;
  std::string presets_file;
  i64 a4 = 0, a6 = 0;
  u64 conductor = 0;
  int disc = 0;
  std::string label;
  bool adhoc_set = false;
};

std::vector<CurveSpec> load_catalog(const std::string& file) {
  if (file.empty()) return preset_catalog();
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open presets file " + file);
  nlohmann::json j = nlohmann::json::parse(in);
  std::vector<CurveSpec> out;
  for (const auto& c : j.at("curves")) {
    CurveSpec s{c.at("label").get<std::string>(), c.at("a4").get<i64>(), c.at("a6").get<i64>(),
                c.at("conductor").get<u64>(), c.at("d_K").get<int>()};
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

CurveSpec resolve_curve(const CurveArgs& a) {
  if (a.adhoc_set) {
    CurveSpec s{a.label.empty() ? "adhoc" : a.label, a.a4, a.a6, a.conductor, a.disc};
    s.validate();
    return s;
  }
  std::string name = a.preset.empty() ? "cm-4" : a.preset;
  for (const auto& c : load_catalog(a.presets_file))
    if (c.label == name) return c;
  throw std::runtime_error("unknown preset '" + name + "'");
}

void add_curve_flags(CLI::App* cmd, CurveArgs& args) {
  cmd->add_option("--curve", args.preset, "preset curve label (default cm-4); see 'cmavg presets'");
  cmd->add_option("--presets-file", args.presets_file, "catalog file overriding the built-in presets");
  auto* a4 = cmd->add_option("--a4", args.a4, "ad hoc curve: a4 of y^2 = x^3 + a4 x + a6");
  auto* a6 = cmd->add_option("--a6", args.a6, "ad hoc curve: a6");
  auto* nn = cmd->add_option("--conductor", args.conductor, "ad hoc curve: conductor N");
  auto* dd = cmd->add_option("--disc", args.disc, "ad hoc curve: CM discriminant d_K");
  cmd->add_option("--label", args.label, "ad hoc curve: cache label");
  a4->needs(a6, nn, dd);
  cmd->callback([&args, a4]() {
    if (a4->count() > 0) args.adhoc_set = true;
  });
}

unsigned env_workers(unsigned cli_value, bool cli_set) {
  if (cli_set) return cli_value;
  if (const char* e = std::getenv("CMAVG_WORKERS")) {
    unsigned v = static_cast<unsigned>(std::strtoul(e, nullptr, 10));
    if (v > 0) return v;
  }
  return cli_value;
}

u64 env_segment(const std::string& cli_value, bool cli_set) {
  if (!cli_set)
    if (const char* e = std::getenv("CMAVG_SEGMENT")) return parse_count(e);
  return parse_count(cli_value);
}

fs::path env_cache_dir(const std::string& cli_value, bool cli_set) {
  if (cli_set) return cli_value;
  if (const char* e = std::getenv("CMAVG_CACHE_DIR")) return e;
  return cli_value;
}

// Extend the cache so that it covers good primes up to x_max. Idempotent:
// a rerun at covered x leaves the file untouched.
CacheData ensure_cache(const fs::path& dir, const CurveSpec& curve, u64 x_max, const PipelineOptions& popts,
                       bool verbose) {
  fs::create_directories(dir);
  fs::path path = cache_path(dir, curve);
  CacheData data;
  if (fs::exists(path)) {
    data = read_cache_for(path, curve);
  } else {
    data.header.curve_label = curve.label;
    data.header.curve_hash = curve_hash(curve);
    data.header.coverage = 2;  // nothing below 3 is ever stored
  }
  if (data.header.coverage >= x_max) return data;
  if (verbose)
    std::cerr << "computing records for " << curve.label << " on (" << data.header.coverage << ", " << x_max
              << "] with " << popts.workers << " worker(s)\n";
  auto fresh = compute_records(curve, data.header.coverage, x_max, popts);
  data.records.insert(data.records.end(), fresh.begin(), fresh.end());
  data.header.coverage = x_max;
  data.header.count = data.records.size();
  write_cache(path, curve, data.records, x_max);
  return data;
}

int cmd_presets(const std::string& presets_file) {
  std::printf("%-8s %12s %16s %10s %6s  %s\n", "label", "a4", "a6", "N", "d_K", "model discriminant");
  for (const auto& c : load_catalog(presets_file)) {
    i128 d = c.disc();
    bool neg = d < 0;
    if (neg) d = -d;
    std::printf("%-8s %12lld %16lld %10llu %6d  %s%s\n", c.label.c_str(), static_cast<long long>(c.a4),
                static_cast<long long>(c.a6), static_cast<unsigned long long>(c.conductor), c.d_K, neg ? "-" : "",
                u128_to_string(static_cast<u128>(d)).c_str());
  }
  return 0;
}

struct VerifyStats {
  u64 checked = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

int cmd_verify(const CurveSpec& curve, const fs::path& cache_dir, u64 dual_max, const std::vector<u64>& ks,
               double sample_rate) {
  fs::path path = cache_path(cache_dir, curve);
  if (!fs::exists(path)) {
    std::cerr << "no cache at " << path << "; run 'cmavg compute' first\n";
    return 2;
  }
  CacheData data = read_cache_for(path, curve);
  int failures = 0;

  // 1. record invariants
  {
    VerifyStats st;
    for (const auto& r : data.records) {
      ++st.checked;
      u128 a_abs = static_cast<u128>(r.a_p < 0 ? -r.a_p : r.a_p);
      bool ok = r.d_p != 0 && r.e_p != 0 && a_abs * a_abs < static_cast<u128>(4) * r.p &&
                static_cast<u128>(r.d_p) * r.e_p == static_cast<u128>(r.n) && r.e_p % r.d_p == 0 &&
                (r.p - 1) % r.d_p == 0 && static_cast<i128>(r.n) == static_cast<i128>(r.p) + 1 - r.a_p;
      if (!ok && st.failures.size() < 16) st.failures.push_back("p=" + std::to_string(r.p));
      if (!ok) ++failures;
    }
    std::printf("%-28s %8llu checked  %s%s\n", "record invariants", static_cast<unsigned long long>(st.checked),
                st.ok() ? "ok" : "FAIL at ", st.ok() ? "" : (st.failures.empty() ? "" : st.failures.front().c_str()));
    for (const auto& f : st.failures) std::printf("    violation: %s\n", f.c_str());
  }

  // 2. oracle triangle on sampled primes (enumeration needs p <= 1e5)
  {
    u64 checked = 0, bad = 0;
    for (const auto& r : data.records) {
      if (r.p > 100000) break;
      u64 h = splitmix64(fnv1a(curve.label) ^ splitmix64(r.p ^ 0x51a2b3c4d5e6f708ull));
      if (static_cast<double>(h) > sample_rate * 18446744073709551615.0) continue;
      ++checked;
      u64 n_enum = count_points_enumeration(curve, r.p);
      u64 n_bsgs = count_points_bsgs(curve, r.p);
      i64 t_cm = cm_trace_resolved(curve, r.p);
      u64 n_cm = static_cast<u64>(static_cast<i64>(r.p) + 1 - t_cm);
      if (n_enum != r.n || n_bsgs != r.n || n_cm != r.n) {
        ++bad;
        ++failures;
        std::printf("    triangle mismatch at p=%llu: cache=%llu enum=%llu bsgs=%llu cm=%llu\n",
                    static_cast<unsigned long long>(r.p), static_cast<unsigned long long>(r.n),
                    static_cast<unsigned long long>(n_enum), static_cast<unsigned long long>(n_bsgs),
                    static_cast<unsigned long long>(n_cm));
      }
    }
    std::printf("%-28s %8llu sampled  %s\n", "oracle triangle", static_cast<unsigned long long>(checked),
                bad == 0 ? "ok" : "FAIL");
  }

  // 3. dual oracle: k | d_p  <=>  splits_completely(k, p)
  {
    u64 checked = 0, bad = 0;
    for (const auto& r : data.records) {
      if (r.p > dual_max) break;
      for (u64 k : ks) {
        if (k % r.p == 0) continue;  // ramified for the splitting test
        ++checked;
        bool via_d = r.d_p % k == 0;
        bool via_split = splits_completely(curve, static_cast<u32>(k), r.p);
        if (via_d != via_split) {
          ++bad;
          ++failures;
          std::printf("    Lemma 2.2 mismatch at (p=%llu, k=%llu): k|d_p=%d splits=%d\n",
                      static_cast<unsigned long long>(r.p), static_cast<unsigned long long>(k), via_d, via_split);
        }
      }
    }
    std::printf("%-28s %8llu pairs    %s\n", "dual oracle (split <=> k|d)", static_cast<unsigned long long>(checked),
                bad == 0 ? "ok" : "FAIL");
  }

  // 4. k = 2 equals an independent cubic-splitting count
  {
    u64 via_d = 0, via_cubic = 0;
    for (const auto& r : data.records) {
      if (r.p > dual_max) break;
      if (r.d_p % 2 == 0) ++via_d;
      PrimeField F(r.p);
      CurveModP E(F, curve);
      Poly cubic{E.coeff_b(), E.coeff_a(), F.zero(), F.one()};
      if (poly_root_count(F, cubic) == 3) ++via_cubic;
    }
    bool ok = via_d == via_cubic;
    if (!ok) ++failures;
    std::printf("%-28s %8llu vs %llu  %s\n", "k=2 cubic-splitting count", static_cast<unsigned long long>(via_d),
                static_cast<unsigned long long>(via_cubic), ok ? "ok" : "FAIL");
  }

  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cmavg: group invariants (d_p, e_p) of a CM elliptic curve at good primes p <= x,\n"
      "with average-order reports. p = 2 and primes dividing conductor or model\n"
      "discriminant are always excluded."};
  app.require_subcommand(1);

  CurveArgs curve_args;
  std::string xmax_s = "100000";
  std::string checkpoints_s;
  unsigned workers = 1;
  std::string segment_s = std::to_string(kDefaultSegmentSpan);
  std::string cache_dir_s = "cmavg-cache";
  std::string out_dir_s = "out";
  double crosscheck_rate = 0.0;
  u32 K = 40;
  std::string xcal_s = "0";
  std::string dual_k_s = "2,3,4,5";
  std::string dual_max_s = "10000";
  double verify_sample = 0.02;

  auto* c_compute = app.add_subcommand("compute", "compute/extend the record cache up to --xmax");
  add_curve_flags(c_compute, curve_args);
  c_compute->add_option("--xmax", xmax_s, "cover good primes p <= xmax (accepts 1e6 style)");
  auto* wopt = c_compute->add_option("--workers", workers, "parallel workers (env CMAVG_WORKERS)");
  auto* sopt = c_compute->add_option("--segment", segment_s, "sieve segment span (env CMAVG_SEGMENT)");
  auto* cdir = c_compute->add_option("--cache-dir", cache_dir_s, "cache directory (env CMAVG_CACHE_DIR)");
  c_compute->add_option("--crosscheck-rate", crosscheck_rate, "fraction of primes re-counted by BSGS")
      ->check(CLI::Range(0.0, 1.0));

  auto* c_report = app.add_subcommand("report", "aggregate a cached run into CSV + JSON reports");
  add_curve_flags(c_report, curve_args);
  c_report->add_option("--xmax", xmax_s, "largest checkpoint (accepts 1e6 style)");
  c_report->add_option("--checkpoints", checkpoints_s, "comma list, default decades 1e3..xmax");
  c_report->add_option("--K", K, "c_E truncation index");
  c_report->add_option("--xcal", xcal_s, "calibration x for n_k estimates (0 = xmax)");
  auto* wopt2 = c_report->add_option("--workers", workers, "workers if the cache must be extended");
  auto* cdir2 = c_report->add_option("--cache-dir", cache_dir_s, "cache directory");
  c_report->add_option("--out", out_dir_s, "output directory for report files");
  auto* sopt2 = c_report->add_option("--segment", segment_s, "sieve segment span (env CMAVG_SEGMENT)");
  c_report->add_option("--crosscheck-rate", crosscheck_rate, "fraction of primes re-counted by BSGS")
      ->check(CLI::Range(0.0, 1.0));

  auto* c_verify = app.add_subcommand("verify", "dual-oracle and invariant checks against the cache");
  add_curve_flags(c_verify, curve_args);
  auto* cdir3 = c_verify->add_option("--cache-dir", cache_dir_s, "cache directory");
  c_verify->add_option("--dual-oracle-k", dual_k_s, "k values for the splitting equivalence");
  c_verify->add_option("--dual-oracle-max", dual_max_s, "largest p for the dual oracle");
  c_verify->add_option("--crosscheck-rate", verify_sample, "oracle-triangle sampling rate")
      ->check(CLI::Range(0.0, 1.0));

  auto* c_presets = app.add_subcommand("presets", "list the preset curve catalog");
  std::string presets_file;
  c_presets->add_option("--presets-file", presets_file, "catalog file overriding the built-in presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_presets->parsed()) return cmd_presets(presets_file);

    CurveSpec curve = resolve_curve(curve_args);
    PipelineOptions popts;
    popts.segment_span = env_segment(segment_s, sopt->count() > 0 || sopt2->count() > 0);
    popts.record.crosscheck_rate = crosscheck_rate;

    if (c_compute->parsed()) {
      popts.workers = env_workers(workers, wopt->count() > 0);
      fs::path dir = env_cache_dir(cache_dir_s, cdir->count() > 0);
      u64 xmax = parse_count(xmax_s);
      CacheData data = ensure_cache(dir, curve, xmax, popts, true);
      std::printf("cache %s: %llu records, coverage %llu\n", cache_path(dir, curve).string().c_str(),
                  static_cast<unsigned long long>(data.records.size()),
                  static_cast<unsigned long long>(data.header.coverage));
      return 0;
    }

    if (c_report->parsed()) {
      popts.workers = env_workers(workers, wopt2->count() > 0);
      fs::path dir = env_cache_dir(cache_dir_s, cdir2->count() > 0);
      u64 xmax = parse_count(xmax_s);
      std::vector<u64> checkpoints;
      if (!checkpoints_s.empty()) {
        checkpoints = parse_counts(checkpoints_s);
      } else {
        for (u64 x = 1000; x < xmax; x *= 10) checkpoints.push_back(x);
        checkpoints.push_back(xmax);
      }
      if (checkpoints.empty() || checkpoints.back() > xmax)
        throw std::runtime_error("checkpoints must ascend and stay <= xmax");

      fs::path path = cache_path(dir, curve);
      if (!fs::exists(path))
        throw std::runtime_error("no cache at " + path.string() + "; run 'cmavg compute --xmax " + xmax_s + "' first");
      CacheData data = read_cache_for(path, curve);
      if (data.header.coverage < checkpoints.back())
        throw std::runtime_error("cache covers only x <= " + std::to_string(data.header.coverage) +
                                 "; required x = " + std::to_string(checkpoints.back()) +
                                 " (run 'cmavg compute --xmax " + std::to_string(checkpoints.back()) + "')");

      AggregateOptions aopts;
      aopts.K = K;
      aopts.x_cal = parse_count(xcal_s);
      AggregateReport rep = aggregate(data.records, curve, checkpoints, aopts);
      TheoremVerdicts verdicts = theorem_reports(rep);

      fs::create_directories(out_dir_s);
      fs::path csv = fs::path(out_dir_s) / (curve.label + "-report.csv");
      fs::path js = fs::path(out_dir_s) / (curve.label + "-report.json");
      write_text_file(csv, report_csv(rep));
      write_text_file(js, report_json(rep, verdicts).dump(2) + "\n");
      for (const auto& v : verdicts.checks)
        std::printf("%-26s %s  %s\n", v.name.c_str(), v.pass ? "pass" : "FAIL", v.detail.c_str());
      std::printf("wrote %s and %s\n", csv.string().c_str(), js.string().c_str());
      return verdicts.all_pass() ? 0 : 1;
    }

    if (c_verify->parsed()) {
      fs::path dir = env_cache_dir(cache_dir_s, cdir3->count() > 0);
      return cmd_verify(curve, dir, parse_count(dual_max_s), parse_counts(dual_k_s), verify_sample);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
