#pragma once

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "edgebound/edgebound.hpp"

namespace edgebound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;

// Inline JSON text or a path to a JSON file.
inline json json_arg(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (s[first] == '{' || s[first] == '[' || s[first] == '-' ||
                                     std::isdigit(static_cast<unsigned char>(s[first])))) {
    try {
      return json::parse(s);
    } catch (const json::exception& e) {
      throw DomainError(std::string("invalid inline JSON: ") + e.what());
    }
  }
  return read_json_file(s);
}

inline std::vector<int> int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw DomainError("invalid integer list '" + s + "'");
    }
    if (used != item.size()) throw DomainError("invalid integer list '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw DomainError("empty integer list");
  return out;
}

namespace detail {

inline bool user_gave(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

inline std::string config_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_primitive(); })) {
    std::string joined;
    for (const auto& x : v) {
      if (!joined.empty()) joined += ",";
      joined += x.is_string() ? x.get<std::string>() : x.dump();
    }
    return joined;
  }
  return v.dump();
}

// Splices a JSON config into the argument list. Keys map to long options
// (underscores become dashes); flags given on the command line win.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw DomainError("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  json cfg = read_json_file(path);
  if (!cfg.is_object()) throw DomainError("config must be a JSON object");
  std::vector<std::string> out;
  std::size_t start = 0;
  if (!rest.empty() && rest[0].rfind("-", 0) != 0) {
    out.push_back(rest[0]);
    start = 1;
  } else if (cfg.contains("command")) {
    out.push_back(cfg["command"].get<std::string>());
  } else {
    throw DomainError("config has no command and none was given");
  }
  std::vector<std::string> user(rest.begin() + static_cast<std::ptrdiff_t>(start), rest.end());
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") continue;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (user_gave(user, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
      continue;
    }
    if (value.is_null()) continue;
    out.push_back(flag);
    out.push_back(config_value(value));
  }
  out.insert(out.end(), user.begin(), user.end());
  return out;
}

inline void write_payload(const std::string& payload, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write '" + path + "'");
  f << payload;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct SpecOptions {
  std::string spec;
  std::string family;
  int d = 0;

  bool given() const { return !spec.empty() || !family.empty(); }

  DistributionSpec build(const char* who) const {
    DistributionSpec s;
    if (!spec.empty()) {
      s = spec_from_json(json_arg(spec));
    } else if (!family.empty()) {
      s.family = family;
      s.d = d;
      s.validate();
    } else {
      throw DomainError(std::string(who) + ": need --spec or --family/--d");
    }
    return s;
  }
};

inline void add_spec_options(CLI::App* app, SpecOptions& o, const std::string& suffix = "") {
  app->add_option("--spec" + suffix, o.spec, "distribution spec, inline JSON or file");
  app->add_option("--family" + suffix, o.family, "distribution family");
  app->add_option("--d" + suffix, o.d, "dimension for --family");
}

inline void require_seed(const CLI::Option* opt, const std::string& cmd) {
  if (opt->count() == 0) throw DomainError("--seed is required for " + cmd);
}

inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline const std::vector<std::string>& theorem_names() {
  static const std::vector<std::string> names = {"ball-normal",      "ball-general",  "halfspace-normal",
                                                 "halfspace-general", "ball-symmetric", "score-rao",
                                                 "bootstrap",        "elliptical",    "score-bootstrap"};
  return names;
}

inline BoundBreakdown evaluate_theorem(const std::string& theorem, const MomentSummary& ms, double beta,
                                       const ConstantsLedger& ledger, bool same_cov, SymmetricVariant variant) {
  if (theorem == "ball-normal") return bound_ball_normal(ms, beta, ledger);
  if (theorem == "ball-general") return bound_ball_general(ms, beta, ledger, same_cov);
  if (theorem == "halfspace-normal") return bound_halfspace_normal(ms, beta, ledger);
  if (theorem == "halfspace-general") return bound_halfspace_general(ms, beta, ledger, same_cov);
  if (theorem == "ball-symmetric") return bound_ball_symmetric(ms, ledger, variant);
  if (theorem == "score-rao") return score2_bound(ms, beta, ledger);
  if (theorem == "bootstrap") return bootstrap_delta(ms, beta, ledger);
  if (theorem == "elliptical") return delta_W(ms, beta, ledger);
  if (theorem == "score-bootstrap") return delta_R(ms, beta, ledger);
  throw DomainError("unknown theorem '" + theorem + "'");
}

inline json verify_constants_json() {
  json rows = json::array();
  bool all = true;
  for (const auto& t : reference_constant_tuples()) {
    ConstantsCheck c = verify_constants_constraint(t.K, t.M, t.a, t.b);
    all = all && c.ok;
    rows.push_back({{"K", c.K}, {"M", c.M}, {"a", c.a}, {"b", c.b}, {"lhs", c.lhs},
                    {"lhs_as_printed", c.lhs_as_printed}, {"ok", c.ok}});
  }
  return {{"command", "verify-constants"}, {"rows", rows}, {"all_ok", all}};
}

// Runs one CLI invocation. args excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"edgebound: explicit normal and bootstrap approximation bounds"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string out_path;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub, bool stochastic) {
    sub->add_option("--out", out_path, "write the payload to this file instead of stdout");
    if (stochastic) return sub->add_option("--seed", seed, "root seed");
    return static_cast<CLI::Option*>(nullptr);
  };

  // bound
  auto* bound = app.add_subcommand("bound", "evaluate a bound and its term breakdown");
  std::string theorem, beta_arg = "0.829", from_sample, compare, moments_arg, ledger_arg, w_arg, variant = "full";
  double n_override = 0.0;
  double sigma2 = -1.0;
  bool same_cov = false, verify = false, coefficients = false;
  bound->add_option("--theorem", theorem)->check(CLI::IsMember(theorem_names()));
  bound->add_option("--beta", beta_arg, "number in (0,1) or 'optimize'");
  bound->add_option("--from-sample", from_sample, "CSV sample of X");
  bound->add_option("--compare", compare, "CSV sample of T for the general bounds");
  bound->add_flag("--same-cov", same_cov, "T shares the covariance of X");
  bound->add_option("--moments", moments_arg, "moment summary, inline JSON or file; overrides sample values");
  bound->add_option("--ledger", ledger_arg, "constants overrides, inline JSON or file");
  bound->add_option("--n", n_override, "number of summands (defaults to the sample size)");
  bound->add_option("--sigma2", sigma2, "sub-Gaussian variance factor for bootstrap certificates");
  bound->add_option("--W", w_arg, "SPD weight matrix (elliptical), inline JSON or file");
  bound->add_option("--variant", variant)->check(CLI::IsMember({"full", "max-norm"}));
  bound->add_flag("--verify-constants", verify, "check the smoothing-constant constraint");
  bound->add_flag("--coefficients", coefficients, "print the numeric coefficients at beta");
  add_common(bound, false);

  auto* verify_cmd = app.add_subcommand("verify-constants", "check the smoothing-constant constraint");
  add_common(verify_cmd, false);

  // distance
  auto* distance = app.add_subcommand("distance", "Monte Carlo lower estimates of uniform distances");
  std::string path_a, path_b, kind = "ball";
  detail::SpecOptions spec_a, spec_b, spec_both;
  Eigen::Index dist_n = 10000;
  int centers = 256, dirs = 256, stderr_reps = 20, column = 0, cal_runs = 0;
  Eigen::Index cal_n = 0;
  double cal_q = 0.99;
  bool no_origin = false, no_axes = false;
  distance->add_option("--a", path_a, "CSV sample A");
  distance->add_option("--b", path_b, "CSV sample B");
  detail::add_spec_options(distance, spec_both);
  distance->add_option("--spec-a", spec_a.spec, "spec for A");
  distance->add_option("--spec-b", spec_b.spec, "spec for B");
  distance->add_option("--n", dist_n, "rows drawn per spec");
  distance->add_option("--kind", kind)->check(CLI::IsMember({"ball", "halfspace", "ks", "levy"}));
  distance->add_option("--centers", centers, "random ball centers");
  distance->add_flag("--no-origin", no_origin);
  distance->add_flag("--no-axes", no_axes);
  distance->add_option("--dirs", dirs, "random half-space directions");
  distance->add_option("--stderr-reps", stderr_reps, "bootstrap reps for the standard error; 0 for plug-in");
  distance->add_option("--column", column, "coordinate used by ks and levy");
  distance->add_option("--calibrate-runs", cal_runs, "same-law runs for a null threshold (0 = off)");
  distance->add_option("--calibrate-n", cal_n, "rows per calibration sample (default min(n, 5000))");
  distance->add_option("--calibrate-quantile", cal_q);
  auto* dist_seed = add_common(distance, true);

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "bootstrap quantiles and elliptical coverage");
  std::string mode = "quantile", data_path;
  detail::SpecOptions boot_spec;
  double alpha = 0.1;
  int B = kDefaultBootstrapReplicates, trials = 1000;
  Eigen::Index boot_n = 500;
  double boot_sigma2 = -1.0, beta_cert = kReferenceBeta;
  boot->add_option("--mode", mode)->check(CLI::IsMember({"quantile", "coverage"}));
  boot->add_option("--data", data_path, "CSV sample (quantile mode)");
  detail::add_spec_options(boot, boot_spec);
  boot->add_option("--alpha", alpha);
  boot->add_option("--B", B);
  boot->add_option("--n", boot_n);
  boot->add_option("--trials", trials);
  boot->add_option("--W", w_arg, "SPD weight matrix, inline JSON or file (identity if absent)");
  boot->add_option("--sigma2", boot_sigma2, "variance factor for the coverage certificate");
  boot->add_option("--beta", beta_cert, "beta for the certificate");
  auto* boot_seed = add_common(boot, true);

  // score-test
  auto* score = app.add_subcommand("score-test", "bootstrap and Rao score tests");
  std::string test = "bootstrap-score", info_arg;
  detail::SpecOptions score_spec;
  int level_trials = 0;
  Eigen::Index score_n = 200;
  bool rao_cert = false;
  score->add_option("--test", test)->check(CLI::IsMember({"bootstrap-score", "rao"}));
  score->add_option("--data", data_path, "CSV of per-observation scores");
  detail::add_spec_options(score, score_spec);
  score->add_option("--n", score_n, "rows per simulated score sample");
  score->add_option("--alpha", alpha);
  score->add_option("--B", B);
  score->add_option("--sigma2", boot_sigma2, "variance factor for the bootstrap certificate");
  score->add_option("--beta", beta_cert);
  score->add_option("--info", info_arg, "information of the total score (default n times the score covariance)");
  score->add_flag("--certificate", rao_cert, "attach the Rao-test bound from sample moments");
  score->add_option("--level-trials", level_trials, "simulate the rejection rate over this many samples");
  score->add_option("--W", w_arg);  // accepted for config symmetry, unused
  auto* score_seed = add_common(score, true);

  // experiment
  auto* exp = app.add_subcommand("experiment", "sweeps emitting CSV");
  std::string name, d_list = "8,16,32,64";
  detail::SpecOptions exp_spec;
  Eigen::Index exp_n = 4096;
  int reps = 200;
  double eps = 1e-3;
  exp->add_option("--name", name)->required()->check(
      CLI::IsMember({"portnoy", "anti-concentration", "distance-sweep"}));
  exp->add_option("--d-list", d_list, "comma separated dimensions, ascending");
  exp->add_option("--n", exp_n);
  exp->add_option("--reps", reps);
  exp->add_option("--eps", eps);
  exp->add_option("--family", exp_spec.family, "family for distance-sweep");
  exp->add_option("--centers", centers);
  auto* exp_seed = add_common(exp, true);

  // sample
  auto* samp = app.add_subcommand("sample", "draw a CSV sample or the moment-matched construction");
  detail::SpecOptions samp_spec;
  Eigen::Index samp_n = 1000;
  std::string construct_from;
  double construct_beta = kReferenceBeta;
  detail::add_spec_options(samp, samp_spec);
  samp->add_option("--n", samp_n);
  samp->add_option("--construct-from", construct_from, "CSV sample X; emits the constructed Y");
  samp->add_option("--construct-beta", construct_beta);
  auto* samp_seed = add_common(samp, true);

  try {
    std::vector<std::string> expanded = detail::expand_config(std::move(args));
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*verify_cmd || (*bound && verify)) {
      detail::write_payload(detail::dump(verify_constants_json()), out_path, out);
      return kExitOk;
    }
    if (*bound) {
      const bool optimize = beta_arg == "optimize";
      double beta = kReferenceBeta;
      if (!optimize) {
        try {
          std::size_t used = 0;
          beta = std::stod(beta_arg, &used);
          if (used != beta_arg.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw DomainError("--beta must be a number or 'optimize'");
        }
        h_funcs(beta);
      }
      if (coefficients) {
        json j = {{"command", "bound"}, {"coefficients", bound_coefficients(beta).to_json()}};
        detail::write_payload(detail::dump(j), out_path, out);
        return kExitOk;
      }
      if (theorem.empty()) throw DomainError("bound: --theorem is required");
      ConstantsLedger ledger = ledger_arg.empty() ? ConstantsLedger{} : ConstantsLedger::from_json(json_arg(ledger_arg));
      MomentSummary ms;
      if (!from_sample.empty()) {
        Sample x = read_csv(from_sample);
        if (!w_arg.empty()) {
          SpdMatrix W(matrix_from_json(json_arg(w_arg)));
          if (W.dim() != x.d()) throw DomainError("--W dimension does not match the sample");
          RowMatrix t = x.data() * W.sqrt();
          x = Sample(std::move(t));
        }
        if (!compare.empty()) {
          Sample t = read_csv(compare);
          ms = summarize_pair(x, t, same_cov);
        } else {
          ms = summarize_sample(x);
        }
      }
      if (!moments_arg.empty()) {
        json mj = json_arg(moments_arg);
        if (from_sample.empty()) {
          ms = MomentSummary::from_json(mj);
        } else {
          if (!mj.contains("d")) mj["d"] = ms.d;
          if (!mj.contains("n")) mj["n"] = ms.n;
          MomentSummary over = MomentSummary::from_json(mj);
          ms.d = over.d;
          ms.n = over.n;
          for (const auto& [fname, field] : MomentSummary::fields())
            if (over.*field) ms.*field = over.*field;
        }
      }
      if (from_sample.empty() && moments_arg.empty()) throw DomainError("bound: need --from-sample or --moments");
      if (n_override > 0.0) ms.n = n_override;
      if (sigma2 >= 0.0) ms.sigma2 = sigma2;
      if (ms.d < 1 || !(ms.n >= 1.0)) throw DomainError("bound: moment summary needs d >= 1 and n >= 1");
      const SymmetricVariant var = variant == "full" ? SymmetricVariant::full : SymmetricVariant::max_norm;
      auto eval = [&](double b) { return evaluate_theorem(theorem, ms, b, ledger, same_cov, var); };
      BoundBreakdown br = (optimize && theorem != "ball-symmetric") ? optimize_beta(eval).breakdown : eval(beta);
      json j = {{"command", "bound"}};
      j["beta_policy"] = theorem == "ball-symmetric" ? "none" : (optimize ? "optimize" : "fixed");
      j["breakdown"] = br.to_json();
      j["moments"] = ms.to_json();
      j["ledger"] = ledger.to_json();
      detail::write_payload(detail::dump(j), out_path, out);
      return kExitOk;
    }
    if (*distance) {
      detail::require_seed(dist_seed, "distance");
      std::optional<DistributionSpec> sa, sb;
      if (spec_both.given()) sa = sb = spec_both.build("distance");
      if (!spec_a.spec.empty()) sa = spec_a.build("distance");
      if (!spec_b.spec.empty()) sb = spec_b.build("distance");
      auto load = [&](const std::string& path, const std::optional<DistributionSpec>& s, const char* tag) {
        if (!path.empty()) return read_csv(path);
        if (!s) throw DomainError(std::string("distance: sample ") + tag + " needs a CSV or a spec");
        return draw(*s, dist_n, derive_seed(seed, std::string("distance.") + tag));
      };
      Sample a = load(path_a, sa, "a");
      Sample b = load(path_b, sb, "b");
      json j = {{"command", "distance"}, {"seed", seed}};
      if (kind == "ks" || kind == "levy") {
        if (column < 0 || column >= a.d() || column >= b.d()) throw DomainError("distance: --column out of range");
        std::vector<double> va(a.data().col(column).begin(), a.data().col(column).end());
        std::vector<double> vb(b.data().col(column).begin(), b.data().col(column).end());
        j["kind"] = kind;
        j["column"] = column;
        j["value"] = kind == "ks" ? ks_two_sample_1d(va, vb) : levy_distance_1d(va, vb);
        j["n_mc"] = {{"a", a.n()}, {"b", b.n()}};
      } else {
        BallSearchPolicy policy;
        policy.random_centers = centers;
        policy.include_origin = !no_origin;
        policy.include_axes = !no_axes;
        policy.stderr_reps = stderr_reps;
        if (centers < 0) throw DomainError("--centers must be >= 0");
        std::uint64_t search_seed = derive_seed(seed, "distance.search");
        DistanceEstimate e = kind == "ball" ? delta_B_hat(a, b, policy, search_seed)
                                            : delta_H_hat(a, b, dirs, search_seed, stderr_reps);
        json ej = e.to_json();
        for (auto it = ej.begin(); it != ej.end(); ++it) j[it.key()] = it.value();
        if (cal_runs > 0) {
          if (!sa) throw DomainError("distance: calibration needs a spec for the null law");
          const Eigen::Index nc = cal_n > 0 ? cal_n : std::min<Eigen::Index>(std::min(a.n(), b.n()), 5000);
          NullCalibration cal =
              calibrate_null(kind, *sa, nc, cal_runs, cal_q, policy, dirs, derive_seed(seed, "distance.calibrate"));
          const double thr = cal.threshold(std::min(a.n(), b.n()));
          j["calibration"] = {{"runs", cal.runs},         {"n_cal", cal.n_cal},
                              {"quantile", cal.quantile}, {"scaled_quantile", cal.scaled_quantile},
                              {"threshold", thr},         {"below_threshold", e.value < thr}};
        }
      }
      detail::write_payload(detail::dump(j), out_path, out);
      return kExitOk;
    }
    if (*boot) {
      detail::require_seed(boot_seed, "bootstrap");
      json j = {{"command", "bootstrap"}, {"mode", mode}};
      if (mode == "quantile") {
        if (data_path.empty()) throw DomainError("bootstrap: quantile mode needs --data");
        Sample x = read_csv(data_path);
        SpdMatrix W(w_arg.empty() ? Matrix::Identity(x.d(), x.d()) : matrix_from_json(json_arg(w_arg)));
        BootstrapResult r = bootstrap_ball_quantile(x, W, alpha, B, seed);
        json rj = r.to_json();
        for (auto it = rj.begin(); it != rj.end(); ++it) j[it.key()] = it.value();
        j["n"] = x.n();
        j["d"] = x.d();
      } else {
        DistributionSpec s = boot_spec.build("bootstrap");
        SpdMatrix W(w_arg.empty() ? Matrix::Identity(s.d, s.d) : matrix_from_json(json_arg(w_arg)));
        std::optional<CertificateRequest> cert;
        if (boot_sigma2 >= 0.0) cert = CertificateRequest{boot_sigma2, beta_cert, {}};
        CoverageResult r = elliptical_coverage_experiment(s, W, alpha, boot_n, B, trials, seed, cert);
        json rj = r.to_json();
        for (auto it = rj.begin(); it != rj.end(); ++it) j[it.key()] = it.value();
        j["spec"] = spec_to_json(s);
      }
      detail::write_payload(detail::dump(j), out_path, out);
      err << "bootstrap " << mode << " done\n";
      return kExitOk;
    }
    if (*score) {
      json j = {{"command", "score-test"}};
      if (level_trials > 0) {
        detail::require_seed(score_seed, "score-test");
        if (test != "bootstrap-score") throw DomainError("score-test: --level-trials supports bootstrap-score only");
        DistributionSpec s = score_spec.build("score-test");
        LevelResult r = score_test_level(s, score_n, alpha, B, level_trials, seed);
        j["test"] = test;
        j["level"] = r.to_json();
        j["n"] = score_n;
        j["B"] = B;
        j["seed"] = seed;
        j["spec"] = spec_to_json(s);
        detail::write_payload(detail::dump(j), out_path, out);
        return kExitOk;
      }
      Sample scores = [&] {
        if (!data_path.empty()) return read_csv(data_path);
        detail::require_seed(score_seed, "score-test");
        return draw(score_spec.build("score-test"), score_n, derive_seed(seed, "score-test.data"));
      }();
      if (test == "bootstrap-score") {
        detail::require_seed(score_seed, "score-test");
        std::optional<CertificateRequest> cert;
        if (boot_sigma2 >= 0.0) cert = CertificateRequest{boot_sigma2, beta_cert, {}};
        ScoreTestResult r = bootstrap_score_test(scores, alpha, B, seed, cert);
        json rj = r.to_json();
        for (auto it = rj.begin(); it != rj.end(); ++it) j[it.key()] = it.value();
      } else {
        Matrix info = info_arg.empty() ? Matrix(static_cast<double>(scores.n()) * scores.covariance())
                                       : matrix_from_json(json_arg(info_arg));
        std::optional<MomentSummary> ms;
        if (rao_cert) ms = summarize_sample(scores);
        RaoTestResult r = rao_score_test(scores, SpdMatrix(info), alpha, ms);
        json rj = r.to_json();
        for (auto it = rj.begin(); it != rj.end(); ++it) j[it.key()] = it.value();
        j["information"] = info_arg.empty() ? "n * sample covariance of scores" : "supplied";
      }
      j["n"] = scores.n();
      j["d"] = scores.d();
      detail::write_payload(detail::dump(j), out_path, out);
      return kExitOk;
    }
    if (*exp) {
      detail::require_seed(exp_seed, "experiment");
      std::vector<int> ds = int_list(d_list);
      std::ostringstream csv;
      if (name == "portnoy") {
        PortnoyResult r = portnoy_scaling_experiment(ds, exp_n, reps, seed);
        csv << "row,d,n,reps,median_abs_D,median_abs_D_indep,median_abs_null,null_excess,mean_norm_sq,slope,"
               "slope_stderr,seed\n";
        for (const auto& row : r.rows)
          csv << "data," << row.d << "," << row.n << "," << row.reps << "," << detail::csv_num(row.median_abs_D)
              << "," << detail::csv_num(row.median_abs_D_indep) << "," << detail::csv_num(row.median_abs_null) << ","
              << detail::csv_num(row.null_excess) << "," << detail::csv_num(row.mean_norm_sq) << ",,," << seed
              << "\n";
        csv << "fit,,," << reps << ",,,,,," << detail::csv_num(r.fit.slope) << ","
            << detail::csv_num(r.fit.slope_stderr) << "," << seed << "\n";
        err << "portnoy slope " << r.fit.slope << " +- " << r.fit.slope_stderr << "\n";
      } else if (name == "anti-concentration") {
        csv << "d,eps,ratio,seed\n";
        for (int d : ds)
          csv << d << "," << detail::csv_num(eps) << ","
              << detail::csv_num(anti_concentration_probe(d, eps, default_radius_grid(d))) << "," << seed << "\n";
      } else {
        DistributionSpec base;
        base.family = exp_spec.family.empty() ? "laplace_product" : exp_spec.family;
        csv << "d,n,family,estimate,stderr,bound_total,seed\n";
        for (std::size_t k = 0; k < ds.size(); ++k) {
          if (k > 0 && ds[k] <= ds[k - 1]) throw DomainError("experiment: --d-list must ascend");
          DistributionSpec s = base;
          s.d = ds[k];
          s.validate();
          if (!s.parametric()) throw DomainError("experiment: distance-sweep needs a parametric family");
          Sample sums = sum_replicates(s, exp_n, reps, derive_seed(seed, "sweep.sums", ds[k]));
          Sample z = sample_gaussian(SpdMatrix(*s.population_covariance()), reps,
                                     derive_seed(seed, "sweep.gauss", ds[k]));
          BallSearchPolicy policy;
          policy.random_centers = centers;
          DistanceEstimate e = delta_B_hat(sums, z, policy, derive_seed(seed, "sweep.search", ds[k]));
          MomentSummary ms = summarize_sample(draw(s, 20000, derive_seed(seed, "sweep.pilot", ds[k])));
          ms.n = static_cast<double>(exp_n);
          double total = bound_ball_normal(ms, kReferenceBeta, {}).total;
          csv << ds[k] << "," << exp_n << "," << s.family << "," << detail::csv_num(e.value) << ","
              << detail::csv_num(e.stderr_) << "," << detail::csv_num(total) << "," << seed << "\n";
        }
      }
      detail::write_payload(csv.str(), out_path, out);
      return kExitOk;
    }
    if (*samp) {
      detail::require_seed(samp_seed, "sample");
      std::ostringstream csv;
      if (!construct_from.empty()) {
        Sample x = read_csv(construct_from);
        std::optional<DistributionSpec> s;
        if (samp_spec.given()) s = samp_spec.build("sample");
        ConstructedY y = construct_Y(x, construct_beta, seed, s);
        write_csv(csv, y.y);
        err << "construction policy " << y.copy_policy << ", compare with the first " << y.reference_rows
            << " rows\n";
      } else {
        write_csv(csv, draw(samp_spec.build("sample"), samp_n, seed));
      }
      detail::write_payload(csv.str(), out_path, out);
      return kExitOk;
    }
    throw DomainError("no command");
  } catch (const InfeasibleError& e) {
    json j = {{"error", "infeasible"}, {"condition", e.condition()}, {"message", e.what()}};
    detail::write_payload(detail::dump(j), out_path, out);
    err << "infeasible certificate: " << e.condition() << "\n";
    return kExitInfeasible;
  } catch (const MissingInputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace edgebound::cli
