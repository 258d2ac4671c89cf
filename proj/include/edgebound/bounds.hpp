#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgebound/errors.hpp"

namespace edgebound {

using json = nlohmann::ordered_json;

inline constexpr double kReferenceBeta = 0.829;

struct ConstantsLedger {
  double M3 = 54.1;
  double M4 = 9.5;
  double M6 = 2.9;
  double C_ell2 = 1.0;
  double C_phi4 = 1.0;
  double C_phi6 = 1.0;
  double C_phi_H4 = 1.0;  // smoothing constant for the half-space class

  double C_B4() const { return M4 * C_ell2 * C_phi4; }
  double C_H4() const { return M4 * C_phi_H4; }
  double C_B6() const { return M6 * C_ell2 * C_phi6; }

  void validate() const {
    if (M3 < 54.1 || M4 < 9.5 || M6 < 2.9) throw DomainError("ledger: M(K) below the established values");
    if (C_ell2 < 1.0 || C_phi4 < 1.0 || C_phi6 < 1.0 || C_phi_H4 < 1.0)
      throw DomainError("ledger: C_ell2 and C_phi constants must be >= 1");
  }

  json to_json() const {
    return {{"M3", M3},         {"M4", M4},         {"M6", M6},         {"C_ell2", C_ell2},
            {"C_phi4", C_phi4}, {"C_phi6", C_phi6}, {"C_phi_H4", C_phi_H4}, {"C_B4", C_B4()},
            {"C_H4", C_H4()},   {"C_B6", C_B6()}};
  }

  // Overrides any of the base constants present in j.
  static ConstantsLedger from_json(const json& j) {
    ConstantsLedger c;
    for (auto [key, field] : {std::pair{"M3", &ConstantsLedger::M3}, std::pair{"M4", &ConstantsLedger::M4},
                              std::pair{"M6", &ConstantsLedger::M6}, std::pair{"C_ell2", &ConstantsLedger::C_ell2},
                              std::pair{"C_phi4", &ConstantsLedger::C_phi4},
                              std::pair{"C_phi6", &ConstantsLedger::C_phi6},
                              std::pair{"C_phi_H4", &ConstantsLedger::C_phi_H4}}) {
      if (j.contains(key)) c.*field = j.at(key).get<double>();
    }
    c.validate();
    return c;
  }
};

struct Term {
  std::string name;
  double value;
};

struct BoundBreakdown {
  std::string theorem;
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::vector<Term> terms;
  double total = 0.0;
  json inputs = json::object();

  void add(std::string name, double value) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw DomainError("bound term " + name + " is negative or non-finite");
    terms.push_back({std::move(name), value});
    total += value;
  }

  double term(const std::string& name) const {
    for (const auto& t : terms)
      if (t.name == name) return t.value;
    throw DomainError("no bound term named " + name);
  }

  json to_json() const {
    json t = json::array();
    for (const auto& x : terms) t.push_back({{"name", x.name}, {"value", x.value}});
    json out = {{"theorem", theorem}};
    out["beta"] = std::isnan(beta) ? json(nullptr) : json(beta);
    out["terms"] = t;
    out["total"] = total;
    out["inputs"] = inputs;
    return out;
  }
};

// Every moment functional consumed by the bound formulas. Each bound reads
// only the fields it needs and reports the missing ones by name.
struct MomentSummary {
  int d = 0;
  double n = 0;

  // Covariance of X (or of the transformed vector for elliptical and score certificates).
  std::optional<double> sigma_op, sigma_inv_op, sigma_fro, lambda_min;

  // Whitened moments of X: E|S^-1/2 X|^4 and the third / fourth tensor norms.
  std::optional<double> whitened_fourth_norm;
  std::optional<double> third_fro, third_op, third_max, third_nnz;
  std::optional<double> fourth_op;

  // Same-covariance comparison with T: whitened differences and sums.
  std::optional<double> third_diff_fro, third_diff_op, third_diff_max, third_diff_nnz;
  std::optional<double> Vbar4;   // E|S^-1/2 X|^4 + E|S^-1/2 T|^4
  std::optional<double> VbarT4;  // |E(S^-1/2 X)^4| + |E(S^-1/2 T)^4|, operator norms

  // Different-covariance comparison with T: raw moments.
  std::optional<double> lambda0_sq;  // min of the smallest eigenvalues of S and S_T
  std::optional<double> cov_diff_fro, cov_diff_op;
  std::optional<double> third_raw_diff_fro, third_raw_diff_op;
  std::optional<double> V4;   // E|X|^4 + E|T|^4
  std::optional<double> VT4;  // |E X^4| + |E T^4|, operator norms
  std::optional<double> v4;   // |S|^2 + |S_T|^2

  // Symmetric case.
  std::optional<double> lambda_z_sq;
  std::optional<double> sixth_XL;       // E(|X|^6 + |L|^6)
  std::optional<double> fourth_gauss_diff_fro, fourth_gauss_diff_max;  // E X^4 - E Z^4
  std::optional<double> sixth_UZ;       // E|U_L|^6 + E|Z|^6
  std::optional<double> m6_sym;

  // Bootstrap certificates.
  std::optional<double> sigma2;              // sub-Gaussian variance factor
  std::optional<double> centered_third_fro;  // |E(X - mu)^3|_F
  std::optional<double> centered_fourth_norm;  // E|X - mu|^4
  std::optional<double> lambda0_sq_override;

  using Field = std::optional<double> MomentSummary::*;
  static const std::vector<std::pair<const char*, Field>>& fields() {
    static const std::vector<std::pair<const char*, Field>> table = {
        {"sigma_op", &MomentSummary::sigma_op},
        {"sigma_inv_op", &MomentSummary::sigma_inv_op},
        {"sigma_fro", &MomentSummary::sigma_fro},
        {"lambda_min", &MomentSummary::lambda_min},
        {"whitened_fourth_norm", &MomentSummary::whitened_fourth_norm},
        {"third_fro", &MomentSummary::third_fro},
        {"third_op", &MomentSummary::third_op},
        {"third_max", &MomentSummary::third_max},
        {"third_nnz", &MomentSummary::third_nnz},
        {"fourth_op", &MomentSummary::fourth_op},
        {"third_diff_fro", &MomentSummary::third_diff_fro},
        {"third_diff_op", &MomentSummary::third_diff_op},
        {"third_diff_max", &MomentSummary::third_diff_max},
        {"third_diff_nnz", &MomentSummary::third_diff_nnz},
        {"Vbar4", &MomentSummary::Vbar4},
        {"VbarT4", &MomentSummary::VbarT4},
        {"lambda0_sq", &MomentSummary::lambda0_sq},
        {"cov_diff_fro", &MomentSummary::cov_diff_fro},
        {"cov_diff_op", &MomentSummary::cov_diff_op},
        {"third_raw_diff_fro", &MomentSummary::third_raw_diff_fro},
        {"third_raw_diff_op", &MomentSummary::third_raw_diff_op},
        {"V4", &MomentSummary::V4},
        {"VT4", &MomentSummary::VT4},
        {"v4", &MomentSummary::v4},
        {"lambda_z_sq", &MomentSummary::lambda_z_sq},
        {"sixth_XL", &MomentSummary::sixth_XL},
        {"fourth_gauss_diff_fro", &MomentSummary::fourth_gauss_diff_fro},
        {"fourth_gauss_diff_max", &MomentSummary::fourth_gauss_diff_max},
        {"sixth_UZ", &MomentSummary::sixth_UZ},
        {"m6_sym", &MomentSummary::m6_sym},
        {"sigma2", &MomentSummary::sigma2},
        {"centered_third_fro", &MomentSummary::centered_third_fro},
        {"centered_fourth_norm", &MomentSummary::centered_fourth_norm},
        {"lambda0_sq_override", &MomentSummary::lambda0_sq_override},
    };
    return table;
  }

  json to_json() const {
    json out = {{"d", d}, {"n", n}};
    for (const auto& [name, field] : fields())
      if (this->*field) out[name] = *(this->*field);
    return out;
  }

  static MomentSummary from_json(const json& j) {
    MomentSummary ms;
    ms.d = j.at("d").get<int>();
    ms.n = j.at("n").get<double>();
    for (const auto& [name, field] : fields()) {
      if (!j.contains(name)) continue;
      double v = j.at(name).get<double>();
      if (!(v >= 0.0)) throw DomainError(std::string("moment summary: ") + name + " must be >= 0");
      ms.*field = v;
    }
    return ms;
  }

  void require(std::initializer_list<Field> needed) const {
    std::vector<std::string> missing;
    for (Field f : needed) {
      if (this->*f) continue;
      for (const auto& [name, field] : fields())
        if (field == f) missing.emplace_back(name);
    }
    if (d < 1) missing.emplace_back("d");
    if (!(n >= 1)) missing.emplace_back("n");
    if (!missing.empty()) throw MissingInputError(missing);
  }
};

struct HFuncs {
  double h1, h2, h3;
};

inline HFuncs h_funcs(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("h_funcs: beta must be in (0, 1)");
  const double b2 = beta * beta;
  const double b4 = b2 * b2;
  const double u = 1.0 - b2;
  const double h2 = u * u / b4;
  return {h2 + 1.0 / (u * b4), h2, 3.0 * (1.0 - u * u) / b4};
}

namespace detail {

inline const double kSqrt6 = std::sqrt(6.0);
inline const double kSqrt2 = std::numbers::sqrt2;

// The three licensed surrogates of the sublinear third-moment functional;
// max * sqrt(N) applies only when N <= d^2.
inline json r3_surrogates(int d, double fro, std::optional<double> op, std::optional<double> mx,
                          std::optional<double> nnz, double& chosen, std::string& chosen_name) {
  json s = json::object();
  chosen = fro;
  chosen_name = "frobenius";
  s["frobenius"] = fro;
  if (op) {
    double v = *op * d;
    s["operator_times_d"] = v;
    if (v < chosen) {
      chosen = v;
      chosen_name = "operator_times_d";
    }
  }
  if (mx && nnz) {
    if (*nnz <= static_cast<double>(d) * d) {
      double v = *mx * std::sqrt(*nnz);
      s["max_times_sqrtN"] = v;
      if (v < chosen) {
        chosen = v;
        chosen_name = "max_times_sqrtN";
      }
    } else {
      s["max_times_sqrtN"] = nullptr;  // N > d^2: not licensed
    }
  }
  return s;
}

}  // namespace detail

// Normal approximation over Euclidean balls with whitened moments.
inline BoundBreakdown bound_ball_normal(const MomentSummary& ms, double beta, const ConstantsLedger& ledger) {
  ms.require({&MomentSummary::whitened_fourth_norm, &MomentSummary::third_fro, &MomentSummary::sigma_op,
              &MomentSummary::sigma_inv_op});
  ledger.validate();
  const auto [h1, h2, h3] = h_funcs(beta);
  (void)h3;
  const double d = ms.d, n = ms.n, dd = d * d + 2.0 * d;
  const double b3 = beta * beta * beta, b4 = b3 * beta;
  const double V = *ms.whitened_fourth_norm;
  BoundBreakdown out;
  out.theorem = "ball-normal";
  out.beta = beta;
  double r3 = 0.0;
  std::string r3_name;
  json sur = detail::r3_surrogates(ms.d, *ms.third_fro, ms.third_op, ms.third_max, ms.third_nnz, r3, r3_name);
  out.add("R3-term", r3 / (detail::kSqrt6 * b3) / std::sqrt(n));
  out.add("CB4-term", 2.0 * ledger.C_B4() * *ms.sigma_inv_op * *ms.sigma_op *
                          std::sqrt((h1 + 0.25 / b4) * V + dd) / std::sqrt(n));
  out.add("remainder-term", (h1 * V + h2 * dd) / (2.0 * detail::kSqrt6) / n);
  out.inputs = {{"d", ms.d}, {"n", n}, {"R3_surrogates", sur}, {"R3_used", r3_name},
                {"whitened_fourth_norm", V}, {"condition", *ms.sigma_inv_op * *ms.sigma_op},
                {"C_B4", ledger.C_B4()}};
  return out;
}

// Nonasymptotic Rao score test: the ball-normal shape with the Frobenius norm
// of the standardized third moment as surrogate.
inline BoundBreakdown score2_bound(const MomentSummary& ms, double beta, const ConstantsLedger& ledger) {
  MomentSummary fro_only = ms;
  fro_only.third_op.reset();
  fro_only.third_max.reset();
  fro_only.third_nnz.reset();
  BoundBreakdown out = bound_ball_normal(fro_only, beta, ledger);
  out.theorem = "score-rao";
  return out;
}

inline BoundBreakdown bound_ball_general(const MomentSummary& ms, double beta, const ConstantsLedger& ledger,
                                         bool same_cov) {
  ledger.validate();
  const auto [h1, h2, h3] = h_funcs(beta);
  (void)h2;
  (void)h3;
  const double d = ms.d, n = ms.n, dd = d * d + 2.0 * d;
  const double b2 = beta * beta, b3 = b2 * beta, b4 = b3 * beta;
  BoundBreakdown out;
  out.beta = beta;
  if (same_cov) {
    ms.require({&MomentSummary::Vbar4, &MomentSummary::third_diff_fro, &MomentSummary::sigma_op,
                &MomentSummary::sigma_inv_op});
    out.theorem = "ball-general-same-cov";
    double r3 = 0.0;
    std::string r3_name;
    json sur = detail::r3_surrogates(ms.d, *ms.third_diff_fro, ms.third_diff_op, ms.third_diff_max,
                                     ms.third_diff_nnz, r3, r3_name);
    const double V = *ms.Vbar4;
    out.add("R3-term", r3 / (detail::kSqrt6 * b3) / std::sqrt(n));
    out.add("CB4-term", std::sqrt(8.0) * ledger.C_B4() * *ms.sigma_inv_op * *ms.sigma_op *
                            std::sqrt((h1 + 0.25 / b4) * V + 2.0 * d * d + 4.0 * d) / std::sqrt(n));
    out.add("remainder-term", h1 * V / (2.0 * detail::kSqrt6) / n);
    out.inputs = {{"d", ms.d}, {"n", n}, {"R3_surrogates", sur}, {"R3_used", r3_name}, {"Vbar4", V}};
    return out;
  }
  ms.require({&MomentSummary::lambda0_sq, &MomentSummary::cov_diff_fro, &MomentSummary::third_raw_diff_fro,
              &MomentSummary::V4, &MomentSummary::v4});
  const double l0 = *ms.lambda0_sq;
  if (!(l0 > 0.0)) throw DomainError("bound_ball_general: lambda0^2 must be > 0");
  out.theorem = "ball-general-diff-cov";
  const double lam = std::sqrt(l0);
  double r3 = 0.0;
  std::string r3_name;
  json sur = detail::r3_surrogates(ms.d, *ms.third_raw_diff_fro / (l0 * lam),
                                   ms.third_raw_diff_op ? std::optional<double>(*ms.third_raw_diff_op / (l0 * lam))
                                                        : std::nullopt,
                                   std::nullopt, std::nullopt, r3, r3_name);
  const double V = *ms.V4, v = *ms.v4;
  out.add("cov-diff-term", *ms.cov_diff_fro / (detail::kSqrt2 * b2 * l0));
  out.add("R3-term", r3 / (detail::kSqrt6 * b3) / std::sqrt(n));
  out.add("CB4-term", 4.0 * detail::kSqrt2 * ledger.C_B4() / l0 * std::sqrt(h1 * V + dd * (v + 0.5)) / std::sqrt(n));
  out.add("remainder-term", 2.0 / (detail::kSqrt6 * l0 * l0) * (h1 * V + dd * v) / n);
  out.inputs = {{"d", ms.d}, {"n", n}, {"lambda0_sq", l0}, {"R3_surrogates", sur}, {"R3_used", r3_name},
                {"V4", V}, {"v4", v}};
  return out;
}

// Normal approximation over half-spaces; dimension-free.
inline BoundBreakdown bound_halfspace_normal(const MomentSummary& ms, double beta, const ConstantsLedger& ledger) {
  ms.require({&MomentSummary::third_op, &MomentSummary::fourth_op});
  ledger.validate();
  const auto [h1, h2, h3] = h_funcs(beta);
  const double n = ms.n, b3 = beta * beta * beta, b4 = b3 * beta;
  const double op4 = *ms.fourth_op;
  BoundBreakdown out;
  out.theorem = "halfspace-normal";
  out.beta = beta;
  out.add("R3-term", *ms.third_op / (detail::kSqrt6 * b3) / std::sqrt(n));
  out.add("CH4-term", ledger.C_H4() * std::sqrt((h1 + 1.0 / b4) * op4 + h3) / std::sqrt(n));
  out.add("remainder-term", (h1 * op4 + 3.0 * h2) / (2.0 * detail::kSqrt6) / n);
  out.inputs = {{"d", ms.d}, {"n", n}, {"third_op", *ms.third_op}, {"fourth_op", op4}, {"C_H4", ledger.C_H4()},
                {"fourth_op_at_least_one", op4 >= 1.0}};
  return out;
}

inline BoundBreakdown bound_halfspace_general(const MomentSummary& ms, double beta, const ConstantsLedger& ledger,
                                              bool same_cov) {
  ledger.validate();
  const auto [h1, h2, h3] = h_funcs(beta);
  (void)h2;
  const double n = ms.n;
  const double b2 = beta * beta, b3 = b2 * beta, b4 = b3 * beta;
  BoundBreakdown out;
  out.beta = beta;
  if (same_cov) {
    ms.require({&MomentSummary::third_diff_op, &MomentSummary::VbarT4});
    out.theorem = "halfspace-general-same-cov";
    const double V = *ms.VbarT4;
    out.add("R3-term", *ms.third_diff_op / (detail::kSqrt6 * b3) / std::sqrt(n));
    out.add("CH4-term", ledger.C_H4() * std::sqrt((h1 + 1.0 / b4) * V + 2.0 * h3) / std::sqrt(n));
    out.add("remainder-term", h1 * V / (2.0 * detail::kSqrt6) / n);
    out.inputs = {{"d", ms.d}, {"n", n}, {"VbarT4", V}};
    return out;
  }
  ms.require({&MomentSummary::lambda0_sq, &MomentSummary::cov_diff_op, &MomentSummary::third_raw_diff_op,
              &MomentSummary::VT4, &MomentSummary::v4});
  const double l0 = *ms.lambda0_sq;
  if (!(l0 > 0.0)) throw DomainError("bound_halfspace_general: lambda0^2 must be > 0");
  out.theorem = "halfspace-general-diff-cov";
  const double V = *ms.VT4, v = *ms.v4;
  out.add("cov-diff-term", *ms.cov_diff_op / (detail::kSqrt2 * b2 * l0));
  out.add("R3-term", *ms.third_raw_diff_op / (detail::kSqrt6 * b3 * l0 * std::sqrt(l0)) / std::sqrt(n));
  out.add("CH4-term", 4.0 * detail::kSqrt2 * ledger.C_H4() / l0 * std::sqrt(h1 * V + 3.0 * (v + 0.5)) / std::sqrt(n));
  out.add("remainder-term", 2.0 / (detail::kSqrt6 * l0 * l0) * (h1 * V + 3.0 * v) / n);
  out.inputs = {{"d", ms.d}, {"n", n}, {"lambda0_sq", l0}, {"VT4", V}, {"v4", v}};
  return out;
}

enum class SymmetricVariant { full, max_norm };

// Symmetric X with a five-moment-matching L = Z_L + U_L. No free beta.
inline BoundBreakdown bound_ball_symmetric(const MomentSummary& ms, const ConstantsLedger& ledger,
                                           SymmetricVariant variant = SymmetricVariant::full) {
  ledger.validate();
  if (ms.lambda_z_sq && !(*ms.lambda_z_sq > 0.0)) throw DomainError("bound_ball_symmetric: lambda_z^2 must be > 0");
  const double n = ms.n, d = ms.d;
  BoundBreakdown out;
  if (variant == SymmetricVariant::full) {
    ms.require({&MomentSummary::lambda_z_sq, &MomentSummary::sixth_XL, &MomentSummary::fourth_gauss_diff_fro,
                &MomentSummary::sixth_UZ});
    const double lz2 = *ms.lambda_z_sq, lz6 = lz2 * lz2 * lz2;
    out.theorem = "ball-symmetric";
    out.add("CB6-term", ledger.C_B6() * std::pow(*ms.sixth_XL / lz6, 0.25) / std::sqrt(n));
    out.add("fourth-moment-term", *ms.fourth_gauss_diff_fro / (std::sqrt(24.0) * lz2 * lz2) / n);
    out.add("sixth-moment-term", *ms.sixth_UZ / (std::sqrt(720.0) * lz6) / (n * n));
    out.inputs = {{"d", ms.d}, {"n", n}, {"lambda_z_sq", lz2}, {"C_B6", ledger.C_B6()}};
    return out;
  }
  ms.require({&MomentSummary::lambda_z_sq, &MomentSummary::m6_sym, &MomentSummary::fourth_gauss_diff_max});
  const double lz2 = *ms.lambda_z_sq, lz6 = lz2 * lz2 * lz2, m6 = *ms.m6_sym;
  out.theorem = "ball-symmetric-max-norm";
  out.add("fourth-moment-term", *ms.fourth_gauss_diff_max * d / (std::sqrt(8.0) * lz2 * lz2) / n);
  out.add("CB6-term", ledger.C_B6() * std::pow(m6 / lz6, 0.25) * std::pow(d, 0.75) / std::sqrt(n));
  out.add("sixth-moment-term", m6 / lz6 * d * d * d / std::sqrt(720.0) / (n * n));
  out.inputs = {{"d", ms.d}, {"n", n}, {"lambda_z_sq", lz2}, {"m6_sym", m6}, {"C_B6", ledger.C_B6()}};
  return out;
}

struct ConcentrationConsts {
  double t, C1, C2;
};

// t_* = log n + log(2dn + d^2 + 3d), C1(t) = 2(4 sqrt(2t) + 3t/sqrt n),
// C2(t) = 4 sqrt2 (sqrt8 t + t^1.5/sqrt n).
inline ConcentrationConsts concentration_consts(double d, double n, std::optional<double> t = std::nullopt) {
  if (!(d >= 1.0 && n >= 1.0)) throw DomainError("concentration_consts: need d, n >= 1");
  const double tt = t ? *t : std::log(n) + std::log(2.0 * d * n + d * d + 3.0 * d);
  if (tt < 0.0) throw DomainError("concentration_consts: t must be >= 0");
  const double rn = std::sqrt(n);
  return {tt, 2.0 * (4.0 * std::sqrt(2.0 * tt) + 3.0 * tt / rn),
          4.0 * detail::kSqrt2 * (std::sqrt(8.0) * tt + std::pow(tt, 1.5) / rn)};
}

inline const char* kBootstrapCondition = "sigma2*(d/sqrt(n))*C1* < lambda_min(Sigma)";

// Bootstrap approximation error with probability >= 1 - 1/n. The moment
// summary carries the covariance and moments of the vector being resampled
// (X, W^1/2 X, or the per-observation score for the score test).
inline BoundBreakdown bootstrap_delta(const MomentSummary& ms, double beta, const ConstantsLedger& ledger) {
  ms.require({&MomentSummary::sigma2, &MomentSummary::lambda_min, &MomentSummary::sigma_op, &MomentSummary::sigma_fro,
              &MomentSummary::centered_third_fro, &MomentSummary::centered_fourth_norm});
  ledger.validate();
  const auto [h1, h2, h3] = h_funcs(beta);
  (void)h2;
  (void)h3;
  const double d = ms.d, n = ms.n, dd = d * d + 2.0 * d;
  const double b2 = beta * beta, b3 = b2 * beta;
  const double s2 = *ms.sigma2, s = std::sqrt(s2);
  const ConcentrationConsts cc = concentration_consts(d, n);
  const double a = s2 * (d / std::sqrt(n)) * cc.C1;
  const double lmin = *ms.lambda_min;
  const bool feasible = a < lmin;
  if (!feasible && !ms.lambda0_sq_override)
    throw InfeasibleError(kBootstrapCondition, "lhs = " + std::to_string(a) + ", lambda_min = " + std::to_string(lmin));
  const double l0 = ms.lambda0_sq_override ? *ms.lambda0_sq_override : lmin - a;
  if (!(l0 > 0.0)) throw DomainError("bootstrap_delta: lambda0^2 must be > 0");
  const double l0_32 = l0 * std::sqrt(l0);
  const double sig = *ms.sigma_op;
  const double extra = 8.0 * (1.0 + 1.0 / (n * n)) * std::pow(2.0 * s2 * (d / n) * cc.t, 2.0);
  const double fourth = *ms.centered_fourth_norm + extra;
  BoundBreakdown out;
  out.theorem = "bootstrap";
  out.beta = beta;
  out.add("cov-estimation-term", a / (detail::kSqrt2 * b2 * l0));
  out.add("third-moment-estimation-term",
          (4.0 * s * std::sqrt(2.0 * d * cc.t / (n * n)) * (*ms.sigma_fro + s2 * (d / n) * cc.t) +
           s2 * std::pow(d, 1.5) / n * cc.C2 * (1.0 + 3.0 / std::sqrt(n))) /
              (detail::kSqrt6 * b3 * l0_32));
  out.add("third-moment-term", *ms.centered_third_fro / (detail::kSqrt6 * b3 * l0_32) / std::sqrt(n));
  out.add("CB4-term", 4.0 * detail::kSqrt2 * ledger.C_B4() / l0 *
                          std::sqrt(h1 * fourth + dd * (3.0 * sig * sig + 2.0 * a * a + 0.5)) / std::sqrt(n));
  out.add("remainder-term", 2.0 / (detail::kSqrt6 * l0 * l0) * (h1 * fourth + dd * (3.0 * sig * sig + 2.0 * a * a)) / n);
  out.inputs = {{"d", ms.d},           {"n", n},
                {"sigma2", s2},        {"t_star", cc.t},
                {"C1_star", cc.C1},    {"C2_star", cc.C2},
                {"condition_lhs", a},  {"lambda_min", lmin},
                {"lambda0_sq", l0},    {"lambda0_sq_overridden", ms.lambda0_sq_override.has_value()},
                {"condition_holds", feasible}};
  return out;
}

// Elliptical confidence regions: delta_B for W^1/2 X plus 1/n.
inline BoundBreakdown delta_W(const MomentSummary& ms_w, double beta, const ConstantsLedger& ledger) {
  BoundBreakdown out = bootstrap_delta(ms_w, beta, ledger);
  out.theorem = "elliptical";
  out.add("quantile-term", 1.0 / ms_w.n);
  return out;
}

// Bootstrap score test: delta_B for the per-observation score, with its own
// variance factor sigma_s^2 used throughout.
inline BoundBreakdown delta_R(const MomentSummary& ms_s, double beta, const ConstantsLedger& ledger) {
  BoundBreakdown out = bootstrap_delta(ms_s, beta, ledger);
  out.theorem = "score-bootstrap";
  return out;
}

struct BetaOptimum {
  double beta;
  BoundBreakdown breakdown;
};

// Golden-section search on (0.05, 0.995) from five subintervals; the best of
// those and the reference beta is returned.
inline BetaOptimum optimize_beta(const std::function<BoundBreakdown(double)>& evaluate, double tol = 1e-4) {
  constexpr double lo = 0.05, hi = 0.995;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto total = [&](double b) {
    try {
      double t = evaluate(b).total;
      return std::isfinite(t) ? t : std::numeric_limits<double>::infinity();
    } catch (const InfeasibleError&) {
      throw;
    } catch (const MissingInputError&) {
      throw;
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double best_beta = kReferenceBeta;
  double best = total(kReferenceBeta);
  constexpr int kStarts = 5;
  for (int s = 0; s < kStarts; ++s) {
    double a = lo + (hi - lo) * s / kStarts;
    double b = lo + (hi - lo) * (s + 1) / kStarts;
    double c = b - phi * (b - a), e = a + phi * (b - a);
    double fc = total(c), fe = total(e);
    while (b - a > tol) {
      if (fc <= fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - phi * (b - a);
        fc = total(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + phi * (b - a);
        fe = total(e);
      }
    }
    double m = 0.5 * (a + b);
    for (auto [x, fx] : {std::pair{c, fc}, std::pair{e, fe}, std::pair{m, total(m)}}) {
      if (fx < best) {
        best = fx;
        best_beta = x;
      }
    }
  }
  if (!std::isfinite(best)) throw DomainError("optimize_beta: evaluator is non-finite everywhere");
  return {best_beta, evaluate(best_beta)};
}

struct ConstantsCheck {
  int K;
  double M, a, b;
  double lhs;            // with 2 sqrt2 as the third coefficient
  double lhs_as_printed; // with 4 sqrt2 as the third coefficient
  bool ok;
};

// Five-term constraint on (a, b, M) for the smoothing constant M(K).
inline ConstantsCheck verify_constants_constraint(int K, double M, double a, double b) {
  if (K != 3 && K != 4 && K != 6) throw DomainError("verify_constants_constraint: K must be 3, 4 or 6");
  if (!(M > 0.0 && a > 0.0 && b > 0.0)) throw DomainError("verify_constants_constraint: M, a, b must be > 0");
  auto fact = [](int k) { return std::tgamma(k + 1.0); };
  const double ratio = (2.0 * M + a) / M;
  const double t1 = a / M;
  const double t2 = 1.5 * std::pow(a / 2.0, -(K - 2)) / fact(K - 2) * ratio;
  const double t3_unit = b / std::pow(a / 2.0, K - 1) * ratio / fact(K);
  const double t4 = 2.0 * detail::kSqrt2 / (std::sqrt(fact(K)) * std::pow(b, K - 2));
  const double t5 = std::pow(2.0, (K - 3.0) / (K - 2.0)) * 2.6 / std::pow(M, K - 2);
  ConstantsCheck out{K, M, a, b, 0.0, 0.0, false};
  out.lhs = t1 + t2 + 2.0 * detail::kSqrt2 * t3_unit + t4 + t5;
  out.lhs_as_printed = t1 + t2 + 4.0 * detail::kSqrt2 * t3_unit + t4 + t5;
  out.ok = out.lhs <= 1.0;
  return out;
}

struct ConstantsTuple {
  int K;
  double M, a, b;
};

inline const std::vector<ConstantsTuple>& reference_constant_tuples() {
  static const std::vector<ConstantsTuple> tuples = {{3, 54.1, 27.46, 14.0}, {4, 9.5, 6.33, 8.5}, {6, 2.9, 2.07, 8.5}};
  return tuples;
}

// Numeric coefficients of the ball and half-space normal bounds at beta:
// third-moment factor, fourth-moment factors under the square root, and the
// n^-1 factors.
struct BoundCoefficients {
  double beta;
  double third;            // 1 / (sqrt6 beta^3)
  double ball_fourth;      // h1 + 1 / (4 beta^4)
  double ball_rem_fourth;  // h1 / (2 sqrt6)
  double ball_rem_dim;     // h2 / (2 sqrt6)
  double half_fourth;      // h1 + beta^-4
  double half_const;       // h3
  double half_rem_const;   // 3 h2 / (2 sqrt6)

  json to_json() const {
    return {{"beta", beta},
            {"third", third},
            {"ball_fourth", ball_fourth},
            {"ball_remainder_fourth", ball_rem_fourth},
            {"ball_remainder_dim", ball_rem_dim},
            {"halfspace_fourth", half_fourth},
            {"halfspace_const", half_const},
            {"halfspace_remainder_const", half_rem_const}};
  }
};

inline BoundCoefficients bound_coefficients(double beta) {
  const auto [h1, h2, h3] = h_funcs(beta);
  const double b3 = beta * beta * beta, b4 = b3 * beta;
  const double s = 2.0 * detail::kSqrt6;
  return {beta, 1.0 / (detail::kSqrt6 * b3), h1 + 0.25 / b4, h1 / s, h2 / s, h1 + 1.0 / b4, h3, 3.0 * h2 / s};
}

}  // namespace edgebound
