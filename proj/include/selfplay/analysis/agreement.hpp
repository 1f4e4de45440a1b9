#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfplay/evaluator/reply.hpp"

namespace selfplay {

/// Cohen's kappa. Empty when chance agreement is 1 (both raters constant
/// on the same label), where the statistic is undefined.
template <class T>
std::optional<double> cohen_kappa(const std::vector<T>& a, const std::vector<T>& b,
                                  const std::vector<T>& domain) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("cohen_kappa: label vectors must be non-empty and equal length");
  auto slot = [&](const T& v) {
    const auto it = std::find(domain.begin(), domain.end(), v);
    if (it == domain.end()) throw std::invalid_argument("cohen_kappa: label outside domain");
    return static_cast<std::size_t>(it - domain.begin());
  };
  const double n = static_cast<double>(a.size());
  std::vector<double> ma(domain.size(), 0.0), mb(domain.size(), 0.0);
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ia = slot(a[i]), ib = slot(b[i]);
    ma[ia] += 1.0;
    mb[ib] += 1.0;
    agree += ia == ib;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (std::size_t k = 0; k < domain.size(); ++k) pe += (ma[k] / n) * (mb[k] / n);
  if (std::abs(1.0 - pe) < 1e-15) return std::nullopt;
  return (po - pe) / (1.0 - pe);
}

/// Ranks starting at 1; tied values share the mean of their positions.
inline std::vector<double> mid_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = mid;
    i = j + 1;
  }
  return r;
}

/// Spearman's rho as the Pearson correlation of mid-ranks. Empty when either
/// side has no rank variance.
inline std::optional<double> spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("spearman_rho: need two equal-length vectors of length >= 2");
  const auto ra = mid_ranks(a), rb = mid_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

/// How rubric scores become kappa labels: each dimension as its own label,
/// or the weighted scalar snapped to the rubric's level set.
enum class KappaMode { dimensions, binned };

inline std::string_view kappa_mode_name(KappaMode m) noexcept {
  return m == KappaMode::dimensions ? "dimensions" : "binned";
}

struct AgreementReport {
  std::string signal;  // "phi" or "psi"
  std::optional<double> kappa;
  std::optional<double> spearman;
  std::size_t n = 0;  // joined trajectories
  std::vector<double> label_domain;
  KappaMode mode = KappaMode::dimensions;
};

inline nlohmann::json to_json(const AgreementReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"signal", r.signal},
          {"kappa", opt(r.kappa)},
          {"spearman", opt(r.spearman)},
          {"n", r.n},
          {"label_domain", r.label_domain},
          {"kappa_mode", std::string(kappa_mode_name(r.mode))}};
}

/// Agreement between two score blocks per trajectory (parallel vectors).
/// Blocks without evaluated dimensions must be filtered out beforehand.
inline AgreementReport agreement(const std::vector<nlohmann::json>& a,
                                 const std::vector<nlohmann::json>& b, bool phi_signal,
                                 KappaMode mode) {
  if (a.size() != b.size()) throw std::invalid_argument("agreement: unequal inputs");
  AgreementReport r;
  r.signal = phi_signal ? "phi" : "psi";
  r.mode = mode;
  r.n = a.size();
  const auto& levels = phi_signal ? kPhiLevels : kPsiLevels;
  r.label_domain.assign(levels.begin(), levels.end());
  const char* block = phi_signal ? "phi" : "psi";
  const std::vector<const char*> dims =
      phi_signal ? std::vector<const char*>{"a", "s", "r"} : std::vector<const char*>{"d", "a", "c"};
  std::vector<double> la, lb, va, vb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& ja = a[i].at(block);
    const auto& jb = b[i].at(block);
    va.push_back(ja.at("value").get<double>());
    vb.push_back(jb.at("value").get<double>());
    if (mode == KappaMode::dimensions) {
      for (const char* d : dims) {
        la.push_back(snap(ja.at(d).get<double>(), levels));
        lb.push_back(snap(jb.at(d).get<double>(), levels));
      }
    } else {
      la.push_back(snap(va.back(), levels));
      lb.push_back(snap(vb.back(), levels));
    }
  }
  if (!la.empty()) r.kappa = cohen_kappa(la, lb, r.label_domain);
  if (va.size() >= 2) r.spearman = spearman_rho(va, vb);
  return r;
}

}  // namespace selfplay
