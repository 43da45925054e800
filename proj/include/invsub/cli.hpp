#pragma once

// Run configuration, t-grid and custom-spec parsing, row evaluation and CSV
// output for the invsub command-line tool.

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "invsub/bromwich.hpp"
#include "invsub/errors.hpp"
#include "invsub/levy.hpp"
#include "invsub/moments.hpp"
#include "invsub/oracles.hpp"
#include "invsub/postwidder.hpp"

namespace invsub::cli {

enum class MethodChoice { postwidder, bromwich, automatic };

inline MethodChoice parse_method(const std::string& s) {
  if (s == "postwidder") return MethodChoice::postwidder;
  if (s == "bromwich") return MethodChoice::bromwich;
  if (s == "auto") return MethodChoice::automatic;
  throw DomainError("method must be one of postwidder, bromwich, auto (got '" + s + "')");
}

struct RunConfig {
  FamilyParams family = PureDrift{};
  std::vector<double> t;
  MethodChoice method = MethodChoice::automatic;
  double eps = 1e-6;
  std::optional<double> corr_s;
  bool overlay_asymptotics = false;
  std::string out = "-";  ///< "-" writes to stdout
  unsigned threads = 0;    ///< 0 selects hardware concurrency
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& text, const std::string& what) {
  const std::string s = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError(what + ": '" + s + "' is not a number");
  }
  if (used != s.size()) throw DomainError(what + ": '" + s + "' is not a number");
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

} // namespace detail

/// "0.5,1,2" -> {0.5, 1, 2}.
inline std::vector<double> parse_t_list(const std::string& s) {
  if (detail::trim(s).empty()) throw DomainError("--t is empty");
  std::vector<double> t;
  for (const auto& item : detail::split(s, ',')) t.push_back(detail::parse_number(item, "--t"));
  return t;
}

/// "start:stop:count[:log]" -> grid, linear unless the log suffix is given.
inline std::vector<double> parse_t_range(const std::string& s) {
  const auto parts = detail::split(s, ':');
  if (parts.size() != 3 && parts.size() != 4)
    throw DomainError("--t-range must be start:stop:count[:log] (got '" + s + "')");
  const double a = detail::parse_number(parts[0], "--t-range start");
  const double b = detail::parse_number(parts[1], "--t-range stop");
  const double c = detail::parse_number(parts[2], "--t-range count");
  bool log = false;
  if (parts.size() == 4) {
    const auto kind = detail::trim(parts[3]);
    if (kind == "log") log = true;
    else if (kind != "lin" && kind != "linear") throw DomainError("--t-range spacing must be 'log' or 'lin'");
  }
  if (!(c >= 1.0) || c != std::floor(c) || c > 1e7) throw DomainError("--t-range count must be a positive integer");
  if (!(a > 0.0)) throw DomainError("--t-range start must be > 0");
  const auto n = static_cast<std::size_t>(c);
  if (n > 1 && !(b > a)) throw DomainError("--t-range stop must exceed start");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    t[i] = log ? std::exp(std::log(a) + f * (std::log(b) - std::log(a))) : a + f * (b - a);
  }
  t.front() = a;
  if (n > 1) t.back() = b;
  return t;
}

inline void validate_grid(const std::vector<double>& t) {
  if (t.empty()) throw DomainError("t grid is empty");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !std::isfinite(t[i])) throw DomainError("every t must be finite and > 0");
    if (i > 0 && !(t[i] > t[i - 1])) throw DomainError("t grid must be strictly increasing");
  }
}

/// Parses a custom measure description. Statements are separated by newlines
/// or semicolons; '#' starts a comment. Recognised statements:
///   drift <mu>
///   atom(<x>, <w>)  pareto(<alpha>)  stable(<alpha>, <weight>)  exp_tilted_power(<a>, <b>)
inline Custom parse_custom_spec(const std::string& text) {
  Custom c;
  bool drift_seen = false;
  static const std::regex drift_re(R"(^drift\s*(?:=|\s)\s*(\S+)$)");
  static const std::regex call_re(R"(^([a-z_]+)\s*\((.*)\)$)");
  std::string cleaned;
  for (const auto& line : detail::split(text, '\n')) cleaned += line.substr(0, line.find('#')) + ";";
  for (const auto& raw : detail::split(cleaned, ';')) {
    const std::string stmt = detail::trim(raw);
    if (stmt.empty()) continue;
    std::smatch m;
    if (std::regex_match(stmt, m, drift_re)) {
      if (drift_seen) throw DomainError("custom spec: drift given twice");
      drift_seen = true;
      c.drift = detail::parse_number(m[1], "custom spec drift");
      continue;
    }
    if (!std::regex_match(stmt, m, call_re)) throw DomainError("custom spec: cannot parse '" + stmt + "'");
    const std::string name = m[1];
    std::vector<double> args;
    for (const auto& a : detail::split(m[2], ',')) args.push_back(detail::parse_number(a, "custom spec " + name));
    auto need = [&](std::size_t n) {
      if (args.size() != n)
        throw DomainError("custom spec: " + name + " takes " + std::to_string(n) + " argument(s)");
    };
    if (name == "atom") {
      need(2);
      c.kernels.emplace_back(AtomKernel{args[0], args[1]});
    } else if (name == "pareto") {
      need(1);
      c.kernels.emplace_back(ParetoKernel{args[0]});
    } else if (name == "stable") {
      need(2);
      c.kernels.emplace_back(StableKernel{args[0], args[1]});
    } else if (name == "exp_tilted_power") {
      need(2);
      c.kernels.emplace_back(ExpTiltedPowerKernel{args[0], args[1]});
    } else {
      throw DomainError("custom spec: unknown kernel '" + name + "'");
    }
  }
  return c;
}

/// One evaluated grid point.
struct Row {
  RenewalEstimate est;
  bool show_dU = false;
  std::optional<double> corr;
  std::optional<double> U_asym;
  bool converged = false;
  std::string error;  ///< engine exception text, if any
};

/// An estimate the CLI reports as converged: the engine's own flag, within
/// eps, and no diagnostic raised.
inline bool acceptable(const RenewalEstimate& r, double eps) {
  return r.converged && r.est_error <= eps && r.diagnostic.empty();
}

/// The auto rule: lattice specs use the exact path, other jump-discontinuous
/// U go to Bromwich, everything else to Post-Widder with Bromwich fallback.
inline RenewalEstimate evaluate_U(const SubordinatorSpec& spec, double t, MethodChoice method, double eps) {
  BromwichConfig bc;
  bc.eps = eps;
  if (method == MethodChoice::postwidder) return invert_postwidder(spec, t, eps);
  if (method == MethodChoice::bromwich) return invert_bromwich(spec, t, bc);
  if (spec.lattice()) {
    RenewalEstimate r;
    r.t = t;
    r.U = exact_U(spec, t);
    r.method = Method::exact;
    r.converged = true;
    return r;
  }
  if (spec.postwidder_hostile()) return invert_bromwich(spec, t, bc);
  auto pw = invert_postwidder(spec, t, eps);
  if (acceptable(pw, eps)) return pw;
  auto br = invert_bromwich(spec, t, bc);
  if (acceptable(br, eps)) return br;
  return br.est_error < pw.est_error ? br : pw;
}

/// Regime used for the overlay column: t < 1 reads the t -> 0 form.
inline std::optional<double> overlay_value(const SubordinatorSpec& spec, double t) {
  const auto regime = t < 1.0 ? AsymptoticRegime::t_to_zero : AsymptoticRegime::t_to_infinity;
  if (asymptotic_formula(spec, regime).empty()) return std::nullopt;
  return asymptotic_U(spec, t, regime);
}

inline Row evaluate_row(const SubordinatorSpec& spec, double t, const RunConfig& cfg, const RenewalEvaluator* ev) {
  Row row;
  try {
    row.est = evaluate_U(spec, t, cfg.method, cfg.eps);
    row.show_dU = row.est.dU.has_value() && row.est.method == Method::postwidder && !spec.lattice();
    row.converged = acceptable(row.est, cfg.eps);
    if (ev) {
      const auto c = covariance(*ev, *cfg.corr_s, t, MomentOptions{false});
      row.corr = c.corr;
      row.converged = row.converged && c.est_error <= cfg.eps;
    }
    if (cfg.overlay_asymptotics) row.U_asym = overlay_value(spec, t);
  } catch (const Error& e) {
    row.est.t = t;
    row.est.U = std::numeric_limits<double>::quiet_NaN();
    row.converged = false;
    row.error = e.what();
  }
  return row;
}

/// Evaluates every grid point; rows may finish in any order but come back in
/// grid order.
inline std::vector<Row> evaluate_grid(const RunConfig& cfg) {
  validate_grid(cfg.t);
  if (!(cfg.eps > 0.0)) throw DomainError("--eps must be > 0");
  if (cfg.corr_s && !(*cfg.corr_s > 0.0)) throw DomainError("--s must be > 0");
  const SubordinatorSpec spec(cfg.family);
  std::unique_ptr<RenewalEvaluator> ev;
  if (cfg.corr_s) ev = std::make_unique<RenewalEvaluator>(spec, cfg.eps, std::max(cfg.eps / 100.0, 1e-10));

  std::vector<Row> rows(cfg.t.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) rows[i] = evaluate_row(spec, cfg.t[i], cfg, ev.get());
  };
  unsigned n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, rows.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_csv(const RunConfig& cfg, const std::vector<Row>& rows) {
  std::string out = "t,U,dU,method,n_used,est_error,converged";
  if (cfg.corr_s) out += ",corr";
  if (cfg.overlay_asymptotics) out += ",U_asym";
  out += '\n';
  for (const auto& r : rows) {
    out += format_double(r.est.t) + ',' + format_double(r.est.U) + ',';
    if (r.show_dU) out += format_double(*r.est.dU);
    out += ',' + (r.error.empty() ? to_string(r.est.method) : std::string("error")) + ',';
    out += std::to_string(r.est.n_used) + ',' + format_double(r.est.est_error) + ',';
    out += r.converged ? "true" : "false";
    if (cfg.corr_s) out += ',' + (r.corr ? format_double(*r.corr) : std::string());
    if (cfg.overlay_asymptotics) out += ',' + (r.U_asym ? format_double(*r.U_asym) : std::string());
    out += '\n';
  }
  return out;
}

/// Evaluates the grid and writes the CSV. Returns 0 when every row converged
/// and 1 otherwise; diagnostics go to `log`. Throws IoError on write failure.
inline int run(const RunConfig& cfg, std::ostream& log = std::cerr) {
  const auto rows = evaluate_grid(cfg);
  const auto csv = format_csv(cfg, rows);
  if (cfg.out == "-") {
    std::cout << csv << std::flush;
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw IoError(cfg.out + ": " + std::strerror(errno));
    f << csv;
    f.close();
    if (!f) throw IoError(cfg.out + ": " + std::strerror(errno));
  }
  int failed = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) log << "t=" << format_double(r.est.t) << ": " << r.error << '\n';
    else if (!r.est.diagnostic.empty()) log << "t=" << format_double(r.est.t) << ": " << r.est.diagnostic << '\n';
    if (!r.converged) ++failed;
  }
  if (failed)
    log << failed << " of " << rows.size() << " rows did not reach the tolerance; est_error holds a crude error estimate\n";
  return failed ? 1 : 0;
}

} // namespace invsub::cli
