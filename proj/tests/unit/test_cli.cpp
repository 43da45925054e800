#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

#include "invsub/cli.hpp"

using namespace invsub;
using namespace invsub::cli;

namespace {

struct Completed {
  int status = -1;
  std::string out;
};

Completed run_cli(const std::string& args) {
  const std::string cmd = std::string(INVSUB_CLI_PATH) + " " + args + " 2>/dev/null";
  Completed c;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return c;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) c.out.append(buf, n);
  const int raw = pclose(p);
  c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return c;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

} // namespace

TEST(CliParse, Method) {
  EXPECT_EQ(parse_method("postwidder"), MethodChoice::postwidder);
  EXPECT_EQ(parse_method("bromwich"), MethodChoice::bromwich);
  EXPECT_EQ(parse_method("auto"), MethodChoice::automatic);
  EXPECT_THROW(parse_method("talbot"), DomainError);
}

TEST(CliParse, TimeList) {
  EXPECT_EQ(parse_t_list("0.5, 1,2"), (std::vector<double>{0.5, 1.0, 2.0}));
  EXPECT_EQ(parse_t_list("1e-3"), std::vector<double>{1e-3});
  EXPECT_THROW(parse_t_list("1,x"), DomainError);
  EXPECT_THROW(parse_t_list("1.5abc"), DomainError);
  EXPECT_THROW(parse_t_list(""), DomainError);
}

TEST(CliParse, TimeRange) {
  EXPECT_EQ(parse_t_range("1:3:3"), (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_EQ(parse_t_range("1:3:3:lin"), (std::vector<double>{1.0, 2.0, 3.0}));
  const auto g = parse_t_range("0.01:100:5:log");
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.front(), 0.01);
  EXPECT_EQ(g.back(), 100.0);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(std::log10(g[i]), -2.0 + static_cast<double>(i), 1e-12);
  EXPECT_EQ(parse_t_range("2:2:1"), std::vector<double>{2.0});
  EXPECT_THROW(parse_t_range("0:1:3"), DomainError);
  EXPECT_THROW(parse_t_range("3:1:3"), DomainError);
  EXPECT_THROW(parse_t_range("1:3:2.5"), DomainError);
  EXPECT_THROW(parse_t_range("1:3"), DomainError);
  EXPECT_THROW(parse_t_range("1:3:3:cubic"), DomainError);
}

TEST(CliParse, GridValidation) {
  EXPECT_NO_THROW(validate_grid({0.1, 0.2}));
  EXPECT_THROW(validate_grid({}), DomainError);
  EXPECT_THROW(validate_grid({1.0, 1.0}), DomainError);
  EXPECT_THROW(validate_grid({2.0, 1.0}), DomainError);
  EXPECT_THROW(validate_grid({0.0, 1.0}), DomainError);
}

TEST(CliParse, CustomSpec) {
  const auto c = parse_custom_spec("drift 0.5; atom(1, 2)\n# a comment\nstable(0.5, 1)  # trailing\nexp_tilted_power(-1.5, 1)");
  EXPECT_DOUBLE_EQ(c.drift, 0.5);
  ASSERT_EQ(c.kernels.size(), 3u);
  const auto& a = std::get<AtomKernel>(c.kernels[0]);
  EXPECT_DOUBLE_EQ(a.x, 1.0);
  EXPECT_DOUBLE_EQ(a.w, 2.0);
  EXPECT_DOUBLE_EQ(std::get<StableKernel>(c.kernels[1]).alpha, 0.5);
  EXPECT_DOUBLE_EQ(std::get<ExpTiltedPowerKernel>(c.kernels[2]).a, -1.5);
  EXPECT_DOUBLE_EQ(std::get<ParetoKernel>(parse_custom_spec("pareto(1.5)").kernels[0]).alpha, 1.5);
  EXPECT_DOUBLE_EQ(parse_custom_spec("drift=2; pareto(1)").drift, 2.0);

  EXPECT_THROW(parse_custom_spec("gamma(1, 2)"), DomainError);
  EXPECT_THROW(parse_custom_spec("atom(1)"), DomainError);
  EXPECT_THROW(parse_custom_spec("drift 1; drift 2"), DomainError);
  EXPECT_THROW(parse_custom_spec("pareto 1.5"), DomainError);
  EXPECT_THROW(SubordinatorSpec(parse_custom_spec("atom(-1, 1)")), DomainError);
}

TEST(CliEvaluate, AutoRule) {
  EXPECT_EQ(evaluate_U(SubordinatorSpec(PoissonDrift{0.0, 1.0}), 1.2, MethodChoice::automatic, 1e-6).method,
            Method::exact);
  const SubordinatorSpec atoms(Custom{0.0, {AtomKernel{1.0, 1.0}, AtomKernel{std::sqrt(2.0), 1.0}}});
  EXPECT_EQ(evaluate_U(atoms, 2.0, MethodChoice::automatic, 1e-6).method, Method::bromwich);
  EXPECT_EQ(evaluate_U(SubordinatorSpec(Stable{0.5}), 2.0, MethodChoice::automatic, 1e-6).method, Method::postwidder);
  EXPECT_EQ(evaluate_U(SubordinatorSpec(Stable{0.5}), 2.0, MethodChoice::bromwich, 1e-6).method, Method::bromwich);
  EXPECT_EQ(evaluate_U(SubordinatorSpec(PoissonDrift{0.0, 1.0}), 2.0, MethodChoice::postwidder, 1e-6).method,
            Method::postwidder);
}

TEST(CliEvaluate, OverlayRegime) {
  const SubordinatorSpec ig(GIG{1.0, 1.0, -0.5});
  EXPECT_DOUBLE_EQ(*overlay_value(ig, 0.5), asymptotic_U(ig, 0.5, AsymptoticRegime::t_to_zero));
  EXPECT_DOUBLE_EQ(*overlay_value(ig, 2.0), asymptotic_U(ig, 2.0, AsymptoticRegime::t_to_infinity));
  EXPECT_FALSE(overlay_value(SubordinatorSpec(ParetoCP{2.0}), 0.5).has_value());
  EXPECT_FALSE(overlay_value(SubordinatorSpec(Stable{0.5}), 3.0).has_value());
}

TEST(CliCsv, HeaderAndRoundTrip) {
  RunConfig cfg;
  cfg.family = GIG{1.0, 1.0, -0.5};
  cfg.t = {0.1, 1.0 / 3.0, 2.0};
  cfg.overlay_asymptotics = true;
  cfg.threads = 1;
  const auto rows = evaluate_grid(cfg);
  const auto csv = parse_csv(format_csv(cfg, rows));
  ASSERT_EQ(csv.size(), 4u);
  EXPECT_EQ(csv[0], (std::vector<std::string>{"t", "U", "dU", "method", "n_used", "est_error", "converged", "U_asym"}));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = csv[i + 1];
    ASSERT_EQ(r.size(), 8u);
    EXPECT_EQ(std::strtod(r[0].c_str(), nullptr), rows[i].est.t);
    EXPECT_EQ(std::strtod(r[1].c_str(), nullptr), rows[i].est.U);
    EXPECT_EQ(std::strtod(r[2].c_str(), nullptr), *rows[i].est.dU);
    EXPECT_EQ(std::strtod(r[5].c_str(), nullptr), rows[i].est.est_error);
    EXPECT_EQ(std::strtod(r[7].c_str(), nullptr), *rows[i].U_asym);
    EXPECT_EQ(r[3], "postwidder");
    EXPECT_EQ(r[6], "true");
  }
}

TEST(CliCsv, DeterministicAcrossThreadCounts) {
  RunConfig cfg;
  cfg.family = ParetoCP{1.5};
  cfg.t = parse_t_range("0.5:8:6:log");
  cfg.corr_s = 2.0;
  cfg.eps = 1e-4;
  cfg.threads = 1;
  const auto one = format_csv(cfg, evaluate_grid(cfg));
  cfg.threads = 4;
  EXPECT_EQ(format_csv(cfg, evaluate_grid(cfg)), one);
}

TEST(CliCsv, RejectsInvalidConfig) {
  RunConfig cfg;
  cfg.family = Stable{0.5};
  cfg.t = {1.0};
  cfg.eps = 0.0;
  EXPECT_THROW(evaluate_grid(cfg), DomainError);
  cfg.eps = 1e-6;
  cfg.corr_s = -1.0;
  EXPECT_THROW(evaluate_grid(cfg), DomainError);
  cfg.corr_s.reset();
  cfg.family = Stable{1.5};
  EXPECT_THROW(evaluate_grid(cfg), DomainError);
}

TEST(CliBinary, PoissonExample) {
  const auto r = run_cli("poisson --t 1.2 --mu 0 --r 1");
  EXPECT_EQ(r.status, 0);
  const auto csv = parse_csv(r.out);
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(csv[1][1], "2");
  EXPECT_EQ(csv[1][2], "");
  EXPECT_EQ(csv[1][3], "exact");
}

TEST(CliBinary, GigExample) {
  const auto r = run_cli("gig --t 1 --delta 1 --gamma 0 --kappa -0.5 --method postwidder");
  EXPECT_EQ(r.status, 0);
  const auto csv = parse_csv(r.out);
  ASSERT_EQ(csv.size(), 2u);
  // phi = sqrt(2 lambda): U(t) = sqrt(2t/pi), U'(t) = 1/sqrt(2 pi t).
  EXPECT_NEAR(std::stod(csv[1][1]), std::sqrt(2.0 / std::numbers::pi), 1e-6);
  EXPECT_NEAR(std::stod(csv[1][2]), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-5);
}

TEST(CliBinary, ParetoHonoursEps) {
  const auto r = run_cli("pareto --t 0.5,1,2 --alpha 0.5 --eps 0.001");
  const auto csv = parse_csv(r.out);
  ASSERT_EQ(csv.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) {
    if (csv[i][6] == "true") EXPECT_LE(std::stod(csv[i][5]), 1e-3) << i;
  }
  EXPECT_EQ(r.status, csv[1][6] == "true" && csv[2][6] == "true" && csv[3][6] == "true" ? 0 : 1);
}

TEST(CliBinary, CorrAndCustom) {
  const auto c = run_cli("corr --s 2 stable --alpha 0.5 --t 2,4");
  const auto csv = parse_csv(c.out);
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_EQ(csv[0].back(), "corr");
  EXPECT_NEAR(std::stod(csv[1].back()), 1.0, 1e-6);
  const double rho = std::stod(csv[2].back());
  EXPECT_GT(rho, 0.0);
  EXPECT_LT(rho, 1.0);

  const auto u = run_cli("custom --spec \"stable(0.5, 1)\" --t 4");
  EXPECT_EQ(u.status, 0);
  EXPECT_NEAR(std::stod(parse_csv(u.out)[1][1]), 4.0 / std::sqrt(std::numbers::pi), 1e-6);
}

TEST(CliBinary, ExitCodes) {
  EXPECT_EQ(run_cli("stable --alpha 1.5 --t 1").status, 2);
  EXPECT_EQ(run_cli("stable --alpha 0.5 --t 1 --method talbot").status, 2);
  EXPECT_EQ(run_cli("stable --alpha 0.5").status, 2);
  EXPECT_EQ(run_cli("stable --alpha 0.5 --t 1 --out /nonexistent/dir/x.csv").status, 3);
  EXPECT_EQ(run_cli("custom --spec-file /nonexistent/spec.txt --t 1").status, 3);
  EXPECT_NE(run_cli("stable --alpha 0.5 --t 1 --bogus").status, 0);
  // Post-Widder on driftless Poisson reports a diagnostic and a failed row.
  EXPECT_EQ(run_cli("poisson --t 10.1 --r 1 --method postwidder").status, 1);
}
