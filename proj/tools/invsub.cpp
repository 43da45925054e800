// invsub: renewal function, density and correlation of inverse subordinators as CSV.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "invsub/cli.hpp"

namespace {

using invsub::cli::RunConfig;

struct CommonArgs {
  std::string t_list;
  std::string t_range;
  std::string method = "auto";
  double eps = 1e-6;
  bool overlay = false;
  std::string out = "-";
  double s = 0.0;
  unsigned threads = 0;
};

void add_common(CLI::App* sub, CommonArgs& a) {
  auto* t = sub->add_option("--t", a.t_list, "comma-separated times, e.g. 0.5,1,2");
  auto* r = sub->add_option("--t-range", a.t_range, "start:stop:count[:log]");
  t->excludes(r);
  sub->add_option("--eps", a.eps, "tolerance")->capture_default_str();
  sub->add_option("--method", a.method, "postwidder | bromwich | auto")->capture_default_str();
  sub->add_flag("--overlay-asym", a.overlay, "add a U_asym column where an asymptotic form exists");
  sub->add_option("--out", a.out, "output CSV path, '-' for stdout")->capture_default_str();
  sub->add_option("--threads", a.threads, "worker threads, 0 for all cores");
  sub->add_option("--s", a.s, "fixed time s for corr(E(s), E(t))");
}

struct FamilyArgs {
  invsub::PoissonDrift poisson;
  invsub::ParetoCP pareto;
  invsub::TwoStableMix sumas;
  invsub::GIG gig;
  invsub::Stable stable;
  std::string custom_text, custom_file;
};

/// Registers one subcommand per family under `parent`; the chosen family is
/// written into `family` when its subcommand is parsed.
void add_families(CLI::App* parent, CommonArgs& common, FamilyArgs& a, invsub::FamilyParams& family) {
  auto& [poisson, pareto, sumas, gig, stable, custom_text, custom_file] = a;

  auto* p = parent->add_subcommand("poisson", "unit-jump Poisson process with drift");
  p->add_option("--mu", poisson.mu, "drift")->capture_default_str();
  p->add_option("--r", poisson.r, "jump rate")->capture_default_str();
  p->callback([&] { family = poisson; });

  auto* pa = parent->add_subcommand("pareto", "rate-1 compound Poisson with Pareto jumps");
  pa->add_option("--alpha,--a", pareto.alpha, "tail index")->required();
  pa->callback([&] { family = pareto; });

  auto* su = parent->add_subcommand("sumas", "sum of two stable subordinators");
  su->add_option("--a1", sumas.alpha1)->required();
  su->add_option("--a2", sumas.alpha2)->required();
  su->add_option("--c1", sumas.c1)->required();
  su->add_option("--c2", sumas.c2)->required();
  su->callback([&] { family = sumas; });

  auto* g = parent->add_subcommand("gig", "generalised inverse Gaussian subordinator");
  g->add_option("--delta", gig.delta)->required();
  g->add_option("--gamma", gig.gamma)->required();
  g->add_option("--kappa", gig.kappa)->required();
  g->callback([&] { family = gig; });

  auto* st = parent->add_subcommand("stable", "alpha-stable subordinator");
  st->add_option("--a,--alpha", stable.alpha)->required();
  st->callback([&] { family = stable; });

  auto* u = parent->add_subcommand("unimix", "uniform mixture of stable subordinators");
  u->callback([&] { family = invsub::UniformStableMix{}; });

  auto* c = parent->add_subcommand("custom", "drift plus measure kernels");
  auto* ct = c->add_option("--spec", custom_text, "e.g. \"drift 0.5; atom(1, 2); stable(0.5, 1)\"");
  auto* cf = c->add_option("--spec-file", custom_file, "file holding the same statements");
  ct->excludes(cf);
  c->callback([&] {
    std::string text = custom_text;
    if (!custom_file.empty()) {
      std::ifstream f(custom_file);
      if (!f) throw invsub::IoError(custom_file + ": cannot open");
      std::stringstream ss;
      ss << f.rdbuf();
      text = ss.str();
    }
    if (text.empty()) throw invsub::DomainError("custom needs --spec or --spec-file");
    family = invsub::cli::parse_custom_spec(text);
  });

  for (auto* sub : {p, pa, su, g, st, u, c}) add_common(sub, common);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renewal function U(t), density U'(t) and correlation of inverse Levy subordinators"};
  app.require_subcommand(1);
  CommonArgs common;
  invsub::FamilyParams family = invsub::PureDrift{};

  FamilyArgs fam;
  add_families(&app, common, fam, family);
  auto* corr = app.add_subcommand("corr", "U and corr(E(s), E(t)) for a family with s fixed");
  corr->require_subcommand(1);
  corr->add_option("--s", common.s, "fixed time s")->required();
  add_families(corr, common, fam, family);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const invsub::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const invsub::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunConfig cfg;
    cfg.family = family;
    if (!common.t_list.empty()) cfg.t = invsub::cli::parse_t_list(common.t_list);
    else if (!common.t_range.empty()) cfg.t = invsub::cli::parse_t_range(common.t_range);
    else throw invsub::DomainError("one of --t or --t-range is required");
    cfg.method = invsub::cli::parse_method(common.method);
    cfg.eps = common.eps;
    cfg.overlay_asymptotics = common.overlay;
    cfg.out = common.out;
    cfg.threads = common.threads;
    if (corr->parsed() || common.s != 0.0) cfg.corr_s = common.s;
    return invsub::cli::run(cfg);
  } catch (const invsub::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const invsub::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }
}
