#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ds/config.hpp"
#include "ds/errors.hpp"
#include "ds/fields.hpp"
#include "ds/verify.hpp"

namespace {

namespace fs = std::filesystem;
using ds::cd;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  int depth = -1;
  std::vector<std::string> tol_overrides;
};

ds::RunConfig resolve(const CommonArgs& args) {
  ds::RunConfig rc = ds::load_config(args.config_path);
  for (const std::string& ov : args.tol_overrides) {
    ds::apply_tolerance_override(rc, ov);
  }
  if (args.depth >= 0) {
    if (static_cast<std::size_t>(args.depth) > rc.steps.size()) {
      throw ds::ConfigError("--depth exceeds the number of configured steps");
    }
    rc.steps.resize(static_cast<std::size_t>(args.depth));
  }
  return rc;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ds::ConfigError("cannot open output file: " + path.string());
  }
  out << text;
}

void echo_config(const ds::RunConfig& rc, const fs::path& out_dir) {
  write_text(out_dir / "resolved_config.json", ds::render_config(rc));
}

int run_generate(const CommonArgs& args) {
  const ds::RunConfig rc = resolve(args);
  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  echo_config(rc, out_dir);

  const ds::FieldGrid seed = ds::seed_fields(rc.seed, rc.grid);
  ds::write_csv(seed, (out_dir / "fields_n0.csv").string());
  if (!rc.steps.empty()) {
    ds::ChainEvaluator chain(rc.seed, rc.steps, rc.form);
    const std::vector<ds::FieldGrid> levels = ds::chain_fields(chain, rc.grid);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const std::string name = "fields_n" + std::to_string(l + 1) + ".csv";
      ds::write_csv(levels[l], (out_dir / name).string());
    }
  }
  std::cout << "wrote " << (rc.steps.size() + 1) << " field files to " << out_dir.string()
            << "\n";
  return 0;
}

int run_verify(const CommonArgs& args) {
  const ds::RunConfig rc = resolve(args);
  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  echo_config(rc, out_dir);

  std::vector<ds::ResidualReport> reports;
  const double cx = 0.5 * (rc.grid.x_min + rc.grid.x_max) + 0.37 * rc.grid.dx();
  const double cy = 0.5 * (rc.grid.y_min + rc.grid.y_max) - 0.23 * rc.grid.dy();

  // Background checks: the first-order system holds analytically; the time
  // flow is checked by central differences.
  {
    ds::ResidualReport rep;
    rep.name = "seed.spatial";
    rep.grid_nx = 1;
    rep.grid_ny = static_cast<int>(rc.lambda_samples.size());
    rep.tolerance_used = rc.tol.algebra;
    for (const cd& lam : rc.lambda_samples) {
      const ds::Mat2J phi = ds::seed_eigenfunction(rc.seed, cx, cy, rc.grid.t, lam);
      const ds::Mat2 U =
          ds::build_U(rc.seed.q0, rc.seed.r0, rc.seed.alpha, rc.seed.beta, lam);
      const ds::Mat2 res = ds::spatial_lax_residual(phi, U);
      const double m = res.cwiseAbs().maxCoeff();
      if (m > rep.linf) {
        rep.linf = m;
        rep.worst_x = cx;
        rep.worst_y = cy;
      }
      rep.l2 = std::max(rep.l2, m);
    }
    rep.pass = rep.linf <= rep.tolerance_used;
    reports.push_back(rep);

    ds::ResidualReport rt;
    rt.name = "seed.time";
    rt.grid_nx = 1;
    rt.grid_ny = static_cast<int>(rc.lambda_samples.size());
    rt.tolerance_used = 1e-6;
    auto phi_fn = [&](double x, double y, double t, cd lam) {
      return ds::seed_eigenfunction(rc.seed, x, y, t, lam);
    };
    for (const cd& lam : rc.lambda_samples) {
      const ds::Mat2 res = ds::time_lax_residual(
          phi_fn, cx, cy, rc.grid.t, lam, rc.seed.alpha, rc.seed.beta, rc.seed.K,
          rc.seed.A10, rc.seed.A20, cd{}, cd{}, ds::kFdStepTime,
          ds::fd_step_spatial(cx));
      rt.linf = std::max(rt.linf, res.cwiseAbs().maxCoeff());
    }
    rt.worst_x = cx;
    rt.worst_y = cy;
    rt.l2 = rt.linf;
    rt.pass = rt.linf <= rt.tolerance_used;
    reports.push_back(rt);
  }

  if (!rc.steps.empty()) {
    ds::ChainEvaluator chain(rc.seed, rc.steps, rc.form);
    const ds::ChainConstants cc = ds::chain_constants(rc.seed, rc.steps);

    // Evolution-system residual per level from three time slices.
    ds::GridSpec gm = rc.grid, gp = rc.grid;
    gm.t = rc.grid.t - rc.time_step;
    gp.t = rc.grid.t + rc.time_step;
    const std::vector<ds::FieldGrid> mid = ds::chain_fields(chain, rc.grid);
    const std::vector<ds::FieldGrid> lo = ds::chain_fields(chain, gm);
    const std::vector<ds::FieldGrid> hi = ds::chain_fields(chain, gp);
    for (std::size_t l = 0; l < mid.size(); ++l) {
      const std::string label = "level" + std::to_string(l + 1) + ".pde";
      const ds::DsResidual res =
          ds::ds_residual(mid[l], lo[l], hi[l], rc.time_step, rc.tol.pde, label);
      reports.push_back(res.q_eq);
      reports.push_back(res.r_eq);
    }

    // Dressed linear problem per level and spectral sample.
    for (std::size_t l = 1; l <= rc.steps.size(); ++l) {
      for (std::size_t s = 0; s < rc.lambda_samples.size(); ++s) {
        const std::string name =
            "level" + std::to_string(l) + ".lax.s" + std::to_string(s);
        reports.push_back(ds::chain_lax_grid(chain, cc, l, rc.grid,
                                             rc.lambda_samples[s], rc.tol.lax, name));
      }
    }

    // Pointwise identity battery per step at the probe point.
    const std::vector<ds::StepMatrices> sm = chain.step_matrices(cx, cy, rc.grid.t);
    for (std::size_t k = 0; k < rc.steps.size(); ++k) {
      const ds::IdentityRates rates =
          ds::identity_suite(rc.steps[k], sm[k], rc.lambda_samples.front());
      ds::ResidualReport rep;
      rep.name = "step" + std::to_string(k + 1) + ".identities";
      rep.grid_nx = rep.grid_ny = 1;
      rep.tolerance_used = rc.tol.algebra;
      rep.linf = std::max({rates.inv_left, rates.inv_right, rates.annihilation,
                           rates.parity});
      rep.l2 = rates.det_P;
      rep.worst_x = cx;
      rep.worst_y = cy;
      rep.pass = rep.linf <= rep.tolerance_used && rates.det_P <= 1e-12;
      reports.push_back(rep);
    }

    // Analytic-derivative crosscheck on the full chain.
    {
      ds::ResidualReport rep;
      rep.name = "chain.jets";
      rep.grid_nx = rep.grid_ny = 1;
      rep.tolerance_used = rc.tol.jet;
      auto phi_fn = [&](double x, double y, double t, cd lam) {
        return chain.evaluate(x, y, t, lam);
      };
      rep.linf = ds::jet_crosscheck(phi_fn, cx, cy, rc.grid.t,
                                    rc.lambda_samples.front());
      rep.l2 = rep.linf;
      rep.worst_x = cx;
      rep.worst_y = cy;
      rep.pass = rep.linf <= rep.tolerance_used;
      reports.push_back(rep);
    }
  }

  std::string text;
  bool all_pass = true;
  for (const ds::ResidualReport& rep : reports) {
    text += rep.to_line();
    text += "\n";
    all_pass = all_pass && rep.pass;
  }
  write_text(out_dir / "report.txt", text);
  std::cout << text;
  std::cout << (all_pass ? "verify: all checks passed\n" : "verify: checks FAILED\n");
  return all_pass ? 0 : 1;
}

int run_compare(const std::string& file_a, const std::string& file_b, double max_diff) {
  const ds::FieldGrid a = ds::read_csv(file_a);
  const ds::FieldGrid b = ds::read_csv(file_b);
  if (a.grid.nx != b.grid.nx || a.grid.ny != b.grid.ny) {
    std::cout << "compare: grid shapes differ (" << a.grid.nx << "x" << a.grid.ny
              << " vs " << b.grid.nx << "x" << b.grid.ny << ")\n";
    return 1;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.q.size(); ++i) {
    worst = std::max(worst, std::abs(a.q[i] - b.q[i]));
    worst = std::max(worst, std::abs(a.r[i] - b.r[i]));
    worst = std::max(worst, std::abs(a.A1[i] - b.A1[i]));
    worst = std::max(worst, std::abs(a.A2[i] - b.A2[i]));
  }
  std::printf("compare: max field deviation %.6e (allowed %.6e)\n", worst, max_diff);
  return worst <= max_diff ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Builds multi-step dressed solutions of a 2+1D coupled wave system "
               "and verifies every claimed identity numerically"};
  app.require_subcommand(1);

  CommonArgs gen_args, ver_args;
  std::string cmp_a, cmp_b;
  double cmp_max_diff = 0.0;

  CLI::App* gen = app.add_subcommand("generate", "sample fields for every dressing level");
  gen->add_option("--config", gen_args.config_path, "JSON run description")->required();
  gen->add_option("--out", gen_args.out_dir, "output directory (default .)");
  gen->add_option("--depth", gen_args.depth, "evaluate only the first N steps");
  gen->add_option("--tolerance", gen_args.tol_overrides,
                  "override a tolerance as name=value");

  CLI::App* ver = app.add_subcommand("verify", "run the verification battery");
  ver->add_option("--config", ver_args.config_path, "JSON run description")->required();
  ver->add_option("--out", ver_args.out_dir, "output directory (default .)");
  ver->add_option("--depth", ver_args.depth, "verify only the first N steps");
  ver->add_option("--tolerance", ver_args.tol_overrides,
                  "override a tolerance as name=value");

  CLI::App* cmp = app.add_subcommand("compare", "compare two sampled field files");
  cmp->add_option("a", cmp_a, "first CSV file")->required();
  cmp->add_option("b", cmp_b, "second CSV file")->required();
  cmp->add_option("--max-diff", cmp_max_diff, "largest allowed entry deviation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return run_generate(gen_args);
    if (ver->parsed()) return run_verify(ver_args);
    return run_compare(cmp_a, cmp_b, cmp_max_diff);
  } catch (const ds::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ds::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
