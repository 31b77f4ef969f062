#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "chartnet/analysis.hpp"
#include "chartnet/assemble.hpp"
#include "chartnet/csv.hpp"
#include "chartnet/errors.hpp"
#include "chartnet/harness.hpp"
#include "chartnet/numfmt.hpp"
#include "chartnet/serialize.hpp"
#include "chartnet/targets.hpp"

namespace {

using namespace chartnet;

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(parse_double(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw PreconditionError("expected a comma-separated list of numbers");
  return out;
}

std::vector<long long> parse_int_list(const std::string& text) {
  std::vector<long long> out;
  for (double v : parse_double_list(text)) out.push_back(static_cast<long long>(v));
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"constructive ReLU approximation networks on manifolds"};
  app.require_subcommand(1);

  // build
  auto* build = app.add_subcommand("build", "assemble a network and save it");
  std::string build_manifold, build_target, build_out;
  double build_eps = 0.0;
  bool build_clip_flag = false;
  long long build_cap = 40'000'000;
  build->add_option("--manifold", build_manifold, "manifold spec file")->required();
  build->add_option("--target", build_target, "target id or spec file")->required();
  build->add_option("--eps", build_eps, "total approximation error")->required();
  build->add_option("--out", build_out, "output network file")->required();
  build->add_flag("--clip", build_clip_flag, "append a clipping layer at sup-norm");
  build->add_option("--cap", build_cap, "resource cap on stored nonzeros");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a saved network on points");
  std::string eval_net, eval_points;
  eval->add_option("--net", eval_net, "network file")->required();
  eval->add_option("--points", eval_points, "csv of points, one per row")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "measure sup/L2 error on fresh samples");
  std::string verify_net, verify_manifold, verify_target;
  int verify_n = 0;
  std::uint64_t verify_seed = 0;
  double verify_eps = 0.0;
  verify->add_option("--net", verify_net)->required();
  verify->add_option("--manifold", verify_manifold)->required();
  verify->add_option("--target", verify_target)->required();
  verify->add_option("--n", verify_n)->required();
  verify->add_option("--seed", verify_seed)->required();
  verify->add_option("--eps", verify_eps, "requested eps recorded in the report");

  // scaling
  auto* scaling = app.add_subcommand("scaling", "eps sweep with size and error measurements");
  std::string scaling_manifold, scaling_target, scaling_eps_list = "0.4,0.2,0.1,0.05",
                                                scaling_out;
  std::uint64_t scaling_seed = 0;
  long long scaling_cap = 40'000'000;
  scaling->add_option("--manifold", scaling_manifold)->required();
  scaling->add_option("--target", scaling_target)->required();
  scaling->add_option("--eps", scaling_eps_list, "comma-separated eps values");
  scaling->add_option("--seed", scaling_seed)->required();
  scaling->add_option("--out", scaling_out)->required();
  scaling->add_option("--cap", scaling_cap);

  // covering
  auto* covering = app.add_subcommand("covering", "log covering-number bound");
  ArchSpec cov_arch;
  double cov_B = 1.0, cov_delta = 0.1;
  covering->add_option("--L", cov_arch.L)->required();
  covering->add_option("--p", cov_arch.p)->required();
  covering->add_option("--K", cov_arch.K)->required();
  covering->add_option("--kappa", cov_arch.kappa)->required();
  covering->add_option("--B", cov_B)->required();
  covering->add_option("--delta", cov_delta)->required();

  // arch
  auto* arch = app.add_subcommand("arch", "architecture sizing for n samples");
  long long arch_n = 0;
  int arch_s = 1, arch_d = 1;
  double arch_alpha = 1.0, arch_R = 1.0;
  ArchConstants arch_consts;
  arch->add_option("--n", arch_n)->required();
  arch->add_option("--s", arch_s)->required();
  arch->add_option("--alpha", arch_alpha)->required();
  arch->add_option("--d", arch_d)->required();
  arch->add_option("--R", arch_R);
  arch->add_option("--cL", arch_consts.c_L);
  arch->add_option("--cp", arch_consts.c_p);
  arch->add_option("--cK", arch_consts.c_K);

  // regress
  auto* regress = app.add_subcommand("regress", "desk-scale regression experiment");
  std::string regress_manifold, regress_target, regress_ns = "200,800,3200", regress_out;
  double regress_sigma = 0.0;
  int regress_seeds = 5;
  std::uint64_t regress_seed = 1;
  long long regress_cap = 40'000'000;
  regress->add_option("--manifold", regress_manifold)->required();
  regress->add_option("--target", regress_target)->required();
  regress->add_option("--sigma", regress_sigma)->required();
  regress->add_option("--ns", regress_ns, "comma-separated sample sizes");
  regress->add_option("--seeds", regress_seeds, "number of seeds per n");
  regress->add_option("--seed", regress_seed, "base seed");
  regress->add_option("--out", regress_out)->required();
  regress->add_option("--cap", regress_cap);

  CLI11_PARSE(app, argc, argv);

  if (*build) {
    const ManifoldSpec spec = load_manifold_spec(build_manifold);
    const TargetFunction target = resolve_target(build_target, spec.manifold);
    const Atlas atlas = build_atlas(spec.manifold, spec.chart_radius, spec.atlas_seed,
                                    spec.cover_fraction, spec.margin);
    AssembleOptions options;
    options.resource_cap = build_cap;
    const Assembly assembly = assemble(target, atlas, build_eps, build_clip_flag, options);
    save_network(assembly.net, build_out);
    std::ofstream manifest(build_out + ".manifest.json", std::ios::binary);
    if (!manifest) throw IoError("cannot write manifest next to '" + build_out + "'");
    manifest << build_manifest(spec, atlas, build_target, assembly) << "\n";
    const NetworkMeta meta = measure_meta(assembly.net);
    std::cout << "charts=" << atlas.chart_count() << " grid_n=" << assembly.grid_n
              << " L=" << meta.depth_L << " p=" << meta.width_p << " K=" << meta.nonzeros_K
              << " kappa=" << fmt_double(meta.weight_bound_kappa) << "\n";
    return 0;
  }

  if (*eval) {
    const ReluNetwork net = load_network(eval_net);
    const auto rows = read_csv(eval_points);
    std::vector<Eigen::VectorXd> pts;
    for (const auto& row : rows) {
      Eigen::VectorXd p(static_cast<Eigen::Index>(row.size()));
      bool numeric = true;
      for (std::size_t i = 0; i < row.size(); ++i) {
        try {
          p[static_cast<Eigen::Index>(i)] = parse_double(row[i]);
        } catch (const IoError&) {
          numeric = false;
          break;
        }
      }
      if (!numeric) continue;  // header row
      if (p.size() != net.input_dim())
        throw DimensionError("point width does not match the network input dimension");
      pts.push_back(std::move(p));
    }
    Table out({"output"});
    Eigen::MatrixXd batch(net.input_dim(), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) batch.col(static_cast<Eigen::Index>(i)) = pts[i];
    const Eigen::MatrixXd values = eval_batch(net, batch);
    for (Eigen::Index i = 0; i < values.cols(); ++i) out.new_row().add(values(0, i));
    std::cout << render_csv(out);
    return 0;
  }

  if (*verify) {
    const ReluNetwork net = load_network(verify_net);
    const ManifoldSpec spec = load_manifold_spec(verify_manifold);
    const TargetFunction target = resolve_target(verify_target, spec.manifold);
    const ErrorReport report =
        sup_error(net, target, spec.manifold, verify_n, verify_seed, verify_eps);
    std::cout << render_csv(error_report_table(report));
    return 0;
  }

  if (*scaling) {
    const ManifoldSpec spec = load_manifold_spec(scaling_manifold);
    const TargetFunction target = resolve_target(scaling_target, spec.manifold);
    const Atlas atlas = build_atlas(spec.manifold, spec.chart_radius, spec.atlas_seed,
                                    spec.cover_fraction, spec.margin);
    AssembleOptions options;
    options.resource_cap = scaling_cap;
    const ScalingResult result =
        scaling_study(target, atlas, parse_double_list(scaling_eps_list), scaling_seed, options);
    emit_csv(scaling_table(result), scaling_out, "inv_eps", "K");
    std::cout << "k_slope=" << fmt_double(result.k_fit.slope)
              << " k_r2=" << fmt_double(result.k_fit.r_squared)
              << " depth_slope=" << fmt_double(result.depth_fit.slope)
              << " depth_r2=" << fmt_double(result.depth_fit.r_squared) << "\n";
    return 0;
  }

  if (*covering) {
    std::cout << fmt_double(covering_log_bound(cov_delta, cov_arch, cov_B)) << "\n";
    return 0;
  }

  if (*arch) {
    const ArchSpec spec = theorem_arch(arch_n, arch_s, arch_alpha, arch_d, arch_R, arch_consts);
    Table out({"L", "p", "K", "R", "kappa"});
    out.new_row().add(spec.L).add(spec.p).add(spec.K).add(spec.R).add(spec.kappa);
    std::cout << render_csv(out);
    return 0;
  }

  if (*regress) {
    const ManifoldSpec spec = load_manifold_spec(regress_manifold);
    const TargetFunction target = resolve_target(regress_target, spec.manifold);
    const Atlas atlas = build_atlas(spec.manifold, spec.chart_radius, spec.atlas_seed,
                                    spec.cover_fraction, spec.margin);
    AssembleOptions options;
    options.resource_cap = regress_cap;
    const auto rows = regression_experiment(target, atlas, parse_int_list(regress_ns),
                                            regress_sigma, regress_seeds, regress_seed, options);
    emit_csv(regress_table(rows), regress_out, "n", "mse_refit");
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const chartnet::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const chartnet::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const chartnet::PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
