#include <CLI11.hpp>

#include <iostream>

#include "skewbound/cli.hpp"

int main(int argc, char** argv) {
  namespace sc = skewbound::cli;
  CLI::App app{"Higher-order skew-moment uncertainty bounds for unitary families of mixed states",
               "skewbound"};
  app.footer(sc::kExitCodeHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", "skewbound 0.1.0");

  sc::ComputeOptions compute;
  auto* c = app.add_subcommand("compute", "Bound ladder for an instance file");
  c->add_option("instance", compute.instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
  c->add_option("--order,-K", compute.order, "Odd truncation order, at most 7")->capture_default_str();
  c->add_option("--format", compute.format, "json or csv")->capture_default_str();
  c->add_flag("--no-preshift", compute.no_preshift, "Do not center H at its mean before forming moments");
  c->add_flag("--verify", compute.verify, "Cross-check ladder norms against Gram-Schmidt");
  c->add_option("--t", compute.t, "Add a geometry block at this curve parameter (needs an estimator)");
  c->add_option("--out,-o", compute.out, "Write the report here instead of stdout");

  sc::MomentsOptions moments;
  auto* m = app.add_subcommand("moments", "Closed-form skew moments against the derivative oracle");
  m->add_option("instance", moments.instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
  m->add_option("--max-order", moments.max_order, "Even order 2M, at most 16")->capture_default_str();
  m->add_option("--format", moments.format, "json or csv")->capture_default_str();

  sc::RandomOptions random;
  auto* r = app.add_subcommand("random", "Write a seeded random instance");
  r->add_option("--dim,-d", random.dim, "Dimension, 2 to 16")->capture_default_str();
  r->add_option("--rank,-r", random.rank, "Rank of the state (default: dim)");
  r->add_option("--seed,-s", random.seed, "Seed")->capture_default_str();
  r->add_flag("--estimator", random.estimator, "Also draw a random Hermitian estimator");
  r->add_option("--out,-o", random.out, "Output path (default: stdout)");

  skewbound::VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "Run the property battery over seeded random instances");
  v->add_option("--dims", verify.dims, "Comma-separated dimensions")->delimiter(',')->capture_default_str();
  v->add_option("--trials", verify.trials, "Trials per dimension")->capture_default_str();
  v->add_option("--seed", verify.seed, "Master seed")->capture_default_str();
  v->add_option("--depth", verify.depth, "Odd ladder depth, at most 7")->capture_default_str();
  v->add_option("--threads", verify.threads, "Worker threads (0: all cores)")->capture_default_str();

  sc::GeometryOptions geometry;
  auto* g = app.add_subcommand("geometry", "Estimation angle between level-surface normal and curve tangent");
  g->add_option("instance", geometry.instance, "Instance JSON file with an estimator")
      ->required()
      ->check(CLI::ExistingFile);
  g->add_option("--t", geometry.t, "Curve parameter")->capture_default_str();
  g->add_flag("--raw", geometry.raw, "Use the estimator as given, without local unbiasing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sc::kValidationFailure;
  }

  if (*c) return sc::cmd_compute(compute, std::cout, std::cerr);
  if (*m) return sc::cmd_moments(moments, std::cout, std::cerr);
  if (*r) return sc::cmd_random(random, std::cout, std::cerr);
  if (*v) return sc::cmd_verify(verify, std::cout, std::cerr);
  return sc::cmd_geometry(geometry, std::cout, std::cerr);
}
