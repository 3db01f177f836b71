// Experiment runner: data synthesis, warm-up sampling, autoencoder training,
// auto-encoding sampler runs, and report emission.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aemc/experiment.hpp"

namespace {

aemc::ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  return aemc::ExperimentConfig::from_json(j);
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            bool has_seed, std::uint64_t seed, const std::string& method,
            bool no_volume_correction) {
  aemc::ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (has_seed) cfg.seed = seed;
  if (!method.empty()) cfg.methods = {method};
  if (no_volume_correction) cfg.volume_correction = false;

  aemc::ExperimentResult res = aemc::run_experiment(cfg);
  if (res.report.contains("error")) {
    std::cerr << "experiment failed: " << res.report["error"] << "\n";
    return 1;
  }
  std::cout << "wrote artifacts to " << cfg.out_dir << "\n";
  if (res.report.contains("acceptance_rates"))
    std::cout << "acceptance rates: " << res.report["acceptance_rates"].dump()
              << "\n";
  return 0;
}

int cmd_synth_data(const std::string& config_path, const std::string& out_dir,
                   bool has_seed, std::uint64_t seed) {
  aemc::ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (has_seed) cfg.seed = seed;
  if (cfg.experiment != aemc::ExperimentKind::logistic_synthetic)
    throw std::runtime_error("synth-data requires experiment=logistic_synthetic");

  std::filesystem::create_directories(cfg.out_dir);
  aemc::RngStream rng = aemc::RngStream::derive(cfg.seed, 0);
  aemc::SyntheticLogistic synth =
      aemc::synth_logistic_data(cfg.dim, cfg.n_train, cfg.n_test, cfg.corr_block,
                                cfg.corr_rho, cfg.prior_sd, rng);
  aemc::save_dataset_csv(std::filesystem::path(cfg.out_dir) / "dataset_train.csv",
                         synth.train);
  aemc::save_dataset_csv(std::filesystem::path(cfg.out_dir) / "dataset_test.csv",
                         synth.test);
  nlohmann::json meta;
  meta["dim"] = cfg.dim;
  meta["n_train"] = cfg.n_train;
  meta["n_test"] = cfg.n_test;
  meta["corr_block"] = cfg.corr_block;
  meta["corr_rho"] = cfg.corr_rho;
  meta["seed"] = cfg.seed;
  nlohmann::json bt = nlohmann::json::array();
  for (Eigen::Index i = 0; i < synth.beta_true.size(); ++i)
    bt.push_back(synth.beta_true[i]);
  meta["beta_true"] = std::move(bt);
  std::ofstream out(std::filesystem::path(cfg.out_dir) / "dataset_meta.json");
  out << meta.dump(2) << "\n";
  std::cout << "wrote dataset to " << cfg.out_dir << "\n";
  return 0;
}

// Fast invariant suite: a few seconds, no artifacts.
int cmd_check() {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };

  // gradient of the 3D Gaussian vs central finite differences
  {
    aemc::GaussianTarget g(Eigen::VectorXd::Zero(3),
                           aemc::GaussianTarget::illustration_covariance());
    aemc::RngStream rng(11);
    bool ok = true;
    for (int t = 0; t < 5 && ok; ++t) {
      Eigen::VectorXd q = rng.normal_vector(3);
      Eigen::VectorXd grad = g.gradient(q);
      for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
        e[j] = 1e-6;
        double fd = (g.potential(q + e) - g.potential(q - e)) / 2e-6;
        if (std::abs(fd - grad[j]) > 1e-5 * std::max(1.0, std::abs(grad[j])))
          ok = false;
      }
    }
    check("gaussian gradient matches finite differences", ok);
  }

  // identity autoencoder reproduces plain HMC bit-exactly
  {
    aemc::GaussianTarget g(Eigen::VectorXd::Zero(3),
                           aemc::GaussianTarget::illustration_covariance());
    aemc::Autoencoder id = aemc::Autoencoder::identity(3);
    aemc::SamplerConfig cfg;
    cfg.step_size = 0.2;
    cfg.n_leapfrog = 5;
    cfg.volume_correction = false;
    aemc::LatentDynamics dyn(g, id, cfg.mass_or_identity(3));
    aemc::RngStream r1(7), r2(7);
    Eigen::VectorXd q1 = Eigen::VectorXd::Zero(3), q2 = q1;
    bool ok = true;
    for (int i = 0; i < 50 && ok; ++i) {
      q1 = aemc::hmc_step(g, q1, cfg, r1).next;
      q2 = aemc::ae_hmc_step(g, id, dyn, q2, cfg, r2).next;
      ok = (q1.array() == q2.array()).all();
    }
    check("identity autoencoder reproduces HMC bit-exactly", ok);
  }

  // Gramian volume of an orthonormal Jacobian is exactly neutral
  {
    Eigen::MatrixXd j(3, 2);
    j << 1, 0, 0, 1, 0, 0;
    check("orthonormal Gramian volume is 1",
          std::abs(aemc::log_gramian_volume(j)) < 1e-12);
  }

  // pCN with flat likelihood accepts every proposal
  {
    aemc::GpLinearInverseTarget prior(5, 1.25, 0.0625, {}, Eigen::VectorXd(), 1.0);
    aemc::SamplerConfig cfg;
    cfg.pcn_step = 1.0;
    aemc::RngStream rng(3);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(prior.dim());
    bool ok = true;
    for (int i = 0; i < 200 && ok; ++i) {
      auto out = aemc::pcn_step(prior, q, cfg, rng);
      ok = out.accepted;
      q = out.next;
    }
    check("flat-likelihood pCN accepts every proposal", ok);
  }

  // autoencoder JSON round trip
  {
    aemc::RngStream rng(5);
    Eigen::MatrixXd data(40, 6);
    for (Eigen::Index i = 0; i < data.size(); ++i)
      data(i / 6, i % 6) = rng.normal();
    aemc::Autoencoder ae = aemc::pca_fit(data, 2);
    aemc::Autoencoder back = aemc::Autoencoder::from_json(ae.to_json());
    Eigen::VectorXd x = rng.normal_vector(6);
    check("autoencoder JSON round trip",
          (ae.decode(ae.encode(x)) - back.decode(back.encode(x)))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
  }

  std::cout << (failures == 0 ? "all checks passed" : "checks FAILED") << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"auto-encoding HMC/pCN experiment runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir, method;
  std::uint64_t seed = 0;
  bool no_volume_correction = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment end-to-end");
  run->add_option("--config", config_path, "JSON config")->required();
  run->add_option("--out", out_dir, "output directory override");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "master seed override");
  run->add_option("--method", method, "restrict to one method")
      ->check(CLI::IsMember({"hmc", "ae-hmc", "rwm", "pcn", "ae-pcn"}));
  run->add_flag("--no-volume-correction", no_volume_correction,
                "disable the Jacobian volume correction");

  CLI::App* synth = app.add_subcommand("synth-data", "write a synthetic dataset");
  synth->add_option("--config", config_path, "JSON config")->required();
  synth->add_option("--out", out_dir, "output directory override");
  CLI::Option* synth_seed_opt =
      synth->add_option("--seed", seed, "master seed override");

  CLI::App* chk = app.add_subcommand("check", "run the fast invariant suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run))
      return cmd_run(config_path, out_dir, seed_opt->count() > 0, seed, method,
                     no_volume_correction);
    if (app.got_subcommand(synth))
      return cmd_synth_data(config_path, out_dir, synth_seed_opt->count() > 0,
                            seed);
    if (app.got_subcommand(chk)) return cmd_check();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
