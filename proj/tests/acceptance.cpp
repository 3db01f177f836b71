// Acceptance gate: one criterion per invocation (argv[1] = 1..12), or all
// when run without arguments. Prints exactly one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "aemc/chain.hpp"
#include "aemc/diagnostics.hpp"
#include "aemc/experiment.hpp"
#include "aemc/gp.hpp"
#include "aemc/gramian.hpp"
#include "aemc/hmc.hpp"
#include "aemc/latent.hpp"
#include "aemc/pca.hpp"
#include "aemc/pcn.hpp"
#include "aemc/rng.hpp"
#include "aemc/targets.hpp"
#include "aemc/training.hpp"

using namespace aemc;

namespace {

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

double grad_rel_err(const Eigen::VectorXd& analytic, const Eigen::VectorXd& fd) {
  return (analytic - fd).norm() / std::max(1.0, fd.norm());
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& s) {
  Eigen::RowVectorXd mean = s.colwise().mean();
  Eigen::MatrixXd c = s.rowwise() - mean;
  return c.transpose() * c / double(s.rows() - 1);
}

Autoencoder random_tanh_ae(int d, int hidden, int r, std::uint64_t seed) {
  RngStream rng(seed);
  ArchSpec arch = ArchSpec::tanh_hidden(d, hidden, r);
  auto enc = detail::init_layers(arch.encoder_dims, arch.encoder_acts, rng);
  auto dec = detail::init_layers(arch.decoder_dims, arch.decoder_acts, rng);
  for (auto& l : enc) l.bias = 0.2 * rng.normal_vector(l.bias.size());
  for (auto& l : dec) l.bias = 0.2 * rng.normal_vector(l.bias.size());
  return Autoencoder(std::move(enc), std::move(dec));
}

// ---------------------------------------------------------------- criterion 1
bool criterion_gradients(std::string& detail) {
  RngStream rng(1001);
  double worst = 0.0;

  GaussianTarget gauss(Eigen::VectorXd::Zero(3),
                       GaussianTarget::illustration_covariance());
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd q = rng.normal_vector(3);
    worst = std::max(worst, grad_rel_err(gauss.gradient(q), fd_gradient(
        [&](const Eigen::VectorXd& v) { return gauss.potential(v); }, q)));
  }

  Eigen::MatrixXd x(40, 8);
  for (Eigen::Index i = 0; i < 40; ++i) x.row(i) = rng.normal_vector(8).transpose();
  Eigen::VectorXd y(40);
  for (Eigen::Index i = 0; i < 40; ++i) y[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
  LogisticRegressionTarget logistic(x, y, 25.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd q = rng.normal_vector(8);
    worst = std::max(worst, grad_rel_err(logistic.gradient(q), fd_gradient(
        [&](const Eigen::VectorXd& v) { return logistic.potential(v); }, q)));
  }

  auto sensors = GpLinearInverseTarget::sensor_lattice(5, 3);
  GpLinearInverseTarget gp(5, 1.25, 0.0625, sensors,
                           rng.normal_vector(Eigen::Index(sensors.size())), 0.3);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd u = rng.normal_vector(gp.dim());
    worst = std::max(worst, grad_rel_err(gp.gradient(u), fd_gradient(
        [&](const Eigen::VectorXd& v) { return gp.potential(v); }, u, 1e-5)));
  }

  Autoencoder ae = random_tanh_ae(6, 5, 2, 1002);
  GaussianTarget amb(Eigen::VectorXd::Zero(6),
                     Eigen::MatrixXd::Identity(6, 6) * 1.5);
  Eigen::VectorXd mass(6);
  mass << 1.0, 2.0, 0.5, 1.5, 3.0, 1.0;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd z = rng.normal_vector(2);
    worst = std::max(worst, grad_rel_err(latent_grad_U(amb, ae, z), fd_gradient(
        [&](const Eigen::VectorXd& v) { return amb.potential(ae.decode(v)); }, z)));
    worst = std::max(worst, grad_rel_err(latent_grad_K(ae, z, mass), fd_gradient(
        [&](const Eigen::VectorXd& v) { return latent_kinetic(ae, v, mass); }, z)));
  }

  std::ostringstream os;
  os << "worst rel err " << worst << " (limit 1e-5)";
  detail = os.str();
  return worst < 1e-5;
}

// ---------------------------------------------------------------- criterion 2
bool criterion_leapfrog_order(std::string& detail) {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.5, 0.5, 1.0;
  GaussianTarget g(Eigen::VectorXd::Zero(2), cov);
  Eigen::VectorXd mass = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd q(2), p(2);
  q << 1.0, -0.5;
  p << 0.3, 0.8;
  double h0 = g.potential(q) + kinetic(p, mass);

  std::vector<double> lx, ly;
  for (double eps : {0.4, 0.2, 0.1, 0.05, 0.025}) {
    int steps = int(std::lround(1.0 / eps));
    PhaseState end = leapfrog_ambient(g, {q, p}, eps, steps, mass);
    double dh = std::abs(g.potential(end.q) + kinetic(end.p, mass) - h0);
    lx.push_back(std::log(eps));
    ly.push_back(std::log(dh));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) { mx += lx[i]; my += ly[i]; }
  mx /= lx.size();
  my /= ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  double slope = sxy / sxx;
  std::ostringstream os;
  os << "fitted |dH| slope " << slope << " (required [1.8, 2.2])";
  detail = os.str();
  return slope > 1.8 && slope < 2.2;
}

// ---------------------------------------------------------------- criterion 3
bool criterion_reversibility(std::string& detail) {
  GaussianTarget g(Eigen::VectorXd::Zero(3),
                   GaussianTarget::illustration_covariance());
  SamplerConfig cfg;
  cfg.step_size = 0.3;
  cfg.n_leapfrog = 8;
  RngStream rng(1003);

  double worst = 0.0;
  Autoencoder id = Autoencoder::identity(3);
  for (int t = 0; t < 5; ++t)
    worst = std::max(worst, reversibility_defect(g, id, rng.normal_vector(3),
                                                 rng.normal_vector(3), cfg));

  Eigen::LLT<Eigen::MatrixXd> llt(g.covariance());
  Eigen::MatrixXd warm(1000, 3);
  for (int i = 0; i < 1000; ++i)
    warm.row(i) = (llt.matrixL() * rng.normal_vector(3)).transpose();
  Eigen::RowVectorXd mean = warm.colwise().mean();
  warm.rowwise() -= mean;  // zero-mean data: PCA biases vanish
  Autoencoder pca = pca_fit(warm, 2);
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd qm = pca.decode(rng.normal_vector(2));
    Eigen::VectorXd pm = pca.decode_momentum(rng.normal_vector(2));
    worst = std::max(worst, reversibility_defect(g, pca, qm, pm, cfg));
  }

  std::ostringstream os;
  os << "worst round-trip defect " << worst << " (limit 1e-8)";
  detail = os.str();
  return worst < 1e-8;
}

// ---------------------------------------------------------------- criterion 4
bool criterion_gramian(std::string& detail) {
  RngStream rng(1004);
  std::uniform_int_distribution<int> dim(1, 10);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int rows = dim(rng.engine()), cols = dim(rng.engine());
    Eigen::MatrixXd j(rows, cols);
    for (int a = 0; a < rows; ++a)
      for (int b = 0; b < cols; ++b) j(a, b) = rng.normal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    double log_oracle = 0.0;
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
      log_oracle += std::log(svd.singularValues()[k]);
    worst = std::max(worst,
                     std::abs(std::expm1(log_gramian_volume(j) - log_oracle)));
  }
  std::ostringstream os;
  os << "worst volume rel err vs SVD " << worst << " (limit 1e-10)";
  detail = os.str();
  return worst < 1e-10;
}

// ---------------------------------------------------------------- criterion 5
bool criterion_invertible_exactness(std::string& detail) {
  Eigen::MatrixXd cov = GaussianTarget::illustration_covariance();
  GaussianTarget g(Eigen::VectorXd::Zero(3), cov);

  // bit-exact equivalence of HMC and identity-autoencoder AE-HMC
  SamplerConfig cfg;
  cfg.step_size = 0.35;
  cfg.n_leapfrog = 8;
  cfg.volume_correction = true;
  Autoencoder id = Autoencoder::identity(3);
  LatentDynamics id_dyn(g, id, cfg.mass_or_identity(3));
  RngStream r1(1005), r2(1005);
  Eigen::VectorXd q1 = Eigen::VectorXd::Zero(3), q2 = q1;
  for (int i = 0; i < 500; ++i) {
    StepOutcome a = hmc_step(g, q1, cfg, r1);
    StepOutcome b = ae_hmc_step(g, id, id_dyn, q2, cfg, r2);
    if (!(a.next.array() == b.next.array()).all() || a.accepted != b.accepted ||
        a.u != b.u) {
      detail = "identity-autoencoder chain diverged from HMC bitwise";
      return false;
    }
    q1 = a.next;
    q2 = b.next;
  }

  // invertible (r = D) linear autoencoder: exact sampler for the 3D gaussian
  RngStream rng(1006);
  // well-conditioned invertible map: random rotations around fixed singular
  // values, so the transformed quadratic form stays integrable
  Eigen::MatrixXd g1(3, 3), g2(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      g1(i, j) = rng.normal();
      g2(i, j) = rng.normal();
    }
  Eigen::MatrixXd rot_l = Eigen::HouseholderQR<Eigen::MatrixXd>(g1).householderQ();
  Eigen::MatrixXd rot_r = Eigen::HouseholderQR<Eigen::MatrixXd>(g2).householderQ();
  Eigen::MatrixXd a = rot_l * Eigen::Vector3d(0.8, 1.0, 1.25).asDiagonal() *
                      rot_r.transpose();
  AffineLayer enc{a, Eigen::VectorXd::Zero(3), Activation::identity};
  AffineLayer dec{a.inverse(), Eigen::VectorXd::Zero(3), Activation::identity};
  Autoencoder inv({enc}, {dec});
  // the illustration covariance is near-singular, so the latent potential is
  // stiff; a short step keeps the leapfrog stable
  SamplerConfig inv_cfg = cfg;
  inv_cfg.step_size = 0.05;
  inv_cfg.n_leapfrog = 60;
  LatentDynamics dyn(g, inv, inv_cfg.mass_or_identity(3));

  StepKernel kernel = [&](const Eigen::VectorXd& q, RngStream& r) {
    return ae_hmc_step(g, inv, dyn, q, inv_cfg, r);
  };
  RngStream chain_rng(1007);
  ChainTrace t =
      run_chain(kernel, Eigen::VectorXd::Zero(3), 22000, 2000, 1, chain_rng);
  double err = (sample_cov(t.samples) - cov).norm() / cov.norm();

  std::ostringstream os;
  os << "identity chain bit-exact over 500 steps; invertible-AE covariance "
        "rel err "
     << err << " (limit 0.1), acceptance " << t.acceptance_rate();
  detail = os.str();
  return err < 0.1;
}

// ---------------------------------------------------------------- criterion 6
bool criterion_pca_illustration(std::string& detail) {
  Eigen::MatrixXd cov = GaussianTarget::illustration_covariance();
  GaussianTarget g(Eigen::VectorXd::Zero(3), cov);
  RngStream rng(1008);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  Eigen::MatrixXd warm(5000, 3);
  for (int i = 0; i < 5000; ++i)
    warm.row(i) = (llt.matrixL() * rng.normal_vector(3)).transpose();
  Autoencoder ae = pca_fit(warm, 2);

  SamplerConfig cfg;
  cfg.step_size = 0.4;
  cfg.n_leapfrog = 8;
  cfg.volume_correction = true;
  LatentDynamics dyn(g, ae, cfg.mass_or_identity(3));
  StepKernel kernel = [&](const Eigen::VectorXd& q, RngStream& r) {
    return ae_hmc_step(g, ae, dyn, q, cfg, r);
  };
  RngStream chain_rng(1009);
  ChainTrace t = run_chain(kernel, ae.decode(Eigen::VectorXd::Zero(2)), 22000,
                           2000, 1, chain_rng);

  // confinement: no component along the fitted third principal axis (the
  // orthogonal complement of the decoded plane)
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> warm_es(sample_cov(warm));
  Eigen::VectorXd v3 = warm_es.eigenvectors().col(0);  // smallest eigenvalue
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);  // eigen oracle
  Eigen::VectorXd bias = ae.decode(Eigen::VectorXd::Zero(2));
  double max_comp = 0.0;
  for (Eigen::Index i = 0; i < t.samples.rows(); ++i)
    max_comp = std::max(
        max_comp, std::abs(v3.dot(t.samples.row(i).transpose() - bias)));

  // latent marginal variances against the top-2 eigenvalues of the oracle
  Eigen::MatrixXd latent(t.samples.rows(), 2);
  for (Eigen::Index i = 0; i < t.samples.rows(); ++i)
    latent.row(i) = ae.encode(t.samples.row(i)).transpose();
  Eigen::MatrixXd lc = sample_cov(latent);
  double lam1 = es.eigenvalues()[2], lam2 = es.eigenvalues()[1];
  double e1 = std::abs(lc(0, 0) - lam1) / lam1;
  double e2 = std::abs(lc(1, 1) - lam2) / lam2;

  std::ostringstream os;
  os << "third-axis max component " << max_comp
     << " (limit 1e-10); latent variance rel errs " << e1 << ", " << e2
     << " (limit 0.1)";
  detail = os.str();
  return max_comp < 1e-10 && e1 < 0.1 && e2 < 0.1;
}

// ---------------------------------------------------------------- criterion 7
bool criterion_orthonormal_correction(std::string& detail) {
  GaussianTarget g(Eigen::VectorXd::Zero(3),
                   GaussianTarget::illustration_covariance());
  RngStream rng(1010);
  Eigen::LLT<Eigen::MatrixXd> llt(g.covariance());
  Eigen::MatrixXd warm(1000, 3);
  for (int i = 0; i < 1000; ++i)
    warm.row(i) = (llt.matrixL() * rng.normal_vector(3)).transpose();
  Autoencoder ae = pca_fit(warm, 2);

  SamplerConfig on;
  on.step_size = 0.4;
  on.n_leapfrog = 8;
  on.volume_correction = true;
  SamplerConfig off = on;
  off.volume_correction = false;
  LatentDynamics dyn(g, ae, on.mass_or_identity(3));

  Eigen::VectorXd q0 = ae.decode(Eigen::VectorXd::Zero(2));
  RngStream ra(1011), rb(1011);
  StepKernel ka = [&](const Eigen::VectorXd& q, RngStream& r) {
    return ae_hmc_step(g, ae, dyn, q, on, r);
  };
  StepKernel kb = [&](const Eigen::VectorXd& q, RngStream& r) {
    return ae_hmc_step(g, ae, dyn, q, off, r);
  };
  ChainTrace ta = run_chain(ka, q0, 2000, 0, 1, ra);
  ChainTrace tb = run_chain(kb, q0, 2000, 0, 1, rb);

  double max_factor = 0.0;
  for (const auto& rec : ta.iterations)
    max_factor = std::max(max_factor, std::abs(rec.log_volume_factor));
  bool identical = (ta.samples.array() == tb.samples.array()).all();
  for (std::size_t i = 0; i < ta.iterations.size() && identical; ++i)
    identical = ta.iterations[i].accepted == tb.iterations[i].accepted;

  std::ostringstream os;
  os << "max |log volume factor| " << max_factor
     << " (limit 1e-10); corrected/uncorrected traces identical: "
     << (identical ? "yes" : "no");
  detail = os.str();
  return max_factor < 1e-10 && identical;
}

// ---------------------------------------------------------------- criterion 8
bool criterion_pcn_prior(std::string& detail) {
  GpLinearInverseTarget prior(10, 1.25, 0.0625, {}, Eigen::VectorXd(), 1.0);
  SamplerConfig cfg;
  cfg.pcn_step = 2.0;
  RngStream rng(1012);
  StepKernel kernel = [&](const Eigen::VectorXd& q, RngStream& r) {
    return pcn_step(prior, q, cfg, r);
  };
  ChainTrace t = run_chain(kernel, Eigen::VectorXd::Zero(prior.dim()), 10500,
                           500, 1, rng);
  bool all_accepted = true;
  for (const auto& rec : t.iterations) all_accepted = all_accepted && rec.accepted;
  double err =
      (sample_cov(t.samples) - prior.prior_cov()).norm() / prior.prior_cov().norm();
  std::ostringstream os;
  os << "acceptance " << (all_accepted ? "1.0 exactly" : "NOT 1.0")
     << "; covariance rel err " << err << " (limit 0.15)";
  detail = os.str();
  return all_accepted && err < 0.15;
}

// ---------------------------------------------------------------- criterion 9
bool criterion_logistic_experiment(std::string& detail) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::logistic_synthetic;
  cfg.seed = 20240817;
  cfg.out_dir = "acceptance_logistic_out";
  ExperimentResult res = run_experiment(cfg);
  std::filesystem::remove_all(cfg.out_dir);

  if (!res.report.contains("accuracy")) {
    detail = "experiment produced no accuracy report";
    return false;
  }
  double acc_hmc = res.report["accuracy"]["hmc"].get<double>();
  double acc_ae = res.report["accuracy"]["ae-hmc"].get<double>();
  double coverage = res.report["coverage_95_ae_hmc"].get<double>();

  // microbenchmark: latent vs ambient gradient cost at D = 500, r = 50
  RngStream rng(1013);
  SyntheticLogistic synth = synth_logistic_data(
      cfg.dim, cfg.n_train, cfg.n_test, cfg.corr_block, cfg.corr_rho,
      cfg.prior_sd, rng);
  LogisticRegressionTarget target(synth.train.x, synth.train.y,
                                  cfg.prior_sd * cfg.prior_sd);
  Eigen::MatrixXd warm = res.warmup_samples;
  Autoencoder ae = res.autoencoder.value();
  LatentDynamics dyn(target, ae, Eigen::VectorXd::Ones(cfg.dim));
  Eigen::VectorXd q = 0.1 * rng.normal_vector(cfg.dim);
  Eigen::VectorXd z = ae.encode(q);
  volatile double sink = 0.0;
  auto time_us = [&](const std::function<void()>& body) {
    double best = 1e300;
    for (int rep = 0; rep < 5; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      for (int i = 0; i < 50; ++i) body();
      auto t1 = std::chrono::steady_clock::now();
      best = std::min(best,
                      std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    return best / 50.0;
  };
  double ambient_us = time_us([&] { sink += target.gradient(q).sum(); });
  double latent_us = time_us([&] { sink += dyn.grad_U(z).sum(); });
  double speedup = ambient_us / latent_us;

  std::ostringstream os;
  os << "accuracies hmc " << acc_hmc << ", ae-hmc " << acc_ae
     << " (each in [0.77, 0.87], gap <= 0.05); coverage " << coverage
     << " (>= 0.90); latent gradient speedup " << speedup << "x (>= 1.5x)";
  detail = os.str();
  return std::abs(acc_hmc - acc_ae) <= 0.05 && acc_hmc >= 0.77 &&
         acc_hmc <= 0.87 && acc_ae >= 0.77 && acc_ae <= 0.87 &&
         coverage >= 0.90 && speedup >= 1.5;
}

// --------------------------------------------------------------- criterion 10
bool criterion_gp_experiment(std::string& detail) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::gp_inverse;
  cfg.latent_dim = 25;
  cfg.seed = 20240817;
  // the manifold-restricted chain spreads slowly; both chains need to be well
  // past burn-in before their mean log-likelihoods are comparable
  cfg.n_iter = 30000;
  cfg.out_dir = "acceptance_gp_out";
  ExperimentResult res = run_experiment(cfg);
  std::filesystem::remove_all(cfg.out_dir);

  if (!res.report.contains("mean_obs_loglik")) {
    detail = "experiment produced no log-likelihood report";
    return false;
  }
  double ll_pcn = res.report["mean_obs_loglik"]["pcn"].get<double>();
  double ll_ae = res.report["mean_obs_loglik"]["ae-pcn"].get<double>();
  double gap = std::abs(ll_ae - ll_pcn) / std::abs(ll_pcn);
  std::ostringstream os;
  os << "mean per-observation log-likelihood pcn " << ll_pcn << ", ae-pcn "
     << ll_ae << "; relative gap " << gap << " (limit 0.10)";
  detail = os.str();
  return gap <= 0.10;
}

// --------------------------------------------------------------- criterion 11
bool criterion_ess(std::string& detail) {
  RngStream rng(1014);
  const int n = 100000;
  Eigen::VectorXd x(n);
  double phi = 0.5;
  x[0] = std::sqrt(1.0 / (1.0 - phi * phi)) * rng.normal();
  for (int i = 1; i < n; ++i) x[i] = phi * x[i - 1] + rng.normal();
  double ratio = ess(x).ess / double(n);
  std::ostringstream os;
  os << "AR(1)(0.5) ESS/n = " << ratio << " (expected 1/3 +- 10%)";
  detail = os.str();
  return ratio > (1.0 / 3.0) * 0.9 && ratio < (1.0 / 3.0) * 1.1;
}

// --------------------------------------------------------------- criterion 12
bool criterion_determinism(std::string& detail) {
  namespace fs = std::filesystem;
  fs::path dir = "acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);

  nlohmann::json config;
  config["experiment"] = "gaussian3d";
  config["latent_dim"] = 2;
  config["use_pca"] = true;
  config["n_iter"] = 400;
  config["warmup_samples"] = 300;
  config["step_size"] = 0.4;
  config["n_leapfrog"] = 8;
  {
    std::ofstream out(dir / "config.json");
    out << config.dump(2) << "\n";
  }

  auto run_once = [&](const std::string& out_dir) {
    std::string cmd = std::string(SAMPLER_BIN) + " run --config " +
                      (dir / "config.json").string() + " --out " +
                      (dir / out_dir).string() + " --seed 4242 > /dev/null";
    return std::system(cmd.c_str());
  };
  if (run_once("a") != 0 || run_once("b") != 0) {
    detail = "sampler run exited non-zero";
    fs::remove_all(dir);
    return false;
  }

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool identical = true;
  for (const char* f : {"trace_hmc.csv", "trace_ae_hmc.csv"}) {
    std::string a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
    if (a.empty() || a != b) identical = false;
  }
  fs::remove_all(dir);
  detail = identical ? "trace CSVs byte-identical across repeated seeded runs"
                     : "trace CSVs differ between identically seeded runs";
  return identical;
}

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::string&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "gradient correctness vs finite differences", criterion_gradients},
      {2, "leapfrog energy error is second order", criterion_leapfrog_order},
      {3, "negate-momentum reversibility", criterion_reversibility},
      {4, "Gramian volume vs SVD oracle", criterion_gramian},
      {5, "invertible-autoencoder exactness and identity bit-exactness",
       criterion_invertible_exactness},
      {6, "PCA latent illustration on the 3D gaussian",
       criterion_pca_illustration},
      {7, "orthonormal volume correction is neutral",
       criterion_orthonormal_correction},
      {8, "pCN preserves the GP prior", criterion_pcn_prior},
      {9, "logistic regression experiment, desk scale",
       criterion_logistic_experiment},
      {10, "GP inverse experiment, desk scale", criterion_gp_experiment},
      {11, "ESS matches the AR(1) closed form", criterion_ess},
      {12, "seeded runs are byte-identical", criterion_determinism},
  };

  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  for (auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %2d %s: %s — %s\n", c.id, ok ? "PASS" : "FAIL",
                c.name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
