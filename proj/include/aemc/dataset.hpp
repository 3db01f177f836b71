#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "aemc/chain.hpp"
#include "aemc/rng.hpp"
#include "aemc/targets.hpp"

namespace aemc {

struct Dataset {
  Eigen::MatrixXd x;  // n x D
  Eigen::VectorXd y;  // 0/1 labels
};

// CSV with a header row; the column named "label" holds the 0/1 response,
// every other column is a numeric feature.
inline Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int label_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "label") label_col = static_cast<int>(i);
  if (label_col < 0)
    throw std::runtime_error("CSV has no 'label' column: " + path);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != header.size())
      throw std::runtime_error("ragged CSV row in " + path);
    rows.push_back(std::move(row));
  }

  Dataset d;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = static_cast<Eigen::Index>(header.size()) - 1;
  d.x.resize(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (static_cast<int>(j) == label_col) {
        double v = rows[i][j];
        if (v != 0.0 && v != 1.0)
          throw std::runtime_error("label not in {0,1} in " + path);
        d.y[i] = v;
      } else {
        d.x(i, c++) = rows[i][j];
      }
    }
  }
  if (!d.x.allFinite())
    throw std::runtime_error("non-finite feature in " + path);
  return d;
}

inline void save_dataset_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "label";
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) out << ",x_" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    out << (d.y[i] != 0.0 ? 1 : 0);
    for (Eigen::Index j = 0; j < d.x.cols(); ++j)
      out << ',' << detail::format_double(d.x(i, j));
    out << "\n";
  }
}

struct SyntheticLogistic {
  Dataset train;
  Dataset test;
  Eigen::VectorXd beta_true;
};

// Binary-classification design with a `block`-column equicorrelated Gaussian
// block (off-diagonal correlation rho) and iid standard-normal remainder.
// True coefficients are drawn from the N(0, prior_sd^2) model prior and
// labels are Bernoulli(sigmoid(X beta)).
inline SyntheticLogistic synth_logistic_data(int d, int n_train, int n_test,
                                             int block, double rho,
                                             double prior_sd, RngStream& rng) {
  if (block < 0 || block > d)
    throw std::invalid_argument("block size must be in [0, D]");
  if (block > 1) {
    double lo = -1.0 / (block - 1);
    if (rho <= lo || rho >= 1.0)
      throw std::invalid_argument("correlation outside (-1/(block-1), 1)");
  }
  if (n_train < 1 || n_test < 0)
    throw std::invalid_argument("need n_train >= 1, n_test >= 0");

  Eigen::MatrixXd block_chol;
  if (block > 1) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(block, block, rho);
    c.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("equicorrelated block not positive definite");
    block_chol = llt.matrixL();
  }

  const int n = n_train + n_test;
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i) {
    if (block > 1) {
      Eigen::VectorXd z = rng.normal_vector(block);
      x.row(i).head(block) = (block_chol * z).transpose();
    } else if (block == 1) {
      x(i, 0) = rng.normal();
    }
    for (int j = block; j < d; ++j) x(i, j) = rng.normal();
  }

  Eigen::VectorXd beta = prior_sd * rng.normal_vector(d);
  Eigen::VectorXd lin = x * beta;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.uniform() < sigmoid(lin[i]) ? 1.0 : 0.0;

  SyntheticLogistic out;
  out.train.x = x.topRows(n_train);
  out.train.y = y.head(n_train);
  out.test.x = x.bottomRows(n_test);
  out.test.y = y.tail(n_test);
  out.beta_true = beta;
  return out;
}

}  // namespace aemc
