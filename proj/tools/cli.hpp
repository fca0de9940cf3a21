#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pcts::cli {

struct RunConfig {
  std::string command;
  std::string model = "copula";
  std::string input;
  std::string count_col = "x";
  std::vector<std::string> covariates;
  bool trend = false;
  std::vector<int> latent_order{1};
  long particles = 1000;
  long final_particles = 100000;
  std::uint64_t seed = 1;
  int replicates = 100;
  std::string out_dir = ".";
  int bootstrap_sims = 200;
  bool refit = false;
  int threads = 1;
  std::string optimizer = "nelder-mead";
  int max_evaluations = 4000;
  long n = 100;
  double lambda = 2.0;
  double mu = 1.0;
  std::vector<double> beta;
  double alpha = 0.5;
  double p = 0.5;
  std::vector<double> phi{0.5};
  std::vector<double> lifetime{0.5, 0.5};
  long burn_in = 0;
  std::string lambda_grid = "0.1:10:0.1";
  std::vector<double> lambdas{0.1, 1.0, 10.0};
  int u_points = 201;
  int hermite_order = 30;
  int max_lag = 20;
  std::string fit_record;
};

/// Runs one command line. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcts::cli
