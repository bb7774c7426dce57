#pragma once

// Independent dense reference implementations used to check the sparse code.
// Nothing here calls into the library's propagation, gradient or metric code.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sga/graph.hpp"

namespace oracle {

// Erdos-Renyi graph with Gaussian features and uniform labels.
sga::Graph random_graph(int n, double p, int features, int classes, std::uint64_t seed);

// Same, but labels follow blocks and features carry a block signal, so that
// trained models are confident.
sga::Graph planted_graph(int n, int classes, double p_in, double p_out, int features,
                         std::uint64_t seed);

Eigen::MatrixXd dense_adjacency(const sga::Graph& g);
Eigen::MatrixXd normalize(const Eigen::MatrixXd& adjacency);  // D̃^{-1/2}(A+I)D̃^{-1/2}
Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& m, int k);

// All-pairs hop distances; -1 for unreachable.
std::vector<std::vector<int>> floyd_warshall(const sga::Graph& g);

// softmax(Â^k X W / eps) row t computed from a dense adjacency.
Eigen::VectorXd dense_prediction(const Eigen::MatrixXd& adjacency, const Eigen::MatrixXd& features,
                                 const Eigen::MatrixXd& weight, int t, int k, double eps);

// ln p[c'] - ln p[c_t] from the dense pipeline (log-sum-exp form).
double dense_loss(const Eigen::MatrixXd& adjacency, const Eigen::MatrixXd& features,
                  const Eigen::MatrixXd& weight, int t, int k, double eps, int c_t, int c_prime);

// Central difference of dense_loss in A_uv = A_vu around the current value.
double finite_difference(const Eigen::MatrixXd& adjacency, const Eigen::MatrixXd& features,
                         const Eigen::MatrixXd& weight, int t, int k, double eps, int c_t, int c_prime,
                         int u, int v, double h = 1e-5);

double relative_error(double a, double b, double floor = 1e-6);

// Pearson correlation over the list of directed (deg u, deg v) edge pairs.
double brute_force_pearson(const sga::Graph& g);

}  // namespace oracle
