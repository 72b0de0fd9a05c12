#pragma once

// Turns measured input-output data into the VRFT regression problem.
//
// For reference model T_d with relative degree d, the virtual reference is
// obtained by running T_d^{-1} as a d-step-advanced causal recursion; the
// last d samples have no future data and are dropped. With
// e_bar(t) = r_bar(t) - y(t), the controller's integrator state is
// z_bar(t) = sum_{tau < t} e_bar(tau), and row t of the regressor matrix is
// the dictionary evaluated at z_bar(t). The regression target is u(t).

#include <Eigen/Core>

#include <filesystem>
#include <span>

#include "vrft/lti.hpp"
#include "vrft/nonlin.hpp"

namespace vrft {

struct Dataset {
  Dataset(Signal u, Signal y);

  std::size_t size() const { return u.size(); }

  Signal u;
  Signal y;
};

/// CSV with header row "t,u,y"; t runs 1..N.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

struct RegressionProblem {
  Eigen::MatrixXd phi;     // N_eff x m
  Eigen::VectorXd target;  // N_eff plant-input samples
  Eigen::VectorXd zbar;    // integrator state per row
  Dictionary dictionary;

  Eigen::Index rows() const { return phi.rows(); }
  Eigen::Index cols() const { return phi.cols(); }
};

/// Length N - relative_degree(td).
Signal virtual_reference(const TransferFunction& td, const Signal& y);

RegressionProblem build_regression(const Dataset& data, const TransferFunction& td, const Dictionary& dict);

/// sum_t (target(t) - phi(t, :) rho)^2
double vrft_cost(const RegressionProblem& problem, const Eigen::VectorXd& rho);

/// Columns: t, zbar, target, phi_1..phi_m.
void write_regression_csv(const std::filesystem::path& path, const RegressionProblem& problem);

}  // namespace vrft
