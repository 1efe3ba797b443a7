#pragma once

#include <Eigen/Dense>

#include <span>

namespace nouk::oracle {

/// I_n as the sum over all partial pairings M of the selected directions of
/// (-1)^|M| prod_{(i,j) in M} G_ij prod_{i unpaired} v_i. Exponential cost;
/// limited to n <= 8.
double in_pairing_expansion(std::span<const double> values, const Eigen::MatrixXd& pairing,
                            unsigned mask);

/// N(h, Q)(y) / N(0, Q)(y) for positive-definite Q, from Cholesky factors.
double gaussian_pdf_ratio(const Eigen::MatrixXd& q, const Eigen::VectorXd& h,
                          const Eigen::VectorXd& y);

}  // namespace nouk::oracle
