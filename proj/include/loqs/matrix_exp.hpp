#pragma once
// Dense complex matrix exponential via scaling and squaring with a Taylor
// series whose tail is cut once a term drops below 1e-14 in max norm.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace loqs {

inline Eigen::MatrixXcd matrix_exp(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("matrix_exp: square matrix required");
    const double norm = a.cwiseAbs().maxCoeff();
    if (!std::isfinite(norm)) throw std::invalid_argument("matrix_exp: non-finite entry");

    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    const Eigen::MatrixXcd b = a / std::pow(2.0, squarings);

    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
    for (int k = 1; k <= 64; ++k) {
        term = (term * b) / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-14) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace loqs
