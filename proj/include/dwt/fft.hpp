#pragma once

#include <complex>

#include <Eigen/Dense>

namespace dwt::fft {

/// Unnormalized forward DFT: out_k = sum_j in_j e^{-2 pi i jk/n}.
Eigen::VectorXcd forward(const Eigen::VectorXcd& in);
/// Unnormalized inverse DFT: out_j = sum_k in_k e^{+2 pi i jk/n}.
Eigen::VectorXcd backward(const Eigen::VectorXcd& in);

/// In-place variants over contiguous storage of length n.
void forward(std::complex<double>* data, int n);
void backward(std::complex<double>* data, int n);

}  // namespace dwt::fft
