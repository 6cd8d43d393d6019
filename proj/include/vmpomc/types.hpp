#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vmpomc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Local Hilbert space dimension and Liouville super-index dimension.
inline constexpr int kPhysDim = 2;
inline constexpr int kSuperDim = 4;

// Super-index packing s = 2*alpha + beta, with |0> the sigma^z = +1 state.
inline constexpr int super_index(int alpha, int beta) { return kPhysDim * alpha + beta; }
inline constexpr int ket_index(int s) { return s >> 1; }
inline constexpr int bra_index(int s) { return s & 1; }

// sigma^z eigenvalue of basis state |b>, b in {0,1}.
inline constexpr double z_value(int b) { return b == 0 ? 1.0 : -1.0; }

// A length-N vector of Liouville super-indices x_j in {0..3}.
using SpinConfig = std::vector<int>;

struct ZeroTraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroAmplitudeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolveFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateNullError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotAStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NaNGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace vmpomc
