#ifndef IGABEM_COMMON_HPP_
#define IGABEM_COMMON_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <stdexcept>
#include <string>

namespace igabem {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using VectorXd = Eigen::VectorXd;
using VectorXcd = Eigen::VectorXcd;
using MatrixXd = Eigen::MatrixXd;
using MatrixXcd = Eigen::MatrixXcd;
using SparseMatrixD = Eigen::SparseMatrix<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Error in user-provided geometry or configuration data.
class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

#define IGABEM_REQUIRE(cond, msg)                                      \
  do {                                                                 \
    if (!(cond)) throw std::invalid_argument(std::string("igabem: ") + (msg)); \
  } while (0)

#define IGABEM_CHECK(cond, msg)                                    \
  do {                                                             \
    if (!(cond)) throw std::logic_error(std::string("igabem internal: ") + (msg)); \
  } while (0)

}  // namespace igabem

#endif  // IGABEM_COMMON_HPP_
