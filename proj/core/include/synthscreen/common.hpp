#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace synthscreen {

/// Row-per-sample feature matrix.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Every contract violation in the library surfaces as this exception type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Direction { lower_better, higher_better };

inline const char* to_string(Direction d) {
    return d == Direction::lower_better ? "lower_better" : "higher_better";
}

}  // namespace synthscreen
