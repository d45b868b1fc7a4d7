#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crfmnes {

using Vector = std::vector<double>;

// Raised when the strategy state leaves the representable range (overflow of
// ||v||, non-finite intermediates, non-positive determinant). Precondition
// violations use std::invalid_argument / std::logic_error instead.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crfmnes
