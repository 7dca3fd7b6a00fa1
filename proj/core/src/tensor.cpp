#include "ctnet/tensor.hpp"

#include <cmath>
#include <sstream>

namespace ctnet {

std::string Shape::str() const {
    std::ostringstream os;
    os << n << "x" << c << "x" << h << "x" << w;
    return os.str();
}

bool Tensor::finite() const {
    for (float v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace ctnet
