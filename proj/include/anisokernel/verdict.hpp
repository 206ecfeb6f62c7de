#pragma once

#include <string>

namespace anisokernel {

/// Outcome of one executable property check.
struct PropertyVerdict {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string context;
};

} // namespace anisokernel
