#pragma once

#include <stdexcept>
#include <string>

namespace radar {

// Config/schema problems: bad field values, cross-field violations, malformed
// input files. The CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Contract violations at run time (item not live, missing table, stage
// violations, ...). The CLI maps these to exit code 2.
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace radar
