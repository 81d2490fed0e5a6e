#pragma once

#include <stdexcept>
#include <string>

namespace texbleu {

// Base class for everything thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / stream failures (missing files, short reads, write errors).
struct io_error : error {
    using error::error;
};

// Malformed input data or invalid parameter values.
struct data_error : error {
    using error::error;
};

// Artifacts that do not fit together (vocab vs. table sizes, dim mismatches).
struct binding_error : error {
    using error::error;
};

}  // namespace texbleu
