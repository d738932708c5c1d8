#pragma once
#include <stdexcept>

namespace dlcast {

// Error taxonomy mapped to CLI exit codes: config=2, data=3, train=4, io=5.
struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };
struct DataError : std::runtime_error { using std::runtime_error::runtime_error; };
struct TrainError : std::runtime_error { using std::runtime_error::runtime_error; };
struct IoError : std::runtime_error { using std::runtime_error::runtime_error; };

} // namespace dlcast
