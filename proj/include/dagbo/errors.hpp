#ifndef DAGBO_ERRORS_HPP
#define DAGBO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dagbo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched vector/tensor extents.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Operation requires a nonempty point set.
class EmptyArchiveError : public Error {
public:
    using Error::Error;
};

class UnsupportedDimensionError : public Error {
public:
    using Error::Error;
};

class EmptyDataError : public Error {
public:
    using Error::Error;
};

/// Cholesky failed even after the full jitter schedule.
class IllConditionedKernelError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class CycleError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// Input outside a testbed's design domain.
class DomainError : public Error {
public:
    using Error::Error;
};

class SimulationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace dagbo

#endif  // DAGBO_ERRORS_HPP
