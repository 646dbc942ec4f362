#ifndef LMX_ERRORS_HPP
#define LMX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lmx {

// User-facing input problems: bad files, bad specs, not enough data.
// CLI maps these to exit code 1.
class UserError : public std::runtime_error {
public:
    explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: rank deficiency, divergence, singular systems.
// CLI maps these to exit code 2.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class IngestError : public UserError {
public:
    IngestError(const std::string& msg, long row = -1, long col = -1)
        : UserError(msg), row(row), col(col) {}
    long row;
    long col;
};

class SpecError : public UserError {
public:
    explicit SpecError(const std::string& msg) : UserError(msg) {}
};

class InsufficientDataError : public UserError {
public:
    explicit InsufficientDataError(const std::string& msg) : UserError(msg) {}
};

class DegenerateColumnError : public UserError {
public:
    explicit DegenerateColumnError(const std::string& column)
        : UserError("constant column: " + column), column(column) {}
    std::string column;
};

class RankDeficientError : public NumericError {
public:
    explicit RankDeficientError(long column_index)
        : NumericError("rank-deficient design at column " + std::to_string(column_index)),
          column_index(column_index) {}
    long column_index;
};

class SingularError : public NumericError {
public:
    explicit SingularError(const std::string& msg) : NumericError(msg) {}
};

class DegenerateError : public NumericError {
public:
    explicit DegenerateError(const std::string& msg) : NumericError(msg) {}
};

class LeverageOneError : public NumericError {
public:
    explicit LeverageOneError(long index)
        : NumericError("leverage one at observation " + std::to_string(index)), index(index) {}
    long index;
};

class ConvergenceError : public NumericError {
public:
    explicit ConvergenceError(const std::string& msg) : NumericError(msg) {}
};

class SeparationError : public NumericError {
public:
    explicit SeparationError(const std::string& msg) : NumericError(msg) {}
};

class SolverError : public NumericError {
public:
    explicit SolverError(const std::string& msg) : NumericError(msg) {}
};

class BandwidthError : public NumericError {
public:
    explicit BandwidthError(const std::string& msg) : NumericError(msg) {}
};

class ConformalEmptyError : public NumericError {
public:
    explicit ConformalEmptyError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace lmx

#endif
