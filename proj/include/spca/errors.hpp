#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spca {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Raised by operations that require at least one nonzero observation.
class AllZeroData : public Error {
public:
    AllZeroData() : Error("all observations are zero") {}
};

/// The query point coincides (within tolerance) with a sample point +-X_i,
/// where the plain gradient and the Weiszfeld update are undefined.
class SamplePointHit : public Error {
public:
    SamplePointHit(std::int64_t index, int sign)
        : Error("query point coincides with sample point " +
                std::string(sign < 0 ? "-X[" : "X[") + std::to_string(index) + "]"),
          index_(index),
          sign_(sign) {}

    std::int64_t index() const noexcept { return index_; }
    int sign() const noexcept { return sign_; }

private:
    std::int64_t index_;
    int sign_;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

/// Every term of the step scale L(v) was excluded (n = 1 and v = +-X_1).
class UndefinedScale : public Error {
public:
    UndefinedScale() : Error("step scale undefined: every term excluded") {}
};

/// Escape-step backtracking failed to find a strict decrease after the
/// configured number of shrinks; callers treat this as "no move".
class BacktrackExhausted : public Error {
public:
    BacktrackExhausted() : Error("escape-step backtracking exhausted") {}
};

class DegenerateData : public Error {
public:
    DegenerateData() : Error("sample covariance is identically zero") {}
};

/// The ray direction passes through a sample direction +-X_i/||X_i||.
class DirectionAtSamplePoint : public Error {
public:
    using Error::Error;
};

class ZeroVector : public Error {
public:
    ZeroVector() : Error("vector must be nonzero") {}
};

class UnsupportedDim : public Error {
public:
    using Error::Error;
};

class QuadratureNonConvergence : public Error {
public:
    using Error::Error;
};

class InvalidPsi : public Error {
public:
    using Error::Error;
};

class CsvParseError : public Error {
public:
    using Error::Error;
};

}  // namespace spca
