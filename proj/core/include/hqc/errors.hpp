#pragma once

#include <stdexcept>
#include <string>

namespace hqc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error { public: using Error::Error; };
class GeometryError : public Error { public: using Error::Error; };
class PlacementError : public Error { public: using Error::Error; };
class SelectionError : public Error { public: using Error::Error; };
class UndefinedObservableError : public Error { public: using Error::Error; };
class InputError : public Error { public: using Error::Error; };
class FitError : public Error { public: using Error::Error; };
class SingularParameterError : public Error { public: using Error::Error; };
class CoverageError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

// Thrown when the QR iteration gives up. index is the LAPACK info value:
// eigenvalues index..N-1 converged, the leading ones did not.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, int index) : Error(what), index_(index) {}
    int index() const noexcept { return index_; }
private:
    int index_;
};

}  // namespace hqc
