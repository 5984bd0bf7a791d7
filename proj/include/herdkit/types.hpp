#pragma once

#include <Eigen/Dense>
#include <gmpxx.h>

#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>

// Rational scalar support: Eigen needs a NumTraits specialization before any
// Matrix<mpq_class> is instantiated.
namespace Eigen {
template <>
struct NumTraits<mpq_class> : GenericNumTraits<mpq_class> {
  typedef mpq_class Real;
  typedef mpq_class NonInteger;
  typedef mpq_class Nested;
  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 150,
    MulCost = 100
  };
};
}  // namespace Eigen

namespace herd {

using Rational = mpq_class;

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct PartitionError : Error { using Error::Error; };
struct PermutationError : Error { using Error::Error; };
struct ArgumentError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct SymmetryError : Error { using Error::Error; };
struct CoverageError : Error { using Error::Error; };
struct StructureError : Error { using Error::Error; };
struct NotATreeError : Error { using Error::Error; };
struct DepthError : Error { using Error::Error; };
struct ZeroGammaError : Error { using Error::Error; };
struct CertificateAssemblyError : Error { using Error::Error; };
struct NotHerdableError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ConventionError : Error { using Error::Error; };

// Default zero threshold for float-mode sign classification; the CLI can
// override it per run (HERD_EPS).  Exact-mode code ignores it.
inline constexpr double kDefaultEps = 1e-9;

inline double default_eps_from_env() {
  if (const char* s = std::getenv("HERD_EPS")) {
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end != s && v >= 0.0 && std::isfinite(v)) return v;
  }
  return kDefaultEps;
}

enum class Sign { Negative = -1, Zero = 0, Positive = 1 };

template <class S>
struct scalar_traits {
  static constexpr bool exact = false;
};

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static bool is_zero(double x, double eps) { return std::abs(x) <= eps; }
  static bool is_finite(double x) { return std::isfinite(x); }
  static double from_double(double x) { return x; }
  static double to_double(double x) { return x; }
  static const char* name() { return "float"; }
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static bool is_zero(const Rational& x, double) { return sgn(x) == 0; }
  static bool is_finite(const Rational&) { return true; }
  static Rational from_double(double x) { return Rational(x); }
  static double to_double(const Rational& x) { return x.get_d(); }
  static const char* name() { return "exact"; }
};

template <class S>
bool is_zero(const S& x, double eps) {
  return scalar_traits<S>::is_zero(x, eps);
}

template <class S>
Sign sign_of(const S& x, double eps) {
  if (is_zero(x, eps)) return Sign::Zero;
  return x > S(0) ? Sign::Positive : Sign::Negative;
}

inline int sign_value(Sign s) { return static_cast<int>(s); }

enum class Status { Herdable, NotHerdable, Unknown };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Herdable: return "herdable";
    case Status::NotHerdable: return "not_herdable";
    default: return "unknown";
  }
}

// Outcome of a decision procedure.  `certificate` is an input-space vector u
// with R*u >= 1 (componentwise); `witness` is a row-space vector w >= 0,
// w != 0, with w^T R = 0, proving the positive orthant is unreachable.
template <class S>
struct Verdict {
  Status status = Status::Unknown;
  std::optional<Vec<S>> certificate;
  std::optional<Vec<S>> witness;
  std::string detail;
};

}  // namespace herd
