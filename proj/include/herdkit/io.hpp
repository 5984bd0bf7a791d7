#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "herdkit/types.hpp"

namespace herd {

// Parsed but not yet analyzed system description.  Matrices are kept as raw
// doubles; `build_*` converts to the requested scalar (exactly, for integer
// weights in rational mode).
struct SystemDescriptor {
  enum class Form { DenseJson, EdgesJson, EdgeList };
  enum class Mode { Float, Exact };
  Index n = 0;
  bool directed = false;
  Mode mode = Mode::Float;
  Form form = Form::DenseJson;
  std::vector<std::vector<double>> A;              // row-major, n x n
  std::optional<std::vector<Index>> leaders;       // 0-based, ascending
  std::optional<std::vector<std::vector<double>>> B;  // n x m
};

struct DiagonalDescriptor {
  std::vector<double> lambda, gamma;
  SystemDescriptor::Mode mode = SystemDescriptor::Mode::Float;
};

// Autodetects JSON ('{' first) vs. the edge-list text form.
SystemDescriptor parse_system(const std::string& text,
                              const std::string& source_name = "<input>");
DiagonalDescriptor parse_diagonal(const std::string& text,
                                  const std::string& source_name = "<input>");

std::string serialize_system(const SystemDescriptor& desc);

// Throws ParseError when exact mode is requested over fractional weights.
void require_integral(const SystemDescriptor& desc);

bool descriptors_equal(const SystemDescriptor& a, const SystemDescriptor& b);

template <class S>
Mat<S> system_matrix(const SystemDescriptor& desc) {
  Mat<S> A(desc.n, desc.n);
  for (Index i = 0; i < desc.n; ++i)
    for (Index j = 0; j < desc.n; ++j)
      A(i, j) = scalar_traits<S>::from_double(desc.A[i][j]);
  return A;
}

// Input matrix: explicit B, or unit columns for each leader (ascending).
template <class S>
Mat<S> input_matrix(const SystemDescriptor& desc) {
  if (desc.B) {
    const auto& rows = *desc.B;
    Mat<S> B(desc.n, static_cast<Index>(rows[0].size()));
    for (Index i = 0; i < B.rows(); ++i)
      for (Index j = 0; j < B.cols(); ++j)
        B(i, j) = scalar_traits<S>::from_double(rows[i][j]);
    return B;
  }
  const auto& L = *desc.leaders;
  Mat<S> B = Mat<S>::Zero(desc.n, static_cast<Index>(L.size()));
  for (Index j = 0; j < B.cols(); ++j) B(L[j], j) = S(1);
  return B;
}

// Runs one CLI invocation; arguments exclude the program name.  Reports go to
// `out`, diagnostics to `err`.  Exit codes: 0 herdable, 1 not herdable,
// 2 unknown, 64 usage, 65 bad input, 70 internal failure.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace herd
