#ifndef SROA_TENSOR_HPP_
#define SROA_TENSOR_HPP_

// Dense symmetric tensors and the multilinear algebra built on them.
//
// Entries are stored as the full n^p array in row-major lexicographic order:
// the flat index of (i_1, ..., i_p) is sum_k i_k * n^(p-1-k). Every
// constructor either averages over index orbits or fills each orbit from a
// single value computed at its sorted representative, so entries that are
// related by a permutation of indices are bitwise equal.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sroa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative slack accepted on |‖v‖ - 1| for unit-vector arguments.
inline constexpr double kUnitTolerance = 1e-9;

namespace detail {

inline std::size_t checked_pow(int base, int exponent) {
  std::size_t out = 1;
  for (int k = 0; k < exponent; ++k) out *= static_cast<std::size_t>(base);
  return out;
}

/// Advance a multi-index in lexicographic order. Returns false on wrap-around.
inline bool next_index(std::vector<int>& idx, int dim) {
  for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) {
    if (++idx[k] < dim) return true;
    idx[k] = 0;
  }
  return false;
}

inline std::size_t flat_index(std::span<const int> idx, int dim) {
  std::size_t flat = 0;
  for (int i : idx) flat = flat * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i);
  return flat;
}

/// Flat index of the sorted (non-decreasing) permutation of idx.
inline std::size_t canonical_index(std::vector<int> idx, int dim) {
  std::sort(idx.begin(), idx.end());
  return flat_index(idx, dim);
}

/// Fill an n^p array by evaluating `f` once per index orbit, at the sorted
/// representative, and copying that value to the rest of the orbit. The sorted
/// tuple is the lexicographically smallest permutation, so its slot is always
/// written before any other member of the orbit is visited.
template <class F>
std::vector<double> fill_by_orbit(int order, int dim, F&& f) {
  std::vector<double> out(checked_pow(dim, order));
  std::vector<int> idx(order, 0);
  std::vector<int> sorted(order);
  std::size_t flat = 0;
  do {
    sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t canon = flat_index(sorted, dim);
    out[flat] = (canon == flat) ? f(std::as_const(sorted)) : out[canon];
    ++flat;
  } while (next_index(idx, dim));
  return out;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail

/// Dense order-p, dimension-n tensor whose entries are invariant under any
/// permutation of their indices. Values are immutable after construction.
class SymmetricTensor {
 public:
  SymmetricTensor() = default;

  static SymmetricTensor zeros(int order, int dim) {
    validate_shape(order, dim);
    return SymmetricTensor(order, dim, std::vector<double>(detail::checked_pow(dim, order), 0.0));
  }

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  std::span<const double> entries() const { return entries_; }

  double operator()(std::span<const int> idx) const {
    detail::require(static_cast<int>(idx.size()) == order_, "index arity does not match tensor order");
    for (int i : idx) detail::require(i >= 0 && i < dim_, "index out of range");
    return entries_[detail::flat_index(idx, dim_)];
  }
  double operator()(std::initializer_list<int> idx) const {
    return (*this)(std::span<const int>(idx.begin(), idx.size()));
  }

  bool same_shape(const SymmetricTensor& other) const {
    return order_ == other.order_ && dim_ == other.dim_;
  }

  // Construction from data that is already symmetric by construction. Used by
  // the free functions below; not for raw user input (see symmetrize).
  static SymmetricTensor from_symmetric_data(int order, int dim, std::vector<double> entries) {
    validate_shape(order, dim);
    detail::require(entries.size() == detail::checked_pow(dim, order),
                    "entry count must equal dim^order");
    for (double e : entries) detail::require(std::isfinite(e), "tensor entries must be finite");
    return SymmetricTensor(order, dim, std::move(entries));
  }

 private:
  SymmetricTensor(int order, int dim, std::vector<double> entries)
      : order_(order), dim_(dim), entries_(std::move(entries)) {}

  static void validate_shape(int order, int dim) {
    detail::require(order >= 2, "tensor order must be at least 2");
    detail::require(dim >= 1, "tensor dimension must be positive");
  }

  int order_ = 0;
  int dim_ = 0;
  std::vector<double> entries_;
};

/// A recovered rank-one component: weight lambda and unit vector v.
struct SpectralPair {
  double weight = 0.0;
  Vector vector;
};

namespace detail {

inline Vector checked_unit(const Vector& v) {
  const double norm = v.norm();
  require(std::isfinite(norm) && std::abs(norm - 1.0) <= kUnitTolerance,
          "vector must have unit Euclidean norm");
  return v / norm;
}

/// weight * v^{(x)p} without the unit-norm precondition.
inline std::vector<double> outer_power(double weight, const Vector& v, int order) {
  const int dim = static_cast<int>(v.size());
  return fill_by_orbit(order, dim, [&](const std::vector<int>& sorted) {
    double prod = weight;
    for (int i : sorted) prod *= v[i];
    return prod;
  });
}

/// Contract the trailing mode of an array viewed as (rest x dim) with x.
inline std::vector<double> contract_last(std::span<const double> a, const Vector& x) {
  const std::size_t dim = static_cast<std::size_t>(x.size());
  const std::size_t rest = a.size() / dim;
  std::vector<double> out(rest);
  for (std::size_t r = 0; r < rest; ++r) {
    const double* row = a.data() + r * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) acc += row[j] * x[static_cast<Eigen::Index>(j)];
    out[r] = acc;
  }
  return out;
}

}  // namespace detail

/// Symmetric rank-one tensor weight * v^{(x)p}; v must be a unit vector.
inline SymmetricTensor make_rank_one(double weight, const Vector& vector, int order) {
  detail::require(order >= 2, "tensor order must be at least 2");
  detail::require(vector.size() >= 1, "vector must be non-empty");
  detail::require(std::isfinite(weight), "weight must be finite");
  const Vector unit = detail::checked_unit(vector);
  return SymmetricTensor::from_symmetric_data(order, static_cast<int>(unit.size()),
                                              detail::outer_power(weight, unit, order));
}

struct SymmetrizeResult {
  SymmetricTensor tensor;
  double max_correction = 0.0;  ///< max |output - input| over all entries
};

/// Average a raw n^p array over all index permutations.
inline SymmetrizeResult symmetrize_with_report(std::span<const double> dense, int order, int dim) {
  detail::require(order >= 2 && dim >= 1, "invalid tensor shape");
  detail::require(dense.size() == detail::checked_pow(dim, order), "array length must equal dim^order");

  // Orbit sums, keyed by canonical flat index.
  std::vector<double> sum(dense.size(), 0.0);
  std::vector<int> count(dense.size(), 0);
  std::vector<double> first(dense.size(), 0.0);
  std::vector<char> uniform(dense.size(), 1);
  std::vector<int> idx(order, 0);
  std::size_t flat = 0;
  do {
    const std::size_t canon = detail::canonical_index(idx, dim);
    if (count[canon] == 0) {
      first[canon] = dense[flat];
    } else if (dense[flat] != first[canon]) {
      uniform[canon] = 0;
    }
    sum[canon] += dense[flat];
    ++count[canon];
    ++flat;
  } while (detail::next_index(idx, dim));

  auto out = detail::fill_by_orbit(order, dim, [&](const std::vector<int>& sorted) {
    const std::size_t canon = detail::flat_index(sorted, dim);
    // An orbit whose entries already agree keeps its value bit for bit.
    return uniform[canon] ? first[canon] : sum[canon] / count[canon];
  });
  double max_correction = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    max_correction = std::max(max_correction, std::abs(out[i] - dense[i]));
  }
  return {SymmetricTensor::from_symmetric_data(order, dim, std::move(out)), max_correction};
}

inline SymmetricTensor symmetrize(std::span<const double> dense, int order, int dim) {
  return symmetrize_with_report(dense, order, dim).tensor;
}

/// T(x, ..., x, I, ..., I) with k copies of x. Returns n^(p-k) values in
/// row-major order; k == p gives the single value T x^{(x)p}.
inline std::vector<double> contract_vector(const SymmetricTensor& t, const Vector& x, int k) {
  detail::require(x.size() == t.dim(), "vector dimension does not match tensor");
  detail::require(k >= 1 && k <= t.order(), "contraction count must lie in [1, order]");
  std::vector<double> cur = detail::contract_last(t.entries(), x);
  for (int step = 1; step < k; ++step) cur = detail::contract_last(cur, x);
  return cur;
}

/// T x^{(x)p}, the degree-p form.
inline double evaluate(const SymmetricTensor& t, const Vector& x) {
  return contract_vector(t, x, t.order()).front();
}

/// T x^{(x)p-1} as a vector.
inline Vector gradient_map(const SymmetricTensor& t, const Vector& x) {
  const auto out = contract_vector(t, x, t.order() - 1);
  return Eigen::Map<const Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

/// M(W, ..., W) for a symmetric tensor of dimension d and a d x m matrix W.
inline SymmetricTensor multilinear_transform(const SymmetricTensor& t, const Matrix& w) {
  detail::require(w.rows() == t.dim(), "transform must have one row per tensor dimension");
  detail::require(w.cols() >= 1, "transform must have at least one column");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  // Each pass transforms the trailing mode and moves it to the front, so after
  // p passes every mode is transformed and the original order is restored.
  std::vector<double> cur(t.entries().begin(), t.entries().end());
  const Eigen::Index last = t.dim();
  for (int pass = 0; pass < t.order(); ++pass) {
    const Eigen::Index rest = static_cast<Eigen::Index>(cur.size()) / last;
    Eigen::Map<const RowMajor> a(cur.data(), rest, last);
    std::vector<double> next(static_cast<std::size_t>(rest * w.cols()));
    Eigen::Map<Matrix> b(next.data(), rest, w.cols());
    b.noalias() = a * w;
    cur = std::move(next);
  }
  // Rounding differs between orbit members; re-average to restore exact symmetry.
  return symmetrize(cur, t.order(), static_cast<int>(w.cols()));
}

inline double inner(const SymmetricTensor& a, const SymmetricTensor& b) {
  detail::require(a.same_shape(b), "inner product needs tensors of equal order and dimension");
  const auto ea = a.entries();
  const auto eb = b.entries();
  double acc = 0.0;
  for (std::size_t i = 0; i < ea.size(); ++i) acc += ea[i] * eb[i];
  return acc;
}

inline double frobenius_norm(const SymmetricTensor& t) {
  double acc = 0.0;
  for (double e : t.entries()) acc += e * e;
  return std::sqrt(acc);
}

/// T + weight * v^{(x)p}. Deflation passes the negated weight.
inline SymmetricTensor axpy_rank_one(const SymmetricTensor& t, double weight, const Vector& vector) {
  detail::require(vector.size() == t.dim(), "vector dimension does not match tensor");
  detail::require(std::isfinite(weight), "weight must be finite");
  const Vector unit = detail::checked_unit(vector);
  auto out = detail::outer_power(weight, unit, t.order());
  const auto e = t.entries();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += e[i];
  return SymmetricTensor::from_symmetric_data(t.order(), t.dim(), std::move(out));
}

inline SymmetricTensor add(const SymmetricTensor& a, const SymmetricTensor& b) {
  detail::require(a.same_shape(b), "tensor shapes differ");
  std::vector<double> out(a.entries().begin(), a.entries().end());
  const auto eb = b.entries();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += eb[i];
  return SymmetricTensor::from_symmetric_data(a.order(), a.dim(), std::move(out));
}

inline SymmetricTensor subtract(const SymmetricTensor& a, const SymmetricTensor& b) {
  detail::require(a.same_shape(b), "tensor shapes differ");
  std::vector<double> out(a.entries().begin(), a.entries().end());
  const auto eb = b.entries();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= eb[i];
  return SymmetricTensor::from_symmetric_data(a.order(), a.dim(), std::move(out));
}

inline SymmetricTensor scale(const SymmetricTensor& a, double c) {
  std::vector<double> out(a.entries().begin(), a.entries().end());
  for (double& e : out) e *= c;
  return SymmetricTensor::from_symmetric_data(a.order(), a.dim(), std::move(out));
}

}  // namespace sroa

#endif  // SROA_TENSOR_HPP_
