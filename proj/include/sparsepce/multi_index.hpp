#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace sparsepce {

/// Number of multi-indices of dimension d with total degree at most k,
/// i.e. the binomial (k+d)! / (k! d!), evaluated as a running product so
/// intermediate values never pass through a factorial.
inline std::uint64_t total_degree_cardinality(int dim, int order) {
  if (dim < 1) throw std::invalid_argument("total_degree_cardinality: dim must be >= 1");
  if (order < 0) throw std::invalid_argument("total_degree_cardinality: order must be >= 0");
  unsigned __int128 result = 1;
  for (int i = 1; i <= dim; ++i) {
    result *= static_cast<unsigned>(order + i);
    result /= static_cast<unsigned>(i);  // exact: prefix products are binomials
    if (result > UINT64_MAX)
      throw std::overflow_error("total_degree_cardinality: count exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(result);
}

/// The total-degree multi-index set: all d-tuples of non-negative integers
/// with component sum at most k, in graded ordering (ascending total degree,
/// ties resolved with higher leading components first). The ordering is the
/// canonical one for every coefficient vector and matrix column in this
/// library. Immutable once built.
class MultiIndexSet {
 public:
  MultiIndexSet(int dim, int order) : dim_(dim), order_(order) {
    const std::uint64_t count = total_degree_cardinality(dim, order);
    flat_.reserve(count * static_cast<std::uint64_t>(dim));
    std::vector<int> current(static_cast<std::size_t>(dim), 0);
    emit(current);
    for (int degree = 1; degree <= order; ++degree) grow(current, 0, degree);
    if (size() != count)
      throw std::logic_error("MultiIndexSet: enumeration disagrees with cardinality");
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return flat_.size() / static_cast<std::size_t>(dim_); }

  /// Components of the j-th multi-index in canonical order.
  std::span<const int> operator[](std::size_t j) const {
    return {flat_.data() + j * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }

  /// One row per index, comma-separated components.
  void write_csv(std::ostream& out) const {
    for (std::size_t j = 0; j < size(); ++j) {
      const auto alpha = (*this)[j];
      for (int i = 0; i < dim_; ++i) out << (i ? "," : "") << alpha[static_cast<std::size_t>(i)];
      out << '\n';
    }
  }

 private:
  void emit(const std::vector<int>& alpha) {
    flat_.insert(flat_.end(), alpha.begin(), alpha.end());
  }

  // Assign `remaining` degree to components pos..dim-1, largest share to the
  // leading component first.
  void grow(std::vector<int>& alpha, int pos, int remaining) {
    if (pos == dim_ - 1) {
      alpha[static_cast<std::size_t>(pos)] = remaining;
      emit(alpha);
      alpha[static_cast<std::size_t>(pos)] = 0;
      return;
    }
    for (int take = remaining; take >= 0; --take) {
      alpha[static_cast<std::size_t>(pos)] = take;
      grow(alpha, pos + 1, remaining - take);
    }
    alpha[static_cast<std::size_t>(pos)] = 0;
  }

  int dim_;
  int order_;
  std::vector<int> flat_;
};

}  // namespace sparsepce
