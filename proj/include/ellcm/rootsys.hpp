#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ellcm {

/// Exact half-integer, stored as twice its value.
class HalfInteger {
 public:
  constexpr HalfInteger() = default;
  static constexpr HalfInteger from_twice(int twice) {
    HalfInteger h;
    h.twice_ = twice;
    return h;
  }
  constexpr HalfInteger(int value) : twice_(2 * value) {}  // NOLINT: implicit from int

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInteger operator-() const { return from_twice(-twice_); }
  constexpr HalfInteger operator+(HalfInteger o) const { return from_twice(twice_ + o.twice_); }
  constexpr HalfInteger operator-(HalfInteger o) const { return from_twice(twice_ - o.twice_); }
  constexpr HalfInteger operator*(int k) const { return from_twice(twice_ * k); }
  constexpr auto operator<=>(const HalfInteger&) const = default;

  /// "1", "-1/2", "0", ...
  std::string str() const;
  static HalfInteger parse(const std::string& s);

 private:
  int twice_ = 0;
};

using Root = std::vector<HalfInteger>;

Root operator+(const Root& a, const Root& b);
Root operator-(const Root& a, const Root& b);
Root operator-(const Root& a);
Root scaled(const Root& a, int k);
/// 4 (a·b); always an integer.
int dot4(const Root& a, const Root& b);
/// a·b, exact for the lattices used here (throws otherwise).
int dot(const Root& a, const Root& b);
Eigen::VectorXd to_vector(const Root& a);
std::string to_string(const Root& a);

enum class Family { A, D, E6, E7, E8, BC };
enum class Orbit { Single, Long, Middle, Short };

std::string family_name(Family f);
std::optional<Family> parse_family(const std::string& s);
std::string orbit_name(Orbit o);

/// Finite root system with roots in lexicographic order.
class RootSystem {
 public:
  RootSystem(Family family, int rank, std::vector<Root> roots, std::vector<Root> simple);

  Family family() const { return family_; }
  int rank() const { return rank_; }
  /// Dimension of the ambient space the coordinates live in.
  int dimension() const { return dimension_; }
  bool simply_laced() const { return family_ != Family::BC; }

  const std::vector<Root>& roots() const { return roots_; }
  std::size_t size() const { return roots_.size(); }
  const Root& operator[](std::size_t i) const { return roots_[i]; }

  std::optional<std::size_t> index_of(const Root& r) const;
  bool contains(const Root& r) const { return index_of(r).has_value(); }

  Orbit orbit_of(const Root& r) const;
  std::vector<Root> orbit(Orbit o) const;

  /// Empty for BC, where no simple basis is needed.
  const std::vector<Root>& simple_roots() const { return simple_; }
  /// Integer coordinates of root i in the simple basis (simply laced only).
  const std::vector<int>& simple_coordinates(std::size_t i) const { return coords_.at(i); }
  int height(std::size_t i) const;

 private:
  Family family_;
  int rank_;
  int dimension_;
  std::vector<Root> roots_;
  std::vector<Root> simple_;
  std::vector<std::vector<int>> coords_;
};

/// s_α(β) = β - 2(α·β)/(α·α) α.
Root reflect(const Root& alpha, const Root& beta);

RootSystem build_root_system(Family family, int rank);

/// Index set plus dense complex matrix of matching size.
struct RootIndexedMatrix {
  std::vector<Root> index;
  Eigen::MatrixXcd entries;
};

/// E(kα)_{βγ} = δ_{kα, β-γ} over the given index.
RootIndexedMatrix e_matrix(const std::vector<Root>& index, const Root& alpha, int k);

/// diag(q·β) over the index.
Eigen::MatrixXcd q_matrix(const std::vector<Root>& index, const Eigen::VectorXcd& q);

/// N_{α,β} with [e_α, e_β] = N_{α,β} e_{α+β}, indexed like the root system.
class StructureConstants {
 public:
  explicit StructureConstants(const RootSystem& rs);

  int operator()(std::size_t a, std::size_t b) const { return table_[a * n_ + b]; }
  int n(const Root& a, const Root& b) const;
  /// The bilinear cocycle ε(α, β) on pairs of roots.
  int epsilon(std::size_t a, std::size_t b) const { return eps_[a * n_ + b]; }
  std::size_t size() const { return n_; }

  /// Antisymmetry, support and N_{-β,α+β} = N_{-α,-β} = N_{α+β,-α}; returns the
  /// number of violations.
  std::size_t count_violations() const;

  const RootSystem& root_system() const { return rs_; }

 private:
  RootSystem rs_;
  std::size_t n_;
  std::vector<std::int8_t> table_;
  std::vector<std::int8_t> eps_;
};

StructureConstants structure_constants(const RootSystem& rs);

}  // namespace ellcm
