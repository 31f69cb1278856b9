#include "ellcm/rootsys.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace ellcm {

std::string HalfInteger::str() const {
  if (twice_ % 2 == 0) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

HalfInteger HalfInteger::parse(const std::string& s) {
  const auto slash = s.find('/');
  std::size_t used = 0;
  if (slash == std::string::npos) {
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad half-integer: " + s);
    return HalfInteger(v);
  }
  if (s.substr(slash) != "/2") throw std::invalid_argument("bad half-integer: " + s);
  const int t = std::stoi(s.substr(0, slash), &used);
  if (used != slash) throw std::invalid_argument("bad half-integer: " + s);
  return from_twice(t);
}

namespace {

void check_same_size(const Root& a, const Root& b) {
  if (a.size() != b.size()) throw std::invalid_argument("root dimension mismatch");
}

Root unit(int dim, int j, int k = 1) {
  Root r(dim, HalfInteger(0));
  r[j] = HalfInteger(k);
  return r;
}

Root from_twice(std::initializer_list<int> twice) {
  Root r;
  for (int t : twice) r.push_back(HalfInteger::from_twice(t));
  return r;
}

std::vector<Root> reflection_closure(const std::vector<Root>& simple) {
  std::set<Root> found(simple.begin(), simple.end());
  std::vector<Root> frontier(simple.begin(), simple.end());
  while (!frontier.empty()) {
    std::vector<Root> next;
    for (const auto& beta : frontier)
      for (const auto& alpha : simple) {
        Root r = reflect(alpha, beta);
        if (found.insert(r).second) next.push_back(std::move(r));
      }
    frontier = std::move(next);
  }
  return {found.begin(), found.end()};
}

// Bourbaki labelling: α1 = ½(1,-1,...,-1,1), α2 = e1+e2, α3 = e2-e1, ..., α8 = e7-e6.
std::vector<Root> e8_simple(int rank) {
  std::vector<Root> s;
  s.push_back(from_twice({1, -1, -1, -1, -1, -1, -1, 1}));
  s.push_back(unit(8, 0) + unit(8, 1));
  for (int k = 1; k <= 6; ++k) s.push_back(unit(8, k) - unit(8, k - 1));
  s.resize(rank);
  return s;
}

}  // namespace

Root operator+(const Root& a, const Root& b) {
  check_same_size(a, b);
  Root r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Root operator-(const Root& a, const Root& b) {
  check_same_size(a, b);
  Root r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Root operator-(const Root& a) {
  Root r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}

Root scaled(const Root& a, int k) {
  Root r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * k;
  return r;
}

int dot4(const Root& a, const Root& b) {
  check_same_size(a, b);
  int s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].twice() * b[i].twice();
  return s;
}

int dot(const Root& a, const Root& b) {
  const int d = dot4(a, b);
  if (d % 4 != 0) throw std::domain_error("inner product is not an integer");
  return d / 4;
}

Eigen::VectorXd to_vector(const Root& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].value();
  return v;
}

std::string to_string(const Root& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + a[i].str();
  return s + ")";
}

std::string family_name(Family f) {
  switch (f) {
    case Family::A: return "A";
    case Family::D: return "D";
    case Family::E6: return "E6";
    case Family::E7: return "E7";
    case Family::E8: return "E8";
    case Family::BC: return "BC";
  }
  return "?";
}

std::optional<Family> parse_family(const std::string& s) {
  for (auto f : {Family::A, Family::D, Family::E6, Family::E7, Family::E8, Family::BC})
    if (family_name(f) == s) return f;
  return std::nullopt;
}

std::string orbit_name(Orbit o) {
  switch (o) {
    case Orbit::Single: return "single";
    case Orbit::Long: return "long";
    case Orbit::Middle: return "middle";
    case Orbit::Short: return "short";
  }
  return "?";
}

Root reflect(const Root& alpha, const Root& beta) {
  const int num = 2 * dot4(alpha, beta);
  const int den = dot4(alpha, alpha);
  if (den == 0) throw std::invalid_argument("reflection in a zero vector");
  if (num % den != 0) throw std::domain_error("Cartan integer is not integral");
  return beta - scaled(alpha, num / den);
}

RootSystem::RootSystem(Family family, int rank, std::vector<Root> roots, std::vector<Root> simple)
    : family_(family), rank_(rank), roots_(std::move(roots)), simple_(std::move(simple)) {
  if (roots_.empty()) throw std::invalid_argument("empty root system");
  std::sort(roots_.begin(), roots_.end());
  dimension_ = static_cast<int>(roots_.front().size());
  if (simple_.empty()) return;

  // coordinates in the simple basis: least squares, then exact verification
  const int r = static_cast<int>(simple_.size());
  Eigen::MatrixXd S(dimension_, r);
  for (int j = 0; j < r; ++j) S.col(j) = to_vector(simple_[j]);
  const Eigen::MatrixXd pinv = (S.transpose() * S).inverse() * S.transpose();
  coords_.reserve(roots_.size());
  for (const auto& root : roots_) {
    const Eigen::VectorXd c = pinv * to_vector(root);
    std::vector<int> ci(r);
    Root back(dimension_, HalfInteger(0));
    for (int j = 0; j < r; ++j) {
      ci[j] = static_cast<int>(std::lround(c[j]));
      back = back + scaled(simple_[j], ci[j]);
    }
    if (back != root) throw std::logic_error("root outside the simple-root lattice");
    coords_.push_back(std::move(ci));
  }
}

std::optional<std::size_t> RootSystem::index_of(const Root& r) const {
  const auto it = std::lower_bound(roots_.begin(), roots_.end(), r);
  if (it == roots_.end() || *it != r) return std::nullopt;
  return static_cast<std::size_t>(it - roots_.begin());
}

Orbit RootSystem::orbit_of(const Root& r) const {
  if (simply_laced()) return Orbit::Single;
  switch (dot4(r, r)) {
    case 16: return Orbit::Long;
    case 8: return Orbit::Middle;
    case 4: return Orbit::Short;
  }
  throw std::invalid_argument("vector is not a BC root: " + to_string(r));
}

std::vector<Root> RootSystem::orbit(Orbit o) const {
  std::vector<Root> out;
  for (const auto& r : roots_)
    if (orbit_of(r) == o) out.push_back(r);
  return out;
}

int RootSystem::height(std::size_t i) const {
  int h = 0;
  for (int c : coords_.at(i)) h += c;
  return h;
}

RootSystem build_root_system(Family family, int rank) {
  auto bad = [&] {
    return std::invalid_argument("unsupported root system " + family_name(family) +
                                 std::to_string(rank));
  };
  switch (family) {
    case Family::A: {
      if (rank < 1) throw bad();
      const int n = rank + 1;
      std::vector<Root> roots, simple;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          if (j != k) roots.push_back(unit(n, j) - unit(n, k));
      for (int j = 0; j + 1 < n; ++j) simple.push_back(unit(n, j) - unit(n, j + 1));
      return RootSystem(family, rank, roots, simple);
    }
    case Family::D: {
      if (rank < 3) throw bad();
      std::vector<Root> simple;
      for (int j = 0; j + 1 < rank; ++j) simple.push_back(unit(rank, j) - unit(rank, j + 1));
      simple.push_back(unit(rank, rank - 2) + unit(rank, rank - 1));
      return RootSystem(family, rank, reflection_closure(simple), simple);
    }
    case Family::E6:
    case Family::E7:
    case Family::E8: {
      const int expect = family == Family::E6 ? 6 : family == Family::E7 ? 7 : 8;
      if (rank != expect) throw bad();
      const auto simple = e8_simple(rank);
      return RootSystem(family, rank, reflection_closure(simple), simple);
    }
    case Family::BC: {
      if (rank < 1) throw bad();
      std::vector<Root> roots;
      for (int j = 0; j < rank; ++j)
        for (int s : {1, -1}) {
          roots.push_back(unit(rank, j, 2 * s));
          roots.push_back(unit(rank, j, s));
          for (int k = j + 1; k < rank; ++k)
            for (int t : {1, -1}) roots.push_back(unit(rank, j, s) + unit(rank, k, t));
        }
      return RootSystem(family, rank, roots, {});
    }
  }
  throw bad();
}

RootIndexedMatrix e_matrix(const std::vector<Root>& index, const Root& alpha, int k) {
  const Root target = scaled(alpha, k);
  const auto n = static_cast<Eigen::Index>(index.size());
  RootIndexedMatrix m{index, Eigen::MatrixXcd::Zero(n, n)};
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index c = 0; c < n; ++c)
      if (index[b] - index[c] == target) m.entries(b, c) = 1.0;
  return m;
}

Eigen::MatrixXcd q_matrix(const std::vector<Root>& index, const Eigen::VectorXcd& q) {
  Eigen::VectorXcd d(index.size());
  for (std::size_t b = 0; b < index.size(); ++b) {
    if (static_cast<Eigen::Index>(index[b].size()) != q.size())
      throw std::invalid_argument("q has the wrong dimension");
    d[b] = to_vector(index[b]).cast<std::complex<double>>().dot(q);
  }
  return d.asDiagonal();
}

StructureConstants::StructureConstants(const RootSystem& rs) : rs_(rs), n_(rs.size()) {
  if (!rs.simply_laced()) throw std::invalid_argument("structure constants need a simply-laced system");
  const auto& simple = rs.simple_roots();
  const std::size_t r = simple.size();
  // ε on simple roots: -1 on the diagonal, (-1)^{αi·αj} above, 1 below
  std::vector<int> odd(r * r, 0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      if (i == j) odd[i * r + j] = 1;
      else if (i < j) odd[i * r + j] = dot(simple[i], simple[j]) & 1;
    }
  table_.assign(n_ * n_, 0);
  eps_.assign(n_ * n_, 0);
  for (std::size_t a = 0; a < n_; ++a) {
    const auto& ca = rs.simple_coordinates(a);
    for (std::size_t b = 0; b < n_; ++b) {
      const auto& cb = rs.simple_coordinates(b);
      long parity = 0;
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
          if (odd[i * r + j]) parity += static_cast<long>(ca[i]) * cb[j];
      const int e = (parity % 2 == 0) ? 1 : -1;
      eps_[a * n_ + b] = static_cast<std::int8_t>(e);
      if (rs.contains(rs[a] + rs[b])) table_[a * n_ + b] = static_cast<std::int8_t>(e);
    }
  }
  if (const auto bad = count_violations())
    throw std::logic_error("structure constants violate " + std::to_string(bad) + " invariants");
}

int StructureConstants::n(const Root& a, const Root& b) const {
  const auto ia = rs_.index_of(a), ib = rs_.index_of(b);
  if (!ia || !ib) throw std::invalid_argument("not a root");
  return (*this)(*ia, *ib);
}

std::size_t StructureConstants::count_violations() const {
  std::size_t bad = 0;
  for (std::size_t a = 0; a < n_; ++a) {
    // ε(α, α) = (-1)^{α·α/2}
    if (epsilon(a, a) != -1) ++bad;
    for (std::size_t b = 0; b < n_; ++b) {
      const int nab = (*this)(a, b);
      if (nab != -(*this)(b, a)) ++bad;
      const auto sum = rs_.index_of(rs_[a] + rs_[b]);
      if ((nab != 0) != sum.has_value()) ++bad;
      if (!sum) continue;
      const std::size_t ma = *rs_.index_of(-rs_[a]);
      const std::size_t mb = *rs_.index_of(-rs_[b]);
      const int n1 = (*this)(mb, *sum);
      const int n2 = (*this)(ma, mb);
      const int n3 = (*this)(*sum, ma);
      if (n1 != n2 || n2 != n3) ++bad;
    }
  }
  return bad;
}

StructureConstants structure_constants(const RootSystem& rs) { return StructureConstants(rs); }

}  // namespace ellcm
