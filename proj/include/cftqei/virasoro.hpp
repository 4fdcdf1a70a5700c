#pragma once

// Level-truncated highest-weight Virasoro modules: PBW bases, Gram matrices,
// mode matrices in an orthonormal basis and smeared stress-energy matrices.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cftqei/circle.hpp"
#include "cftqei/errors.hpp"
#include "cftqei/tolerance.hpp"

namespace cftqei::virasoro {

using cplx = std::complex<double>;
/// n1 >= n2 >= ... > 0, labelling L_{-n1} L_{-n2} ... |h>.
using Partition = std::vector<int>;

struct HighestWeight {
  double c = 0.0;
  double h = 0.0;

  HighestWeight() = default;
  HighestWeight(double c_, double h_) : c(c_), h(h_) {
    if (!(c >= 0.0) || !(h >= 0.0)) throw InputError("highest weight: c and h must be nonnegative");
  }
};

inline int level(const Partition& p) {
  int s = 0;
  for (int n : p) s += n;
  return s;
}

namespace detail {

inline void partitions_into(int k, int max_part, Partition& cur, std::vector<Partition>& out) {
  if (k == 0) {
    out.push_back(cur);
    return;
  }
  for (int n = std::min(k, max_part); n >= 1; --n) {
    cur.push_back(n);
    partitions_into(k - n, n, cur, out);
    cur.pop_back();
  }
}

}  // namespace detail

/// Partitions of every k <= N: by level, then largest first part first.
inline std::vector<Partition> enumerate_basis(int N) {
  if (N < 0) throw InputError("enumerate_basis: N must be nonnegative");
  if (N > 20) throw InputError("enumerate_basis: truncation level above 20 is not supported");
  std::vector<Partition> out;
  Partition cur;
  for (int k = 0; k <= N; ++k) detail::partitions_into(k, k, cur, out);
  return out;
}

using SparseVec = std::map<Partition, double>;

/// L_m acting on PBW monomials, reduced back to PBW order by the Virasoro
/// relations. Results above level N are dropped.
class ModeAction {
 public:
  ModeAction(HighestWeight hw, int N) : hw_(hw), N_(N) {}

  const SparseVec& apply(int m, const Partition& p) {
    const auto key = std::make_pair(m, p);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    SparseVec out = compute(m, p);
    return memo_.emplace(key, std::move(out)).first->second;
  }

  SparseVec apply(int m, const SparseVec& v) {
    SparseVec out;
    for (const auto& [p, a] : v) {
      if (a == 0.0) continue;
      for (const auto& [q, b] : apply(m, p)) out[q] += a * b;
    }
    return out;
  }

 private:
  SparseVec compute(int m, const Partition& p) {
    const int lv = level(p);
    if (lv - m > N_) return {};
    if (m == 0) return {{p, hw_.h + lv}};
    if (p.empty()) {
      if (m > 0) return {};
      return {{Partition{-m}, 1.0}};
    }
    const int n1 = p.front();
    if (m < 0 && -m >= n1) {
      Partition q{-m};
      q.insert(q.end(), p.begin(), p.end());
      return {{q, 1.0}};
    }
    const Partition rest(p.begin() + 1, p.end());
    // L_m L_{-n1} = L_{-n1} L_m + (m + n1) L_{m - n1} + (c/12)(m^3 - m) delta_{m,n1}.
    SparseVec out = apply(-n1, SparseVec(apply(m, rest)));
    if (m + n1 != 0) {
      for (const auto& [q, b] : apply(m - n1, rest)) out[q] += (m + n1) * b;
    }
    if (m == n1) out[rest] += hw_.c / 12.0 * (static_cast<double>(m) * m * m - m);
    return out;
  }

  HighestWeight hw_;
  int N_;
  std::map<std::pair<int, Partition>, SparseVec> memo_;
};

/// Shapovalov form on the PBW basis up to level N:
/// <mu|nu> = sum_x [L_{mu1} nu]_x <mu'|x>, mu' = mu without its first part.
inline Eigen::MatrixXd gram_matrix(ModeAction& act, const std::vector<Partition>& basis) {
  std::map<Partition, std::size_t> index;
  for (std::size_t i = 0; i < basis.size(); ++i) index[basis[i]] = i;
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  G(0, 0) = 1.0;
  for (std::size_t j = 1; j < basis.size(); ++j)
    for (std::size_t i = 1; i < basis.size(); ++i) {
      if (level(basis[i]) != level(basis[j])) continue;
      const Partition rest(basis[i].begin() + 1, basis[i].end());
      const auto ri = static_cast<Eigen::Index>(index.at(rest));
      double s = 0.0;
      for (const auto& [x, a] : act.apply(basis[i].front(), basis[j]))
        s += a * G(ri, static_cast<Eigen::Index>(index.at(x)));
      G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
    }
  return G;
}

inline Eigen::MatrixXd gram_matrix(HighestWeight hw, int N) {
  ModeAction act(hw, N);
  return gram_matrix(act, enumerate_basis(N));
}

/// Truncated Verma module with its orthonormal (null-quotiented) basis and
/// all mode matrices |n| <= N. Immutable after construction.
class VermaModule {
 public:
  VermaModule(HighestWeight hw, int N, double null_threshold = kDefaultTolerances.null_threshold)
      : hw_(hw), N_(N), basis_(enumerate_basis(N)) {
    for (std::size_t i = 0; i < basis_.size(); ++i) index_[basis_[i]] = i;
    ModeAction act(hw, N);
    build_gram(act);
    orthonormalize(null_threshold);
    build_modes(act);
  }

  [[nodiscard]] const HighestWeight& hw() const { return hw_; }
  [[nodiscard]] int N() const { return N_; }
  [[nodiscard]] const std::vector<Partition>& basis() const { return basis_; }
  [[nodiscard]] const Eigen::MatrixXd& gram() const { return gram_; }
  /// Columns are orthonormal vectors in PBW coordinates: B^T G B = I.
  [[nodiscard]] const Eigen::MatrixXd& ortho_map() const { return B_; }
  /// Level of each orthonormal basis vector.
  [[nodiscard]] const std::vector<int>& ortho_levels() const { return ortho_level_; }
  [[nodiscard]] std::size_t dim() const { return ortho_level_.size(); }
  /// Number of quotiented (null) directions at level k.
  [[nodiscard]] int nulls_at(int k) const { return nulls_.at(static_cast<std::size_t>(k)); }
  [[nodiscard]] const std::vector<double>& level_eigenvalues(int k) const {
    return eig_.at(static_cast<std::size_t>(k));
  }

  /// L_n in the orthonormal basis.
  [[nodiscard]] const Eigen::MatrixXd& mode(int n) const {
    if (std::abs(n) > N_) throw InputError("mode_matrix: |n| exceeds the truncation level");
    return modes_[static_cast<std::size_t>(n + N_)];
  }

  /// PBW-coordinate vector of a partition (unnormalised).
  [[nodiscard]] Eigen::VectorXd pbw(const Partition& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) throw InputError("verma module: partition outside the truncation");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_.size()));
    e(static_cast<Eigen::Index>(it->second)) = 1.0;
    return e;
  }

  /// Orthonormal coordinates of L_{-p}|h> / ||L_{-p}|h>||.
  [[nodiscard]] Eigen::VectorXd state(const Partition& p) const {
    Eigen::VectorXd x = B_.transpose() * (gram_ * pbw(p));
    const double nrm = x.norm();
    if (!(nrm > 0.0)) throw InputError("verma module: null state");
    return x / nrm;
  }

  /// Orthonormal basis indices with level <= cap.
  [[nodiscard]] std::vector<Eigen::Index> safe_block(int cap) const {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < ortho_level_.size(); ++i)
      if (ortho_level_[i] <= cap) idx.push_back(static_cast<Eigen::Index>(i));
    return idx;
  }

 private:
  void build_gram(ModeAction& act) {
    gram_ = gram_matrix(act, basis_);
    gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
  }

  void orthonormalize(double null_threshold) {
    std::vector<Eigen::VectorXd> cols;
    eig_.assign(static_cast<std::size_t>(N_ + 1), {});
    nulls_.assign(static_cast<std::size_t>(N_ + 1), 0);
    for (int k = 0; k <= N_; ++k) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < basis_.size(); ++i)
        if (level(basis_[i]) == k) idx.push_back(i);
      const auto m = static_cast<Eigen::Index>(idx.size());
      Eigen::MatrixXd blk(m, m);
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
          blk(a, b) = gram_(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]),
                            static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)]));
      // Monomial norms span many decades; scale to unit diagonal first. The
      // eigensolve runs in long double since near-degenerate weights leave
      // small but genuine eigenvalues.
      using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
      std::vector<long double> sc(static_cast<std::size_t>(m));
      for (Eigen::Index a = 0; a < m; ++a) {
        if (blk(a, a) < 0.0) throw InputError("non-unitary highest weight");
        sc[static_cast<std::size_t>(a)] = blk(a, a) > 0.0 ? 1.0L / std::sqrt(static_cast<long double>(blk(a, a))) : 0.0L;
      }
      MatL scaled(m, m);
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
          scaled(a, b) = sc[static_cast<std::size_t>(a)] * static_cast<long double>(blk(a, b)) * sc[static_cast<std::size_t>(b)];
      Eigen::SelfAdjointEigenSolver<MatL> es(scaled);
      const auto& lam = es.eigenvalues();
      const long double scale = lam.cwiseAbs().maxCoeff();
      const long double thr = null_threshold * scale;
      for (Eigen::Index a = 0; a < m; ++a) {
        eig_[static_cast<std::size_t>(k)].push_back(static_cast<double>(lam(a)));
        if (lam(a) < -thr) throw InputError("non-unitary highest weight");
        if (!(lam(a) > thr) || scale == 0.0L) {
          ++nulls_[static_cast<std::size_t>(k)];
          continue;
        }
        Eigen::VectorXd col = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_.size()));
        for (Eigen::Index b = 0; b < m; ++b)
          col(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)])) =
              static_cast<double>(sc[static_cast<std::size_t>(b)] * es.eigenvectors()(b, a) / std::sqrt(lam(a)));
        cols.push_back(std::move(col));
        ortho_level_.push_back(k);
      }
    }
    B_.resize(static_cast<Eigen::Index>(basis_.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) B_.col(static_cast<Eigen::Index>(j)) = cols[j];
  }

  void build_modes(ModeAction& act) {
    const auto n = static_cast<Eigen::Index>(basis_.size());
    const Eigen::MatrixXd GB = gram_ * B_;
    for (int m = -N_; m <= N_; ++m) {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t j = 0; j < basis_.size(); ++j)
        for (const auto& [x, a] : act.apply(m, basis_[j]))
          A(static_cast<Eigen::Index>(index_.at(x)), static_cast<Eigen::Index>(j)) += a;
      modes_.push_back(GB.transpose() * A * B_);
    }
  }

  HighestWeight hw_;
  int N_;
  std::vector<Partition> basis_;
  std::map<Partition, std::size_t> index_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd B_;
  std::vector<int> ortho_level_;
  std::vector<int> nulls_;
  std::vector<std::vector<double>> eig_;
  std::vector<Eigen::MatrixXd> modes_;
};

struct GramScan {
  // Smallest eigenvalue of each level block after scaling to unit |diagonal|.
  std::vector<double> min_eig_per_level;
  bool unitary = true;
};

/// Unitarity scan without building the module; never throws on negative norms.
inline GramScan gram_scan(HighestWeight hw, int N, double null_threshold = kDefaultTolerances.null_threshold) {
  const auto basis = enumerate_basis(N);
  Eigen::MatrixXd g = gram_matrix(hw, N);
  g = 0.5 * (g + g.transpose()).eval();
  GramScan out;
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  for (int k = 0; k <= N; ++k) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (level(basis[i]) == k) idx.push_back(static_cast<Eigen::Index>(i));
    const auto m = static_cast<Eigen::Index>(idx.size());
    std::vector<long double> sc(idx.size());
    for (Eigen::Index a = 0; a < m; ++a) {
      const double d = std::abs(g(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(a)]));
      sc[static_cast<std::size_t>(a)] = d > 0.0 ? 1.0L / std::sqrt(static_cast<long double>(d)) : 0.0L;
    }
    MatL blk(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b)
        blk(a, b) = sc[static_cast<std::size_t>(a)] *
                    static_cast<long double>(g(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)])) *
                    sc[static_cast<std::size_t>(b)];
    Eigen::SelfAdjointEigenSolver<MatL> es(blk, Eigen::EigenvaluesOnly);
    const auto& lam = es.eigenvalues();
    const long double scale = lam.cwiseAbs().maxCoeff();
    out.min_eig_per_level.push_back(static_cast<double>(lam.minCoeff()));
    if (lam.minCoeff() < -null_threshold * scale) out.unitary = false;
  }
  return out;
}

struct ModeMatrix {
  int n = 0;
  Eigen::MatrixXd matrix;
  int domain_level_cap = 0;
};

inline ModeMatrix mode_matrix(const VermaModule& vm, int n) {
  return {n, vm.mode(n), vm.N() - std::abs(n)};
}

/// max |[L_m, L_n] - (m - n) L_{m+n} - (c/12) m (m^2 - 1) delta_{m+n,0}| over
/// columns of level <= N - |m| - |n|.
inline double commutator_check(const VermaModule& vm, int m, int n) {
  const int cap = vm.N() - std::abs(m) - std::abs(n);
  if (cap < 0) throw InputError("commutator_check: |m| + |n| exceeds the truncation level");
  const auto& Lm = vm.mode(m);
  const auto& Ln = vm.mode(n);
  Eigen::MatrixXd R = Lm * Ln - Ln * Lm - (m - n) * vm.mode(m + n);
  if (m + n == 0) R -= vm.hw().c / 12.0 * (static_cast<double>(m) * m * m - m) * Eigen::MatrixXd::Identity(R.rows(), R.cols());
  double worst = 0.0;
  for (auto j : vm.safe_block(cap)) worst = std::max(worst, R.col(j).cwiseAbs().maxCoeff());
  return worst;
}

/// Theta(f) = -(1/2 pi) sum_n (contour integral f(z) z^{-n-2} dz) L_n
///          = -i sum_n f_{n+1} L_n, modes beyond the truncation dropped.
inline Eigen::MatrixXcd theta_matrix(const VermaModule& vm, const circle::CircleFunction& f) {
  const auto coef = f.coefficients();
  const long size = static_cast<long>(coef.size());
  const auto d = static_cast<Eigen::Index>(vm.dim());
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(d, d);
  for (int n = -vm.N(); n <= vm.N(); ++n) {
    const long k = n + 1;
    if (std::abs(k) >= size / 2) continue;
    const cplx fk = coef[static_cast<std::size_t>((k % size + size) % size)];
    if (fk == 0.0) continue;
    T += cplx(0.0, -1.0) * fk * vm.mode(n).cast<cplx>();
  }
  return T;
}

/// Largest mode |n| with a coefficient above `cut` relative to the largest.
inline int mode_depth(const circle::CircleFunction& f, double cut = 1e-13) {
  const auto coef = f.coefficients();
  const auto n = static_cast<long>(coef.size());
  double big = 0.0;
  for (const auto& c : coef) big = std::max(big, std::abs(c));
  int depth = 0;
  for (long s = 0; s < n; ++s) {
    const long k = fourier::wavenumber(static_cast<std::size_t>(s), static_cast<std::size_t>(n));
    if (std::abs(coef[static_cast<std::size_t>(s)]) > cut * big) depth = std::max(depth, static_cast<int>(std::abs(k - 1)));
  }
  return depth;
}

/// max |i[Theta(g), Theta(f)] - Theta(g'f - f'g) - c omega(g, f)| on columns of
/// level <= N - depth(f) - depth(g).
inline double smeared_commutator_check(const VermaModule& vm, const circle::CircleFunction& g,
                                       const circle::CircleFunction& f) {
  const int cap = vm.N() - mode_depth(f) - mode_depth(g);
  if (cap < 0) throw InputError("smeared_commutator_check: test functions too oscillatory for the truncation");
  const auto dg = g.z_derivative(1);
  const auto df = f.z_derivative(1);
  std::vector<cplx> w(f.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = dg[j] * f.samples()[j] - df[j] * g.samples()[j];
  const auto Tg = theta_matrix(vm, g);
  const auto Tf = theta_matrix(vm, f);
  const cplx omega = circle::virasoro_cocycle_complex(g, f);
  Eigen::MatrixXcd R = cplx(0.0, 1.0) * (Tg * Tf - Tf * Tg) - theta_matrix(vm, circle::CircleFunction(std::move(w)));
  R -= vm.hw().c * omega * Eigen::MatrixXcd::Identity(R.rows(), R.cols());
  double worst = 0.0;
  for (auto j : vm.safe_block(cap)) worst = std::max(worst, R.col(j).cwiseAbs().maxCoeff());
  return worst;
}

struct MobiusGenerators {
  Eigen::MatrixXcd H;
  Eigen::MatrixXcd P;
  Eigen::MatrixXcd K;
};

/// H = Theta(iz), P = Theta((i/2)(1+z)^2), K = Theta(-(i/2)(1-z)^2).
inline MobiusGenerators mobius_generators(const VermaModule& vm, std::size_t samples = 64) {
  if (vm.N() < 2) throw InputError("mobius_generators: need N >= 2");
  const cplx i(0.0, 1.0);
  using circle::CircleFunction;
  return {theta_matrix(vm, CircleFunction::from([i](cplx z) { return i * z; }, samples)),
          theta_matrix(vm, CircleFunction::from([i](cplx z) { return 0.5 * i * (1.0 + z) * (1.0 + z); }, samples)),
          theta_matrix(vm, CircleFunction::from([i](cplx z) { return -0.5 * i * (1.0 - z) * (1.0 - z); }, samples))};
}

/// exp(i angle L0), diagonal in the orthonormal basis.
inline Eigen::MatrixXcd rotation(const VermaModule& vm, double angle) {
  const auto d = static_cast<Eigen::Index>(vm.dim());
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    R(j, j) = std::polar(1.0, angle * (vm.hw().h + vm.ortho_levels()[static_cast<std::size_t>(j)]));
  return R;
}

struct GWRow {
  int n = 0;
  double sup_ratio = 0.0;
};

/// sup over orthonormal basis vectors psi of level <= N - |n| of
/// ||L_n psi|| / ((1 + |n|)^{3/2} ||L0 psi||), with L0 -> L0 + 1 when h = 0.
inline std::vector<GWRow> gw_constant_survey(const VermaModule& vm, int max_n = -1) {
  if (max_n < 0) max_n = vm.N() / 2;
  if (max_n > vm.N()) throw InputError("gw_constant_survey: max_n exceeds the truncation level");
  const double shift = vm.hw().h == 0.0 ? 1.0 : 0.0;
  std::vector<GWRow> rows;
  for (int n = -max_n; n <= max_n; ++n) {
    const auto& L = vm.mode(n);
    const double weight = std::pow(1.0 + std::abs(n), 1.5);
    double sup = 0.0;
    for (auto j : vm.safe_block(vm.N() - std::abs(n))) {
      const double l0 = vm.hw().h + vm.ortho_levels()[static_cast<std::size_t>(j)] + shift;
      sup = std::max(sup, L.col(j).norm() / (weight * l0));
    }
    rows.push_back({n, sup});
  }
  return rows;
}

/// <psi|Theta(f)|psi> in the vacuum module; psi defaults to the vacuum.
inline cplx vacuum_expectation_profile(const VermaModule& vm, const circle::CircleFunction& f,
                                       const Eigen::VectorXcd& psi = {}) {
  if (vm.hw().h != 0.0) throw InputError("no vacuum in this module");
  Eigen::VectorXcd v = psi;
  if (v.size() == 0) {
    v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(vm.dim()));
    v(0) = 1.0;
  }
  if (v.size() != static_cast<Eigen::Index>(vm.dim())) throw InputError("vacuum_expectation_profile: state size mismatch");
  return v.dot(theta_matrix(vm, f) * v);
}

}  // namespace cftqei::virasoro
