#pragma once

// Truncated multivariate Taylor arithmetic ("jets") through order 3.
//
// A jet of order k in n variables stores the Taylor coefficients c_a of all
// monomials z^a with |a| <= k around the evaluation point. Derivatives are
// recovered as d^a F = a! c_a, so mixed partials are stored once and the
// Hessian/third-derivative tensors are symmetric by construction.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "specgeo/error.hpp"

namespace specgeo {

inline constexpr int kMaxJetOrder = 3;

/// Enumeration of monomials of degree <= order in n variables, with the
/// truncated multiplication table. Shared between all jets of the same shape.
class MonomialBasis {
 public:
  struct Product {
    int lhs, rhs, out;
  };

  MonomialBasis(int n, int order) : n_(n), order_(order) {
    stride_ = n + 1;
    lookup_.assign(static_cast<std::size_t>(stride_ * stride_ * stride_), -1);
    // Monomials as sorted index triples padded with n (= "absent").
    add({n, n, n});
    for (int d = 1; d <= order; ++d) enumerate(d, 0, {n, n, n}, 0);
    for (int a = 0; a < size(); ++a) {
      for (int b = 0; b < size(); ++b) {
        if (degree_[a] + degree_[b] > order) continue;
        std::array<int, 3> merged{n, n, n};
        int k = 0;
        for (int t = 0; t < degree_[a]; ++t) merged[k++] = terms_[a][t];
        for (int t = 0; t < degree_[b]; ++t) merged[k++] = terms_[b][t];
        std::sort(merged.begin(), merged.begin() + k);
        products_.push_back({a, b, index_of(merged)});
      }
    }
  }

  int vars() const { return n_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(terms_.size()); }
  int degree(int m) const { return degree_[m]; }
  const std::vector<Product>& products() const { return products_; }

  /// Index of the monomial z_i (degree 1), z_i z_j, z_i z_j z_k.
  int index(int i) const { return index_of({i, n_, n_}); }
  int index(int i, int j) const {
    std::array<int, 3> t{i, j, n_};
    std::sort(t.begin(), t.begin() + 2);
    return index_of(t);
  }
  int index(int i, int j, int k) const {
    std::array<int, 3> t{i, j, k};
    std::sort(t.begin(), t.end());
    return index_of(t);
  }

  /// a! for the multi-index of monomial m.
  double multi_factorial(int m) const { return factorial_[m]; }

  /// Process-wide cache; bases are immutable once built.
  static std::shared_ptr<const MonomialBasis> get(int n, int order) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>>
        cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{n, order}];
    if (!slot) slot = std::make_shared<const MonomialBasis>(n, order);
    return slot;
  }

 private:
  int index_of(const std::array<int, 3>& t) const {
    return lookup_[static_cast<std::size_t>((t[0] * stride_ + t[1]) * stride_ +
                                            t[2])];
  }

  void add(const std::array<int, 3>& t) {
    int d = 0;
    for (int v : t) d += (v < n_) ? 1 : 0;
    lookup_[static_cast<std::size_t>((t[0] * stride_ + t[1]) * stride_ +
                                     t[2])] = size();
    terms_.push_back(t);
    degree_.push_back(d);
    double f = 1.0;
    int run = 1;
    for (int k = 1; k < d; ++k) {
      if (t[k] == t[k - 1]) {
        ++run;
        f *= run;
      } else {
        run = 1;
      }
    }
    factorial_.push_back(f);
  }

  void enumerate(int degree, int start, std::array<int, 3> t, int filled) {
    if (filled == degree) {
      add(t);
      return;
    }
    for (int i = start; i < n_; ++i) {
      t[filled] = i;
      enumerate(degree, i, t, filled + 1);
    }
  }

  int n_, order_, stride_;
  std::vector<std::array<int, 3>> terms_;
  std::vector<int> degree_;
  std::vector<double> factorial_;
  std::vector<int> lookup_;
  std::vector<Product> products_;
};

/// Value plus derivatives through `order` of a function of n variables.
template <class Scalar = std::complex<double>>
class Jet {
 public:
  using scalar_type = Scalar;

  Jet(int n, int order)
      : basis_(MonomialBasis::get(n, order)),
        coeff_(static_cast<std::size_t>(basis_->size()), Scalar(0)) {}

  static Jet constant(int n, int order, Scalar c) {
    Jet j(n, order);
    j.coeff_[0] = c;
    return j;
  }

  /// The coordinate function z_k (0-based) evaluated at `value`.
  static Jet variable(int n, int order, int k, Scalar value) {
    Jet j(n, order);
    j.coeff_[0] = value;
    if (order >= 1) j.coeff_[static_cast<std::size_t>(j.basis_->index(k))] = 1;
    return j;
  }

  int vars() const { return basis_->vars(); }
  int order() const { return basis_->order(); }

  Scalar value() const { return coeff_[0]; }
  Scalar d(int i) const { return coeff_at(basis_->index(i), 1); }
  Scalar d(int i, int j) const { return coeff_at(basis_->index(i, j), 2); }
  Scalar d(int i, int j, int k) const {
    return coeff_at(basis_->index(i, j, k), 3);
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g(vars());
    for (int i = 0; i < vars(); ++i) g(i) = d(i);
    return g;
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> hess() const {
    const int n = vars();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> h(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h(i, j) = d(i, j);
    return h;
  }

  /// Raw Taylor coefficient of monomial m.
  const std::vector<Scalar>& coefficients() const { return coeff_; }

  Jet& operator+=(const Jet& o) {
    for (std::size_t m = 0; m < coeff_.size(); ++m) coeff_[m] += o.coeff_[m];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t m = 0; m < coeff_.size(); ++m) coeff_[m] -= o.coeff_[m];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) {
    for (auto& c : a.coeff_) c = -c;
    return a;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.vars(), a.order());
    for (const auto& p : a.basis_->products())
      r.coeff_[static_cast<std::size_t>(p.out)] +=
          a.coeff_[static_cast<std::size_t>(p.lhs)] *
          b.coeff_[static_cast<std::size_t>(p.rhs)];
    return r;
  }
  friend Jet operator*(Scalar s, Jet a) {
    for (auto& c : a.coeff_) c *= s;
    return a;
  }

  /// f(u) for a scalar function with derivatives f^(k)(u0), k = 0..order,
  /// via the truncated series sum_k f^(k)(u0)/k! (u - u0)^k.
  friend Jet compose(const Jet& u, const std::array<Scalar, 4>& derivs) {
    Jet delta = u;
    delta.coeff_[0] = Scalar(0);
    Jet result = constant(u.vars(), u.order(), derivs[0]);
    Jet power = constant(u.vars(), u.order(), Scalar(1));
    double factorial = 1.0;
    for (int k = 1; k <= u.order(); ++k) {
      power = power * delta;
      factorial *= k;
      result += (derivs[static_cast<std::size_t>(k)] / factorial) * power;
    }
    return result;
  }

 private:
  Scalar coeff_at(int m, int needed_order) const {
    if (order() < needed_order)
      throw std::out_of_range("jet order too low for requested derivative");
    return coeff_[static_cast<std::size_t>(m)] * basis_->multi_factorial(m);
  }

  std::shared_ptr<const MonomialBasis> basis_;
  std::vector<Scalar> coeff_;
};

using HoloJet = Jet<std::complex<double>>;

template <class Scalar>
Jet<Scalar> reciprocal(const Jet<Scalar>& u) {
  const Scalar u0 = u.value();
  if (u0 == Scalar(0))
    throw EvaluationError(ErrorCode::pole_hit, "PoleHit: division by zero");
  const Scalar r = Scalar(1) / u0;
  return compose(u, {r, -r * r, Scalar(2) * r * r * r,
                     Scalar(-6) * r * r * r * r});
}

template <class Scalar>
Jet<Scalar> operator/(const Jet<Scalar>& a, const Jet<Scalar>& b) {
  return a * reciprocal(b);
}

template <class Scalar>
Jet<Scalar> exp(const Jet<Scalar>& u) {
  using std::exp;
  const Scalar e = exp(u.value());
  return compose(u, {e, e, e, e});
}

/// Principal branch.
template <class Scalar>
Jet<Scalar> log(const Jet<Scalar>& u) {
  using std::log;
  const Scalar u0 = u.value();
  if (u0 == Scalar(0))
    throw EvaluationError(ErrorCode::branch_point, "BranchPoint: log(0)");
  const Scalar r = Scalar(1) / u0;
  return compose(u, {log(u0), r, -r * r, Scalar(2) * r * r * r});
}

/// Integer power. Non-negative exponents use repeated multiplication so that
/// polynomials stay exact even at u0 = 0.
template <class Scalar>
Jet<Scalar> pow(const Jet<Scalar>& u, int k) {
  if (k < 0) return pow(reciprocal(u), -k);
  Jet<Scalar> result = Jet<Scalar>::constant(u.vars(), u.order(), Scalar(1));
  Jet<Scalar> base = u;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

}  // namespace specgeo
