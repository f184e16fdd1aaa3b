#pragma once

// Catalog of proper, closed, convex functions with exact values, proximal
// operators, subgradient witnesses, analytic conjugates, and Bregman-type
// distances, plus resolvents of monotone linear maps. The catalog is a fixed
// set of closed-form shapes: the diagnostic machinery downstream checks
// identities at the 1e-10 level, which numerically-proxed user callables
// could not support.

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "xdrs/errors.hpp"
#include "xdrs/numerics.hpp"

namespace xdrs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Membership tolerance for indicator shapes: iterates only approach
// constraint sets to solver tolerance, so exact membership tests would
// spuriously report +inf.
inline double membership_tol(const Vector& x) { return 1e-9 * (1.0 + norm(x)); }

class ConvexFunction;

namespace shapes {

struct Zero {
  std::size_t dim = 0;  // 0 means any dimension
};

struct IndicatorPoint {
  Vector point;
};

// The affine set {x : A x = b}; A must have full row rank so that A A^T is
// invertible. The Cholesky factor of A A^T is cached at construction.
struct IndicatorAffine {
  Matrix a;
  Vector b;
  std::shared_ptr<const CholeskyFactor> aat_chol;
};

// value x -> 1/2 x^T P x + q^T x with P symmetric PSD.
struct Quadratic {
  Matrix p;
  Vector q;
};

struct L1 {
  double weight = 1.0;
  std::size_t dim = 0;  // 0 means any dimension
};

struct IndicatorBox {
  Vector lo, hi;
};

struct SeparableTerm;

struct SeparableSum {
  std::vector<SeparableTerm> terms;
  std::size_t dim = 0;
};

}  // namespace shapes

class ConvexFunction {
 public:
  using ShapeVariant =
      std::variant<shapes::Zero, shapes::IndicatorPoint, shapes::IndicatorAffine,
                   shapes::Quadratic, shapes::L1, shapes::IndicatorBox,
                   shapes::SeparableSum>;

  static ConvexFunction zero(std::size_t dim = 0) {
    return ConvexFunction(shapes::Zero{dim});
  }

  static ConvexFunction indicator_point(Vector point) {
    return ConvexFunction(shapes::IndicatorPoint{std::move(point)});
  }

  static ConvexFunction indicator_affine(Matrix a, Vector b) {
    if (a.rows() != b.size())
      throw DimMismatch("indicator_affine: A rows must match b");
    if (a.rows() > a.cols())
      throw std::invalid_argument("indicator_affine: more rows than columns");
    Matrix aat(a.rows(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.rows(); ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * a(j, k);
        aat(i, j) = s;
      }
    std::shared_ptr<const CholeskyFactor> chol;
    try {
      chol = std::make_shared<const CholeskyFactor>(aat);
    } catch (const NotSpd&) {
      throw std::invalid_argument("indicator_affine: A is not full row rank");
    }
    return ConvexFunction(
        shapes::IndicatorAffine{std::move(a), std::move(b), std::move(chol)});
  }

  static ConvexFunction quadratic(Matrix p, Vector q) {
    if (p.rows() != p.cols() || p.rows() != q.size())
      throw DimMismatch("quadratic: P must be square and match q");
    if (!p.is_symmetric())
      throw std::invalid_argument("quadratic: P must be symmetric");
    if (min_eigenvalue_sym(p) < -1e-10 * (1.0 + p.max_abs()))
      throw std::invalid_argument("quadratic: P must be PSD");
    return ConvexFunction(shapes::Quadratic{std::move(p), std::move(q)});
  }

  static ConvexFunction l1(double weight, std::size_t dim = 0) {
    if (!(weight > 0.0)) throw std::invalid_argument("l1: weight must be > 0");
    return ConvexFunction(shapes::L1{weight, dim});
  }

  static ConvexFunction indicator_box(Vector lo, Vector hi) {
    if (lo.size() != hi.size()) throw DimMismatch("indicator_box: lo/hi dims");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (lo[i] > hi[i])
        throw std::invalid_argument("indicator_box: lo > hi component");
    return ConvexFunction(shapes::IndicatorBox{std::move(lo), std::move(hi)});
  }

  static ConvexFunction separable_sum(
      std::vector<std::pair<ConvexFunction, std::size_t>> parts);

  // 0 means the shape accepts any dimension (Zero, L1 without pinned dim).
  std::size_t dim() const;

  double value(const Vector& x) const;
  Vector prox(double gamma, const Vector& v) const;
  double conjugate_value(const Vector& u) const;

  const ShapeVariant& shape() const { return shape_; }

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(shape_);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(shape_);
  }

 private:
  explicit ConvexFunction(ShapeVariant shape) : shape_(std::move(shape)) {}
  void check_dim(const Vector& x, const char* who) const {
    const std::size_t d = dim();
    if (d != 0 && x.size() != d) throw DimMismatch(who);
  }
  ShapeVariant shape_;
};

namespace shapes {
struct SeparableTerm {
  ConvexFunction f;
  std::size_t offset;
  std::size_t len;
};
}  // namespace shapes

inline ConvexFunction ConvexFunction::separable_sum(
    std::vector<std::pair<ConvexFunction, std::size_t>> parts) {
  shapes::SeparableSum s;
  std::size_t offset = 0;
  for (auto& [f, len] : parts) {
    if (len == 0) throw std::invalid_argument("separable_sum: empty block");
    const std::size_t fd = f.dim();
    if (fd != 0 && fd != len)
      throw DimMismatch("separable_sum: block length vs part dimension");
    s.terms.push_back(shapes::SeparableTerm{std::move(f), offset, len});
    offset += len;
  }
  s.dim = offset;
  return ConvexFunction(ShapeVariant(std::move(s)));
}

inline std::size_t ConvexFunction::dim() const {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, shapes::Zero>) return s.dim;
        if constexpr (std::is_same_v<T, shapes::IndicatorPoint>)
          return s.point.size();
        if constexpr (std::is_same_v<T, shapes::IndicatorAffine>)
          return s.a.cols();
        if constexpr (std::is_same_v<T, shapes::Quadratic>) return s.q.size();
        if constexpr (std::is_same_v<T, shapes::L1>) return s.dim;
        if constexpr (std::is_same_v<T, shapes::IndicatorBox>)
          return s.lo.size();
        if constexpr (std::is_same_v<T, shapes::SeparableSum>) return s.dim;
      },
      shape_);
}

inline double ConvexFunction::value(const Vector& x) const {
  check_dim(x, "value: dimension mismatch");
  const double tol = membership_tol(x);
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, shapes::Zero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, shapes::IndicatorPoint>) {
          return norm(x - s.point) <= tol ? 0.0 : kInf;
        } else if constexpr (std::is_same_v<T, shapes::IndicatorAffine>) {
          return norm(s.a.apply(x) - s.b) <= tol ? 0.0 : kInf;
        } else if constexpr (std::is_same_v<T, shapes::Quadratic>) {
          return 0.5 * dot(x, s.p.apply(x)) + dot(s.q, x);
        } else if constexpr (std::is_same_v<T, shapes::L1>) {
          double v = 0.0;
          for (double xi : x) v += std::abs(xi);
          return s.weight * v;
        } else if constexpr (std::is_same_v<T, shapes::IndicatorBox>) {
          for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < s.lo[i] - tol || x[i] > s.hi[i] + tol) return kInf;
          return 0.0;
        } else {
          double total = 0.0;
          for (const auto& term : s.terms) {
            Vector block(term.len);
            for (std::size_t i = 0; i < term.len; ++i)
              block[i] = x[term.offset + i];
            const double v = term.f.value(block);
            if (v == kInf) return kInf;
            total += v;
          }
          return total;
        }
      },
      shape_);
}

inline Vector ConvexFunction::prox(double gamma, const Vector& v) const {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox: gamma must be > 0");
  check_dim(v, "prox: dimension mismatch");
  return std::visit(
      [&](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, shapes::Zero>) {
          return v;
        } else if constexpr (std::is_same_v<T, shapes::IndicatorPoint>) {
          return s.point;
        } else if constexpr (std::is_same_v<T, shapes::IndicatorAffine>) {
          const Vector r = s.a.apply(v) - s.b;
          return v - s.a.apply_transpose(s.aat_chol->solve(r));
        } else if constexpr (std::is_same_v<T, shapes::Quadratic>) {
          Matrix m = s.p;
          m *= gamma;
          for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
          return solve_spd(m, v - gamma * s.q);
        } else if constexpr (std::is_same_v<T, shapes::L1>) {
          const double k = gamma * s.weight;
          Vector x(v.size());
          for (std::size_t i = 0; i < v.size(); ++i) {
            const double mag = std::abs(v[i]) - k;
            x[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
          }
          return x;
        } else if constexpr (std::is_same_v<T, shapes::IndicatorBox>) {
          Vector x(v.size());
          for (std::size_t i = 0; i < v.size(); ++i)
            x[i] = std::min(std::max(v[i], s.lo[i]), s.hi[i]);
          return x;
        } else {
          Vector x(v.size());
          for (const auto& term : s.terms) {
            Vector block(term.len);
            for (std::size_t i = 0; i < term.len; ++i)
              block[i] = v[term.offset + i];
            const Vector px = term.f.prox(gamma, block);
            for (std::size_t i = 0; i < term.len; ++i)
              x[term.offset + i] = px[i];
          }
          return x;
        }
      },
      shape_);
}

// Analytic conjugate table. Shapes without a closed-form conjugate
// (IndicatorAffine, SeparableSum over unsupported members) raise
// ConjugateUnavailable; gap diagnostics are restricted to this sub-catalog.
inline double ConvexFunction::conjugate_value(const Vector& u) const {
  check_dim(u, "conjugate_value: dimension mismatch");
  const double tol = membership_tol(u);
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, shapes::Zero>) {
          return norm(u) <= tol ? 0.0 : kInf;
        } else if constexpr (std::is_same_v<T, shapes::IndicatorPoint>) {
          return dot(s.point, u);
        } else if constexpr (std::is_same_v<T, shapes::Quadratic>) {
          try {
            const CholeskyFactor chol(s.p);
            const Vector d = u - s.q;
            return 0.5 * dot(d, chol.solve(d));
          } catch (const NotSpd&) {
            throw ConjugateUnavailable(
                "conjugate_value: quadratic needs positive definite P");
          }
        } else if constexpr (std::is_same_v<T, shapes::L1>) {
          for (double ui : u)
            if (std::abs(ui) > s.weight + tol) return kInf;
          return 0.0;
        } else if constexpr (std::is_same_v<T, shapes::IndicatorBox>) {
          double v = 0.0;
          for (std::size_t i = 0; i < u.size(); ++i)
            v += std::max(s.lo[i] * u[i], s.hi[i] * u[i]);
          return v;
        } else if constexpr (std::is_same_v<T, shapes::SeparableSum>) {
          double total = 0.0;
          for (const auto& term : s.terms) {
            Vector block(term.len);
            for (std::size_t i = 0; i < term.len; ++i)
              block[i] = u[term.offset + i];
            const double v = term.f.conjugate_value(block);
            if (v == kInf) return kInf;
            total += v;
          }
          return total;
        } else {
          throw ConjugateUnavailable(
              "conjugate_value: no analytic conjugate for this shape");
        }
      },
      shape_);
}

inline double eval(const ConvexFunction& f, const Vector& x) {
  return f.value(x);
}

inline Vector prox(const ConvexFunction& f, double gamma, const Vector& v) {
  return f.prox(gamma, v);
}

inline double conjugate_eval(const ConvexFunction& f, const Vector& u) {
  return f.conjugate_value(u);
}

struct SubgradientWitness {
  Vector x;  // prox point
  Vector u;  // subgradient of f at x
};

// x = prox_{gamma f}(v) and u = (v - x)/gamma in df(x).
inline SubgradientWitness subgrad_witness(const ConvexFunction& f, double gamma,
                                          const Vector& v) {
  Vector x = f.prox(gamma, v);
  Vector u = (1.0 / gamma) * (v - x);
  return {std::move(x), std::move(u)};
}

// Bregman-type distance D_f(x, y, u) = f(x) - f(y) - <u, x - y>;
// nonnegative whenever u is a subgradient of f at y.
inline double bregman(const ConvexFunction& f, const Vector& x, const Vector& y,
                      const Vector& u) {
  const double fx = f.value(x);
  const double fy = f.value(y);
  if (fx == kInf || fy == kInf)
    throw InfiniteValue("bregman: function value is +inf");
  return fx - fy - dot(u, x - y);
}

// Resolvent-capable operator: either the subdifferential of a catalog
// function or a monotone linear map (the A-in-curly-A cases).
class OperatorSpec {
 public:
  static OperatorSpec subdifferential(ConvexFunction f) {
    return OperatorSpec(Sub{std::move(f)});
  }

  static OperatorSpec monotone_linear(Matrix m) {
    if (m.rows() != m.cols())
      throw DimMismatch("monotone_linear: matrix not square");
    Matrix sym = m;
    const Matrix mt = m.transpose();
    sym += mt;
    sym *= 0.5;
    if (min_eigenvalue_sym(sym) < -1e-12)
      throw std::invalid_argument(
          "monotone_linear: symmetric part must be PSD");
    return OperatorSpec(Lin{std::move(m)});
  }

  bool is_subdifferential() const { return std::holds_alternative<Sub>(v_); }

  const ConvexFunction& function() const {
    if (!is_subdifferential())
      throw Error("OperatorSpec: not a subdifferential");
    return std::get<Sub>(v_).f;
  }

  const Matrix& linear() const {
    if (is_subdifferential()) throw Error("OperatorSpec: not a linear map");
    return std::get<Lin>(v_).m;
  }

  std::size_t dim() const {
    return is_subdifferential() ? function().dim() : linear().rows();
  }

  // J_{gamma A}(v): the prox for subdifferentials, a linear solve
  // (I + gamma M) x = v for monotone linear maps.
  Vector resolvent(double gamma, const Vector& v) const {
    if (!(gamma > 0.0))
      throw std::invalid_argument("resolvent: gamma must be > 0");
    if (is_subdifferential()) return function().prox(gamma, v);
    const Matrix& m = linear();
    if (m.rows() != v.size()) throw DimMismatch("resolvent: dimension");
    Matrix sys = m;
    sys *= gamma;
    for (std::size_t i = 0; i < sys.rows(); ++i) sys(i, i) += 1.0;
    return solve_lu(sys, v);  // nonsingular for monotone M, gamma > 0
  }

 private:
  struct Sub {
    ConvexFunction f;
  };
  struct Lin {
    Matrix m;
  };
  explicit OperatorSpec(std::variant<Sub, Lin> v) : v_(std::move(v)) {}
  std::variant<Sub, Lin> v_;
};

inline Vector resolvent(const OperatorSpec& op, double gamma, const Vector& v) {
  return op.resolvent(gamma, v);
}

// Fixed-step prox evaluator that factors the quadratic system (gamma P + I)
// once. Iterative drivers call the same prox thousands of times with one
// step size; refactorizing every call dominates their runtime otherwise.
class ProxCache {
 public:
  ProxCache(const ConvexFunction& f, double gamma) : f_(&f), gamma_(gamma) {
    if (!(gamma > 0.0))
      throw std::invalid_argument("ProxCache: gamma must be > 0");
    if (f.is<shapes::Quadratic>()) {
      const auto& q = f.as<shapes::Quadratic>();
      Matrix m = q.p;
      m *= gamma;
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
      chol_.emplace(m);
    } else if (f.is<shapes::SeparableSum>()) {
      for (const auto& term : f.as<shapes::SeparableSum>().terms)
        parts_.emplace_back(term.f, gamma);
    }
  }

  Vector apply(const Vector& v) const {
    if (chol_) {
      const auto& q = f_->as<shapes::Quadratic>();
      return chol_->solve(v - gamma_ * q.q);
    }
    if (!parts_.empty()) {
      const auto& terms = f_->as<shapes::SeparableSum>().terms;
      Vector x(v.size());
      for (std::size_t t = 0; t < terms.size(); ++t) {
        Vector block(terms[t].len);
        for (std::size_t i = 0; i < terms[t].len; ++i)
          block[i] = v[terms[t].offset + i];
        const Vector px = parts_[t].apply(block);
        for (std::size_t i = 0; i < terms[t].len; ++i)
          x[terms[t].offset + i] = px[i];
      }
      return x;
    }
    return f_->prox(gamma_, v);
  }

  double gamma() const { return gamma_; }

 private:
  const ConvexFunction* f_;
  double gamma_;
  std::optional<CholeskyFactor> chol_;
  std::vector<ProxCache> parts_;
};

// Fixed-step resolvent evaluator; factors (I + gamma M) once for monotone
// linear maps. Referenced operators must outlive the cache.
class ResolventCache {
 public:
  ResolventCache(const OperatorSpec& op, double gamma) {
    if (op.is_subdifferential()) {
      prox_.emplace(op.function(), gamma);
    } else {
      if (!(gamma > 0.0))
        throw std::invalid_argument("ResolventCache: gamma must be > 0");
      Matrix sys = op.linear();
      sys *= gamma;
      for (std::size_t i = 0; i < sys.rows(); ++i) sys(i, i) += 1.0;
      lu_.emplace(std::move(sys));
    }
  }

  Vector apply(const Vector& v) const {
    return prox_ ? prox_->apply(v) : lu_->solve(v);
  }

 private:
  std::optional<ProxCache> prox_;
  std::optional<LuFactor> lu_;
};

}  // namespace xdrs
