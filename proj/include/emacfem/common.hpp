#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace emacfem {

using Index = std::int64_t;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : y; }
  constexpr double& operator[](int i) { return i == 0 ? x : y; }

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// 2x2 matrix stored row-major. For a velocity gradient, `(*this)(i, j)` is
/// d u_i / d x_j, so `G * a` is `(a . grad) u`.
struct Mat2 {
  std::array<double, 4> a{};

  constexpr double operator()(int i, int j) const { return a[2 * i + j]; }
  constexpr double& operator()(int i, int j) { return a[2 * i + j]; }

  constexpr double trace() const { return a[0] + a[3]; }
  constexpr Mat2 transpose() const { return Mat2{{a[0], a[2], a[1], a[3]}}; }
  constexpr Mat2& operator+=(const Mat2& o) {
    for (int k = 0; k < 4; ++k) a[k] += o.a[k];
    return *this;
  }
  friend constexpr Mat2 operator+(Mat2 l, const Mat2& r) { return l += r; }
  friend constexpr Mat2 operator*(double s, Mat2 m) {
    for (auto& v : m.a) v *= s;
    return m;
  }
  friend constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
    return {m(0, 0) * v.x + m(0, 1) * v.y, m(1, 0) * v.x + m(1, 1) * v.y};
  }
};

/// Frobenius inner product.
constexpr double contract(const Mat2& l, const Mat2& r) {
  return l.a[0] * r.a[0] + l.a[1] * r.a[1] + l.a[2] * r.a[2] + l.a[3] * r.a[3];
}

/// Rank-one matrix `c e_i (g)^T`: gradient of the vector basis function
/// `phi e_c` when `g = grad phi`.
constexpr Mat2 component_gradient(int c, const Vec2& g) {
  Mat2 m;
  m(c, 0) = g.x;
  m(c, 1) = g.y;
  return m;
}

constexpr Vec2 component_vector(int c, double v) { return c == 0 ? Vec2{v, 0.0} : Vec2{0.0, v}; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text, with the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Structurally valid input that breaks a mesh invariant.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, Index entity = -1) : Error(what), entity_(entity) {}
  Index entity() const { return entity_; }

 private:
  Index entity_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Singular or inaccurate linear solve.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace emacfem
