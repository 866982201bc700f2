#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pinode/errors.hpp"

namespace pinode::ad {

class Tape;

// Handle to one scalar recorded on a tape. Cheap to copy; valid until the
// owning tape is reset or destroyed.
class Var {
 public:
  Var() = default;
  double value() const;
  int index() const { return idx_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* t, int i) : tape_(t), idx_(i) {}
  Tape* tape_ = nullptr;
  int idx_ = -1;
};

enum class OpCode : std::uint8_t {
  leaf,
  add,       // a + b
  sub,       // a - b
  mul,       // a * b
  div,       // a / b
  neg,       // -a
  sin,
  cos,
  tanh,
  relu,      // max(a, 0); derivative at exactly 0 is 0
  square,    // a * a
  wrap,      // wrap into [0, 2pi) by IEEE remainder; derivative 1
  add_c,     // a + c
  mul_c,     // a * c
  div_c,     // a / c
  rsub_c,    // c - a
  rdiv_c,    // c / a
  pack,      // gather scattered scalars into a contiguous block
  affine,    // y[m] = W[m x n] * x[n] + b[m]
  relu_v,    // elementwise relu over a block
  tanh_v,    // elementwise tanh over a block
  scale_v,   // elementwise multiply a block by c
};

// Reverse-mode gradient tape over 64-bit scalars with block-level ops for
// dense layers. Recording is single-writer: one computation owns one tape.
// Replaying backward visits each node exactly once, after all its consumers
// (nodes are stored in recording order, which is already topological).
//
// Every recorded result is checked for finiteness; a non-finite value
// raises numeric_error naming the operation.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(double v);
  // Contiguous block of leaves; returns the index of the first slot.
  int leaf_block(std::span<const double> vs);

  Var view(int index) { return Var(this, index); }
  double value(int index) const { return val_[index]; }
  double adjoint(int index) const { return adj_[index]; }
  std::size_t size() const { return val_.size(); }

  // scalar ops (also exposed through Var operators below)
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var sin(Var a);
  Var cos(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var square(Var a);
  Var wrap_two_pi(Var a);
  Var add_const(Var a, double c);
  Var mul_const(Var a, double c);
  Var div_const(Var a, double c);
  Var rsub_const(double c, Var a);
  Var rdiv_const(double c, Var a);

  // block ops
  int pack(std::span<const Var> xs);
  int affine(int w_start, int b_start, int x_start, int m, int n);
  int relu_block(int start, int len);
  int tanh_block(int start, int len);
  int scale_block(int start, int len, double c);

  // Seeds d(loss)/d(loss) = 1 and accumulates adjoints for every node.
  void backward(Var loss);

  // Drops all nodes but keeps allocated capacity for reuse.
  void reset();

 private:
  struct Node {
    OpCode op;
    std::int32_t a = -1, b = -1;
    std::int32_t out = -1;
    std::int32_t n = 0, m = 0;  // block dims; affine uses both
    std::int32_t aux = -1;      // offset into aux_ (pack)
    double c = 0.0;             // immediate operand
  };

  int push_value(double v, OpCode op);
  Var unary(OpCode op, Var a, double result);
  Var binary(OpCode op, Var a, Var b, double result);
  Var with_const(OpCode op, Var a, double c, double result);
  void check_finite(double v, OpCode op) const;

  std::vector<double> val_;
  std::vector<double> adj_;
  std::vector<Node> nodes_;
  std::vector<std::int32_t> aux_;
};

inline double Var::value() const { return tape_->value(idx_); }

// free operators so generic scalar code instantiates with Var
inline Var operator+(Var a, Var b) { return a.tape()->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape()->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape()->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape()->div(a, b); }
inline Var operator-(Var a) { return a.tape()->neg(a); }
inline Var operator+(Var a, double c) { return a.tape()->add_const(a, c); }
inline Var operator+(double c, Var a) { return a.tape()->add_const(a, c); }
inline Var operator-(Var a, double c) { return a.tape()->add_const(a, -c); }
inline Var operator-(double c, Var a) { return a.tape()->rsub_const(c, a); }
inline Var operator*(Var a, double c) { return a.tape()->mul_const(a, c); }
inline Var operator*(double c, Var a) { return a.tape()->mul_const(a, c); }
inline Var operator/(Var a, double c) { return a.tape()->div_const(a, c); }
inline Var operator/(double c, Var a) { return a.tape()->rdiv_const(c, a); }

inline Var sin(Var a) { return a.tape()->sin(a); }
inline Var cos(Var a) { return a.tape()->cos(a); }
inline Var tanh(Var a) { return a.tape()->tanh(a); }
inline Var relu(Var a) { return a.tape()->relu(a); }
inline Var square(Var a) { return a.tape()->square(a); }
inline Var wrap_two_pi(Var a) { return a.tape()->wrap_two_pi(a); }

// plain-double counterparts so templated code works for both scalar types
inline double relu(double a) { return a > 0.0 ? a : 0.0; }
inline double square(double a) { return a * a; }
double wrap_two_pi(double a);

inline double value_of(double x) { return x; }
inline double value_of(Var x) { return x.value(); }

}  // namespace pinode::ad
