#include "pinode/ad.hpp"

#include <cmath>
#include <numbers>

namespace pinode::ad {

namespace {

const char* op_name(OpCode op) {
  switch (op) {
    case OpCode::leaf: return "leaf";
    case OpCode::add: return "add";
    case OpCode::sub: return "sub";
    case OpCode::mul: return "mul";
    case OpCode::div: return "div";
    case OpCode::neg: return "neg";
    case OpCode::sin: return "sin";
    case OpCode::cos: return "cos";
    case OpCode::tanh: return "tanh";
    case OpCode::relu: return "relu";
    case OpCode::square: return "square";
    case OpCode::wrap: return "wrap";
    case OpCode::add_c: return "add_const";
    case OpCode::mul_c: return "mul_const";
    case OpCode::div_c: return "div_const";
    case OpCode::rsub_c: return "rsub_const";
    case OpCode::rdiv_c: return "rdiv_const";
    case OpCode::pack: return "pack";
    case OpCode::affine: return "affine";
    case OpCode::relu_v: return "relu_block";
    case OpCode::tanh_v: return "tanh_block";
    case OpCode::scale_v: return "scale_block";
  }
  return "?";
}

constexpr double k_two_pi = 2.0 * std::numbers::pi;

}  // namespace

// Canonical wrap into [0, 2pi). IEEE remainder is exact, so two angles that
// differ by an exact multiple of the double 2*pi wrap to the identical bit
// pattern; the angle-embedding loss relies on that.
double wrap_two_pi(double a) {
  double r = std::remainder(a, k_two_pi);
  if (r < 0.0) r += k_two_pi;
  return r;
}

void Tape::check_finite(double v, OpCode op) const {
  if (!std::isfinite(v)) {
    throw numeric_error(std::string(op_name(op)) + " produced a non-finite value");
  }
}

int Tape::push_value(double v, OpCode op) {
  check_finite(v, op);
  val_.push_back(v);
  adj_.push_back(0.0);
  return static_cast<int>(val_.size()) - 1;
}

Var Tape::leaf(double v) {
  const int out = push_value(v, OpCode::leaf);
  nodes_.push_back({OpCode::leaf, -1, -1, out, 0, 0, -1, 0.0});
  return Var(this, out);
}

int Tape::leaf_block(std::span<const double> vs) {
  const int start = static_cast<int>(val_.size());
  for (double v : vs) leaf(v);
  return start;
}

Var Tape::unary(OpCode op, Var a, double result) {
  const int out = push_value(result, op);
  nodes_.push_back({op, static_cast<std::int32_t>(a.idx_), -1, out, 0, 0, -1, 0.0});
  return Var(this, out);
}

Var Tape::binary(OpCode op, Var a, Var b, double result) {
  const int out = push_value(result, op);
  nodes_.push_back({op, static_cast<std::int32_t>(a.idx_),
                    static_cast<std::int32_t>(b.idx_), out, 0, 0, -1, 0.0});
  return Var(this, out);
}

Var Tape::with_const(OpCode op, Var a, double c, double result) {
  const int out = push_value(result, op);
  nodes_.push_back({op, static_cast<std::int32_t>(a.idx_), -1, out, 0, 0, -1, c});
  return Var(this, out);
}

Var Tape::add(Var a, Var b) { return binary(OpCode::add, a, b, val_[a.idx_] + val_[b.idx_]); }
Var Tape::sub(Var a, Var b) { return binary(OpCode::sub, a, b, val_[a.idx_] - val_[b.idx_]); }
Var Tape::mul(Var a, Var b) { return binary(OpCode::mul, a, b, val_[a.idx_] * val_[b.idx_]); }
Var Tape::div(Var a, Var b) { return binary(OpCode::div, a, b, val_[a.idx_] / val_[b.idx_]); }
Var Tape::neg(Var a) { return unary(OpCode::neg, a, -val_[a.idx_]); }
Var Tape::sin(Var a) { return unary(OpCode::sin, a, std::sin(val_[a.idx_])); }
Var Tape::cos(Var a) { return unary(OpCode::cos, a, std::cos(val_[a.idx_])); }
Var Tape::tanh(Var a) { return unary(OpCode::tanh, a, std::tanh(val_[a.idx_])); }
Var Tape::relu(Var a) { return unary(OpCode::relu, a, val_[a.idx_] > 0.0 ? val_[a.idx_] : 0.0); }
Var Tape::square(Var a) { return unary(OpCode::square, a, val_[a.idx_] * val_[a.idx_]); }
Var Tape::wrap_two_pi(Var a) { return unary(OpCode::wrap, a, ad::wrap_two_pi(val_[a.idx_])); }
Var Tape::add_const(Var a, double c) { return with_const(OpCode::add_c, a, c, val_[a.idx_] + c); }
Var Tape::mul_const(Var a, double c) { return with_const(OpCode::mul_c, a, c, val_[a.idx_] * c); }
Var Tape::div_const(Var a, double c) { return with_const(OpCode::div_c, a, c, val_[a.idx_] / c); }
Var Tape::rsub_const(double c, Var a) { return with_const(OpCode::rsub_c, a, c, c - val_[a.idx_]); }
Var Tape::rdiv_const(double c, Var a) { return with_const(OpCode::rdiv_c, a, c, c / val_[a.idx_]); }

int Tape::pack(std::span<const Var> xs) {
  const int aux = static_cast<int>(aux_.size());
  for (const Var& x : xs) aux_.push_back(x.idx_);
  const int start = static_cast<int>(val_.size());
  for (const Var& x : xs) push_value(val_[x.idx_], OpCode::pack);
  nodes_.push_back({OpCode::pack, -1, -1, start,
                    static_cast<std::int32_t>(xs.size()), 0, aux, 0.0});
  return start;
}

int Tape::affine(int w_start, int b_start, int x_start, int m, int n) {
  const int out = static_cast<int>(val_.size());
  for (int i = 0; i < m; ++i) {
    double acc = val_[b_start + i];
    const double* w = &val_[w_start + static_cast<std::size_t>(i) * n];
    const double* x = &val_[x_start];
    for (int j = 0; j < n; ++j) acc += w[j] * x[j];
    push_value(acc, OpCode::affine);
  }
  nodes_.push_back({OpCode::affine, w_start, b_start, out, n, m, x_start, 0.0});
  return out;
}

int Tape::relu_block(int start, int len) {
  const int out = static_cast<int>(val_.size());
  for (int i = 0; i < len; ++i) {
    const double v = val_[start + i];
    push_value(v > 0.0 ? v : 0.0, OpCode::relu_v);
  }
  nodes_.push_back({OpCode::relu_v, start, -1, out, len, 0, -1, 0.0});
  return out;
}

int Tape::tanh_block(int start, int len) {
  const int out = static_cast<int>(val_.size());
  for (int i = 0; i < len; ++i) {
    push_value(std::tanh(val_[start + i]), OpCode::tanh_v);
  }
  nodes_.push_back({OpCode::tanh_v, start, -1, out, len, 0, -1, 0.0});
  return out;
}

int Tape::scale_block(int start, int len, double c) {
  const int out = static_cast<int>(val_.size());
  for (int i = 0; i < len; ++i) {
    push_value(val_[start + i] * c, OpCode::scale_v);
  }
  nodes_.push_back({OpCode::scale_v, start, -1, out, len, 0, -1, c});
  return out;
}

void Tape::backward(Var loss) {
  adj_.assign(val_.size(), 0.0);
  adj_[loss.idx_] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const Node& nd = *it;
    switch (nd.op) {
      case OpCode::leaf:
        break;
      case OpCode::add: {
        const double g = adj_[nd.out];
        adj_[nd.a] += g;
        adj_[nd.b] += g;
        break;
      }
      case OpCode::sub: {
        const double g = adj_[nd.out];
        adj_[nd.a] += g;
        adj_[nd.b] -= g;
        break;
      }
      case OpCode::mul: {
        const double g = adj_[nd.out];
        adj_[nd.a] += g * val_[nd.b];
        adj_[nd.b] += g * val_[nd.a];
        break;
      }
      case OpCode::div: {
        const double g = adj_[nd.out];
        adj_[nd.a] += g / val_[nd.b];
        adj_[nd.b] -= g * val_[nd.out] / val_[nd.b];
        break;
      }
      case OpCode::neg:
        adj_[nd.a] -= adj_[nd.out];
        break;
      case OpCode::sin:
        adj_[nd.a] += adj_[nd.out] * std::cos(val_[nd.a]);
        break;
      case OpCode::cos:
        adj_[nd.a] -= adj_[nd.out] * std::sin(val_[nd.a]);
        break;
      case OpCode::tanh: {
        const double y = val_[nd.out];
        adj_[nd.a] += adj_[nd.out] * (1.0 - y * y);
        break;
      }
      case OpCode::relu:
        if (val_[nd.a] > 0.0) adj_[nd.a] += adj_[nd.out];
        break;
      case OpCode::square:
        adj_[nd.a] += adj_[nd.out] * 2.0 * val_[nd.a];
        break;
      case OpCode::wrap:
      case OpCode::add_c:
        adj_[nd.a] += adj_[nd.out];
        break;
      case OpCode::mul_c:
        adj_[nd.a] += adj_[nd.out] * nd.c;
        break;
      case OpCode::div_c:
        adj_[nd.a] += adj_[nd.out] / nd.c;
        break;
      case OpCode::rsub_c:
        adj_[nd.a] -= adj_[nd.out];
        break;
      case OpCode::rdiv_c:
        adj_[nd.a] -= adj_[nd.out] * val_[nd.out] / val_[nd.a];
        break;
      case OpCode::pack:
        for (int i = 0; i < nd.n; ++i) {
          adj_[aux_[nd.aux + i]] += adj_[nd.out + i];
        }
        break;
      case OpCode::affine: {
        // nd.a = w_start, nd.b = b_start, nd.aux = x_start, dims m x n
        const int m = nd.m, n = nd.n;
        for (int i = 0; i < m; ++i) {
          const double g = adj_[nd.out + i];
          if (g == 0.0) continue;
          adj_[nd.b + i] += g;
          double* wadj = &adj_[nd.a + static_cast<std::size_t>(i) * n];
          const double* w = &val_[nd.a + static_cast<std::size_t>(i) * n];
          const double* x = &val_[nd.aux];
          double* xadj = &adj_[nd.aux];
          for (int j = 0; j < n; ++j) {
            wadj[j] += g * x[j];
            xadj[j] += g * w[j];
          }
        }
        break;
      }
      case OpCode::relu_v:
        for (int i = 0; i < nd.n; ++i) {
          if (val_[nd.a + i] > 0.0) adj_[nd.a + i] += adj_[nd.out + i];
        }
        break;
      case OpCode::tanh_v:
        for (int i = 0; i < nd.n; ++i) {
          const double y = val_[nd.out + i];
          adj_[nd.a + i] += adj_[nd.out + i] * (1.0 - y * y);
        }
        break;
      case OpCode::scale_v:
        for (int i = 0; i < nd.n; ++i) {
          adj_[nd.a + i] += adj_[nd.out + i] * nd.c;
        }
        break;
    }
  }
}

void Tape::reset() {
  val_.clear();
  adj_.clear();
  nodes_.clear();
  aux_.clear();
}

}  // namespace pinode::ad
