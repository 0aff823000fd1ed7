// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/nn/graph.h"

#include <cmath>

#include "mose/errors.h"

namespace mose::nn {

namespace {

using Strided = Eigen::OuterStride<>;
using ConstColumns = Eigen::Map<const Matrix, 0, Strided>;
using Columns = Eigen::Map<Matrix, 0, Strided>;

// Range of output columns j for which input column j*stride + offset lies in
// [0, length).
struct TapRange {
  int first = 0;
  int count = 0;
};

TapRange tap_range(int offset, int stride, int length, int out_length) {
  int first = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  if (length - 1 - offset < 0) return {};
  int last = std::min(out_length - 1, (length - 1 - offset) / stride);
  if (last < first) return {};
  return {first, last - first + 1};
}

void check(bool ok, const char* what) {
  if (!ok) throw DataError(std::string("graph: ") + what);
}

}  // namespace

Var Graph::push(Matrix value, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Graph::constant(Matrix value) { return push(std::move(value), false); }

Var Graph::input(Matrix value) { return push(std::move(value), true); }

Var Graph::param(const ParamSet& params, std::size_t entry) {
  Var v = push(params.matrix(entry), true);
  node(v).param_offset = static_cast<std::ptrdiff_t>(params.offset(entry));
  return v;
}

Var Graph::conv1d(Var x, Var weight, Var bias, const ConvGeometry& g) {
  const Matrix& xv = value(x);
  const Matrix& wv = value(weight);
  const int c_in = static_cast<int>(xv.rows());
  const int length = static_cast<int>(xv.cols());
  const int c_out = static_cast<int>(wv.rows());
  check(wv.cols() == static_cast<Eigen::Index>(c_in) * g.kernel,
        "conv1d weight shape");
  check(value(bias).rows() == c_out && value(bias).cols() == 1,
        "conv1d bias shape");
  const int out_len = g.output_length(length);
  check(out_len > 0, "conv1d input shorter than receptive field");

  Matrix out = value(bias).col(0).replicate(1, out_len);
  for (int k = 0; k < g.kernel; ++k) {
    const int offset = k * g.dilation - g.padding;
    const TapRange r = tap_range(offset, g.stride, length, out_len);
    if (r.count == 0) continue;
    ConstColumns src(xv.data() + static_cast<Eigen::Index>(r.first * g.stride + offset) * c_in,
                     c_in, r.count, Strided(static_cast<Eigen::Index>(g.stride) * c_in));
    out.middleCols(r.first, r.count).noalias() +=
        wv.middleCols(static_cast<Eigen::Index>(k) * c_in, c_in) * src;
  }

  const bool grad = needs(x) || needs(weight) || needs(bias);
  Var y = push(std::move(out), grad);
  node(y).propagate = [this, x, weight, bias, y, g, c_in, length, out_len]() {
    const Matrix& dy = nodes_[y.id].grad;
    const Matrix& xv = nodes_[x.id].value;
    const Matrix& wv = nodes_[weight.id].value;
    if (needs(bias)) node(bias).grad.col(0) += dy.rowwise().sum();
    for (int k = 0; k < g.kernel; ++k) {
      const int offset = k * g.dilation - g.padding;
      const TapRange r = tap_range(offset, g.stride, length, out_len);
      if (r.count == 0) continue;
      const Eigen::Index start =
          static_cast<Eigen::Index>(r.first * g.stride + offset) * c_in;
      const Strided stride(static_cast<Eigen::Index>(g.stride) * c_in);
      const auto dy_k = dy.middleCols(r.first, r.count);
      if (needs(weight)) {
        ConstColumns src(xv.data() + start, c_in, r.count, stride);
        node(weight).grad.middleCols(static_cast<Eigen::Index>(k) * c_in, c_in).noalias() +=
            dy_k * src.transpose();
      }
      if (needs(x)) {
        Columns dst(node(x).grad.data() + start, c_in, r.count, stride);
        dst.noalias() +=
            wv.middleCols(static_cast<Eigen::Index>(k) * c_in, c_in).transpose() * dy_k;
      }
    }
  };
  return y;
}

Var Graph::matmul(Var a, Var b) {
  check(value(a).cols() == value(b).rows(), "matmul shape");
  Var y = push(value(a) * value(b), needs(a) || needs(b));
  node(y).propagate = [this, a, b, y]() {
    const Matrix& dy = nodes_[y.id].grad;
    if (needs(a)) node(a).grad.noalias() += dy * value(b).transpose();
    if (needs(b)) node(b).grad.noalias() += value(a).transpose() * dy;
  };
  return y;
}

Var Graph::add(Var a, Var b) {
  check(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
        "add shape");
  Var y = push(value(a) + value(b), needs(a) || needs(b));
  node(y).propagate = [this, a, b, y]() {
    const Matrix& dy = nodes_[y.id].grad;
    if (needs(a)) node(a).grad += dy;
    if (needs(b)) node(b).grad += dy;
  };
  return y;
}

Var Graph::add_column(Var x, Var column) {
  check(value(column).cols() == 1 && value(column).rows() == value(x).rows(),
        "add_column shape");
  Matrix out = value(x);
  out.colwise() += value(column).col(0);
  Var y = push(std::move(out), needs(x) || needs(column));
  node(y).propagate = [this, x, column, y]() {
    const Matrix& dy = nodes_[y.id].grad;
    if (needs(x)) node(x).grad += dy;
    if (needs(column)) node(column).grad.col(0) += dy.rowwise().sum();
  };
  return y;
}

Var Graph::mul(Var a, Var b) {
  check(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
        "mul shape");
  Var y = push(value(a).cwiseProduct(value(b)), needs(a) || needs(b));
  node(y).propagate = [this, a, b, y]() {
    const Matrix& dy = nodes_[y.id].grad;
    if (needs(a)) node(a).grad += dy.cwiseProduct(value(b));
    if (needs(b)) node(b).grad += dy.cwiseProduct(value(a));
  };
  return y;
}

Var Graph::scale(Var a, double factor) {
  Var y = push(value(a) * factor, needs(a));
  node(y).propagate = [this, a, y, factor]() {
    node(a).grad += nodes_[y.id].grad * factor;
  };
  return y;
}

Var Graph::relu(Var a) {
  Var y = push(value(a).cwiseMax(0.0), needs(a));
  node(y).propagate = [this, a, y]() {
    const Matrix& dy = nodes_[y.id].grad;
    node(a).grad.array() += (value(a).array() > 0.0).select(dy.array(), 0.0);
  };
  return y;
}

Var Graph::tanh(Var a) {
  Var y = push(value(a).array().tanh().matrix(), needs(a));
  node(y).propagate = [this, a, y]() {
    const Matrix& out = nodes_[y.id].value;
    node(a).grad.array() +=
        nodes_[y.id].grad.array() * (1.0 - out.array().square());
  };
  return y;
}

Var Graph::sigmoid(Var a) {
  Matrix out = (1.0 + (-value(a).array()).exp()).inverse().matrix();
  Var y = push(std::move(out), needs(a));
  node(y).propagate = [this, a, y]() {
    const Matrix& s = nodes_[y.id].value;
    node(a).grad.array() +=
        nodes_[y.id].grad.array() * s.array() * (1.0 - s.array());
  };
  return y;
}

Var Graph::rows(Var a, int begin, int count) {
  check(begin >= 0 && count > 0 && begin + count <= value(a).rows(),
        "rows range");
  Var y = push(value(a).middleRows(begin, count), needs(a));
  node(y).propagate = [this, a, y, begin, count]() {
    node(a).grad.middleRows(begin, count) += nodes_[y.id].grad;
  };
  return y;
}

Var Graph::concat_rows(const std::vector<Var>& parts) {
  check(!parts.empty(), "concat of nothing");
  Eigen::Index total = 0;
  const Eigen::Index cols = value(parts[0]).cols();
  bool grad = false;
  for (Var p : parts) {
    check(value(p).cols() == cols, "concat column mismatch");
    total += value(p).rows();
    grad = grad || needs(p);
  }
  Matrix out(total, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    out.middleRows(at, value(p).rows()) = value(p);
    at += value(p).rows();
  }
  Var y = push(std::move(out), grad);
  node(y).propagate = [this, parts, y]() {
    Eigen::Index at = 0;
    for (Var p : parts) {
      const Eigen::Index n = value(p).rows();
      if (needs(p)) node(p).grad += nodes_[y.id].grad.middleRows(at, n);
      at += n;
    }
  };
  return y;
}

Var Graph::mean_cols(Var a) {
  const double inv = 1.0 / static_cast<double>(value(a).cols());
  Matrix out = value(a).rowwise().sum() * inv;
  Var y = push(std::move(out), needs(a));
  node(y).propagate = [this, a, y, inv]() {
    node(a).grad.colwise() += nodes_[y.id].grad.col(0) * inv;
  };
  return y;
}

void Graph::backward(Var out, const Matrix& seed,
                     std::span<double> param_grads) {
  check(seed.rows() == value(out).rows() && seed.cols() == value(out).cols(),
        "seed shape");
  for (int i = 0; i <= out.id; ++i) {
    Node& n = nodes_[i];
    if (n.needs_grad) n.grad.setZero(n.value.rows(), n.value.cols());
  }
  if (!needs(out)) return;
  node(out).grad = seed;
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad) continue;
    if (n.propagate) {
      n.propagate();
    } else if (n.param_offset >= 0 && !param_grads.empty()) {
      Eigen::Map<Matrix> sink(param_grads.data() + n.param_offset,
                              n.value.rows(), n.value.cols());
      sink += n.grad;
    }
  }
}

}  // namespace mose::nn
