// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode tape over channel-by-time matrices. Nodes are
// recorded in creation order, which is a valid topological order, and
// backward() walks them in reverse.

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mose/nn/params.h"

namespace mose::nn {

struct Var {
  int id = -1;
};

struct ConvGeometry {
  int kernel = 1;
  int dilation = 1;
  int stride = 1;
  int padding = 0;

  // Output length for an input of `length` columns.
  int output_length(int length) const {
    return (length + 2 * padding - dilation * (kernel - 1) - 1) / stride + 1;
  }
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaf holding data that never receives a gradient.
  Var constant(Matrix value);
  // Leaf whose gradient is readable through grad() after backward().
  Var input(Matrix value);
  // Leaf bound to one entry of `params`; its gradient is added into the
  // parameter-gradient span passed to backward().
  Var param(const ParamSet& params, std::size_t entry);

  // Weight is C_out x (C_in * kernel), tap-major: columns [k*C_in, (k+1)*C_in)
  // multiply input column j*stride + k*dilation - padding. Bias is C_out x 1.
  Var conv1d(Var x, Var weight, Var bias, const ConvGeometry& geometry);
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  // Adds a column vector to every column of x.
  Var add_column(Var x, Var column);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var relu(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var rows(Var a, int begin, int count);
  Var concat_rows(const std::vector<Var>& parts);
  // Column mean: C x L -> C x 1.
  Var mean_cols(Var a);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  const Matrix& grad(Var v) const { return nodes_.at(v.id).grad; }

  // Seeds d(out) with `seed` and propagates. Node gradients are reset first,
  // so a graph may be differentiated repeatedly with different seeds.
  // Parameter gradients are accumulated into `param_grads` (laid out like the
  // ParamSet the param leaves came from) when it is non-empty.
  void backward(Var out, const Matrix& seed, std::span<double> param_grads = {});

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    std::function<void()> propagate;
    // Parameter leaves only.
    std::ptrdiff_t param_offset = -1;
  };

  Var push(Matrix value, bool needs_grad);
  Node& node(Var v) { return nodes_[v.id]; }
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }

  std::vector<Node> nodes_;
};

}  // namespace mose::nn
