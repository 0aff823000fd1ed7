// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Diffusion network D(x_t, y, t) and value network V(x_t, eps, x0).

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mose/nn/graph.h"
#include "mose/nn/params.h"

namespace mose {

using nn::ParamSet;

// Fixed sinusoidal features of a (possibly fractional) step index:
// [sin(t f_0), ..., sin(t f_{h-1}), cos(t f_0), ..., cos(t f_{h-1})] with
// f_j = 10^(-3 j / (h - 1)) and h = width / 2.
Eigen::VectorXd step_embedding(double step, int width);

struct DiffusionNetConfig {
  int channels = 16;
  int blocks = 4;  // dilations 1, 2, 4, ...
  int kernel = 3;
  int embed_width = 16;
  int embed_hidden = 32;
};

// Dilated 1-D convolution residual stack with gated activations and a
// summed skip path. Inputs are the two channels [x_t; y]; the step embedding
// is projected and added per block. The output projection starts at zero.
class DiffusionNet {
 public:
  explicit DiffusionNet(DiffusionNetConfig config = {});

  const DiffusionNetConfig& config() const { return config_; }
  std::vector<nn::ParamShape> manifest() const;
  // Fan-in uniform init; the output layer is zero unless `zero_output` is
  // false (used by gradient checks that need a non-trivial output).
  ParamSet init(std::uint64_t seed, bool zero_output = true) const;

  // Forward pass retaining the tape for a later backward().
  class Pass {
   public:
    std::span<const double> output() const;
    // Backpropagates d(loss)/d(eps_hat); adds d(loss)/d(theta) into
    // `param_grads` when non-empty.
    void backward(std::span<const double> output_grad,
                  std::span<double> param_grads);
    // d(loss)/d(x_t) from the most recent backward().
    std::vector<double> input_grad() const;

   private:
    friend class DiffusionNet;
    std::unique_ptr<nn::Graph> graph_;
    nn::Var x_;
    nn::Var out_;
  };

  Pass run(const ParamSet& params, std::span<const double> x_t,
           std::span<const double> y, double step) const;
  std::vector<double> forward(const ParamSet& params,
                              std::span<const double> x_t,
                              std::span<const double> y, double step) const;

 private:
  DiffusionNetConfig config_;
};

struct ValueNetConfig {
  std::vector<int> encoder_channels{8, 16, 16};
  int kernel = 4;
  int stride = 2;
  int hidden = 32;
  // Append the step embedding to the pooled features.
  bool step_input = false;
  int embed_width = 16;
};

// Strided convolution encoder over [x_t; eps; x0], mean-pooled over time,
// followed by four linear layers with ReLU between them. The last layer
// starts at zero.
class ValueNet {
 public:
  explicit ValueNet(ValueNetConfig config = {});

  const ValueNetConfig& config() const { return config_; }
  std::vector<nn::ParamShape> manifest() const;
  ParamSet init(std::uint64_t seed, bool zero_output = true) const;
  // Shortest input the encoder accepts.
  int min_length() const;

  class Pass {
   public:
    double value() const;
    // Backpropagates `seed` = d(loss)/dv. Parameter gradients go into
    // `param_grads` when non-empty.
    void backward(double seed, std::span<double> param_grads);
    // d(loss)/d(eps) from the most recent backward().
    std::vector<double> eps_grad() const;

   private:
    friend class ValueNet;
    std::unique_ptr<nn::Graph> graph_;
    nn::Var eps_;
    nn::Var out_;
  };

  Pass run(const ParamSet& params, std::span<const double> x_t,
           std::span<const double> eps, std::span<const double> x0,
           double step) const;
  double forward(const ParamSet& params, std::span<const double> x_t,
                 std::span<const double> eps, std::span<const double> x0,
                 double step) const;

 private:
  ValueNetConfig config_;
};

}  // namespace mose
