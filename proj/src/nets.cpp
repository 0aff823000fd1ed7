// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/nets.h"

#include <cmath>
#include <string>

#include "mose/errors.h"
#include "mose/rng.h"

namespace mose {

using nn::ConvGeometry;
using nn::Graph;
using nn::Matrix;
using nn::ParamShape;
using nn::Var;

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;

std::string blk(int i, const char* leaf) {
  return "blk" + std::to_string(i) + "." + leaf;
}

// Fan-in of an entry: weight columns, or the matching weight's columns for a
// bias.
int fan_in_of(const ParamSet& params, std::size_t entry) {
  const ParamShape& s = params.manifest()[entry];
  if (s.name.size() > 2 && s.name.ends_with(".b")) {
    const std::string weight = s.name.substr(0, s.name.size() - 2) + ".w";
    return params.manifest()[params.find(weight)].cols;
  }
  return s.cols;
}

ParamSet init_params(std::vector<ParamShape> manifest, std::uint64_t seed,
                     bool zero_output, const std::string& output_prefix) {
  ParamSet params(std::move(manifest));
  Rng rng(seed, 0, kInitStream);
  for (std::size_t e = 0; e < params.entry_count(); ++e) {
    const std::string& name = params.manifest()[e].name;
    if (zero_output && name.rfind(output_prefix, 0) == 0) continue;
    nn::fill_uniform(params.entry_values(e), fan_in_of(params, e), rng);
  }
  return params;
}

Matrix stack_rows(std::initializer_list<std::span<const double>> rows) {
  const auto length = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(static_cast<Eigen::Index>(rows.size()), length);
  Eigen::Index r = 0;
  for (std::span<const double> row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != length) {
      throw DataError("network inputs differ in length");
    }
    m.row(r++) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), length);
  }
  return m;
}

}  // namespace

Eigen::VectorXd step_embedding(double step, int width) {
  if (width < 4 || width % 2 != 0) {
    throw ConfigError("step embedding width must be even and >= 4");
  }
  const int half = width / 2;
  Eigen::VectorXd e(width);
  for (int j = 0; j < half; ++j) {
    const double freq = std::pow(10.0, -3.0 * j / (half - 1));
    e[j] = std::sin(step * freq);
    e[half + j] = std::cos(step * freq);
  }
  return e;
}

// --- DiffusionNet ---------------------------------------------------------

DiffusionNet::DiffusionNet(DiffusionNetConfig config) : config_(config) {
  if (config_.channels <= 0 || config_.blocks <= 0 || config_.kernel % 2 == 0) {
    throw ConfigError("diffusion net needs channels, blocks > 0, odd kernel");
  }
}

std::vector<ParamShape> DiffusionNet::manifest() const {
  const int c = config_.channels;
  const int h = config_.embed_hidden;
  std::vector<ParamShape> m{
      {"in.w", c, 2}, {"in.b", c, 1},
      {"emb.w", h, config_.embed_width}, {"emb.b", h, 1}};
  for (int i = 0; i < config_.blocks; ++i) {
    m.push_back({blk(i, "emb.w"), c, h});
    m.push_back({blk(i, "emb.b"), c, 1});
    m.push_back({blk(i, "dil.w"), 2 * c, c * config_.kernel});
    m.push_back({blk(i, "dil.b"), 2 * c, 1});
    m.push_back({blk(i, "out.w"), 2 * c, c});
    m.push_back({blk(i, "out.b"), 2 * c, 1});
  }
  m.push_back({"skip.w", c, c});
  m.push_back({"skip.b", c, 1});
  m.push_back({"out.w", 1, c});
  m.push_back({"out.b", 1, 1});
  return m;
}

ParamSet DiffusionNet::init(std::uint64_t seed, bool zero_output) const {
  return init_params(manifest(), seed, zero_output, "out.");
}

DiffusionNet::Pass DiffusionNet::run(const ParamSet& params,
                                     std::span<const double> x_t,
                                     std::span<const double> y,
                                     double step) const {
  if (x_t.size() != y.size() || x_t.empty()) {
    throw DataError("diffusion net: x_t and y must have equal nonzero length");
  }
  const int c = config_.channels;
  Pass pass;
  pass.graph_ = std::make_unique<Graph>();
  Graph& g = *pass.graph_;
  auto p = [&](const std::string& name) { return g.param(params, params.find(name)); };
  const ConvGeometry pointwise{};

  // Inputs: channel 0 is x_t (differentiable), channel 1 is y.
  pass.x_ = g.input(stack_rows({x_t}));
  Var cond = g.constant(stack_rows({y}));
  Var h = g.relu(g.conv1d(g.concat_rows({pass.x_, cond}), p("in.w"), p("in.b"), pointwise));

  Var embed = g.constant(step_embedding(step, config_.embed_width));
  embed = g.relu(g.add(g.matmul(p("emb.w"), embed), p("emb.b")));

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Var skip{};
  for (int i = 0; i < config_.blocks; ++i) {
    const int dilation = 1 << i;
    Var bias = g.add(g.matmul(p(blk(i, "emb.w")), embed), p(blk(i, "emb.b")));
    Var u = g.add_column(h, bias);
    const ConvGeometry dilated{config_.kernel, dilation, 1,
                               dilation * (config_.kernel - 1) / 2};
    Var z = g.conv1d(u, p(blk(i, "dil.w")), p(blk(i, "dil.b")), dilated);
    Var gate = g.mul(g.tanh(g.rows(z, 0, c)), g.sigmoid(g.rows(z, c, c)));
    Var o = g.conv1d(gate, p(blk(i, "out.w")), p(blk(i, "out.b")), pointwise);
    h = g.scale(g.add(h, g.rows(o, 0, c)), inv_sqrt2);
    Var s = g.rows(o, c, c);
    skip = i == 0 ? s : g.add(skip, s);
  }
  skip = g.scale(skip, 1.0 / std::sqrt(static_cast<double>(config_.blocks)));
  Var s = g.relu(g.conv1d(skip, p("skip.w"), p("skip.b"), pointwise));
  pass.out_ = g.conv1d(s, p("out.w"), p("out.b"), pointwise);
  return pass;
}

std::vector<double> DiffusionNet::forward(const ParamSet& params,
                                          std::span<const double> x_t,
                                          std::span<const double> y,
                                          double step) const {
  Pass pass = run(params, x_t, y, step);
  auto out = pass.output();
  return {out.begin(), out.end()};
}

std::span<const double> DiffusionNet::Pass::output() const {
  const Matrix& v = graph_->value(out_);
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void DiffusionNet::Pass::backward(std::span<const double> output_grad,
                                  std::span<double> param_grads) {
  const Matrix& v = graph_->value(out_);
  if (static_cast<Eigen::Index>(output_grad.size()) != v.size()) {
    throw DataError("diffusion net: gradient length mismatch");
  }
  Matrix seed = Eigen::Map<const Matrix>(output_grad.data(), 1, v.cols());
  graph_->backward(out_, seed, param_grads);
}

std::vector<double> DiffusionNet::Pass::input_grad() const {
  const Matrix& gx = graph_->grad(x_);
  return {gx.data(), gx.data() + gx.size()};
}

// --- ValueNet -------------------------------------------------------------

ValueNet::ValueNet(ValueNetConfig config) : config_(std::move(config)) {
  if (config_.encoder_channels.empty() || config_.kernel <= 0 ||
      config_.stride <= 0 || config_.hidden <= 0) {
    throw ConfigError("value net: bad encoder configuration");
  }
}

std::vector<ParamShape> ValueNet::manifest() const {
  std::vector<ParamShape> m;
  int c_in = 3;
  for (std::size_t i = 0; i < config_.encoder_channels.size(); ++i) {
    const int c_out = config_.encoder_channels[i];
    const std::string base = "enc" + std::to_string(i);
    m.push_back({base + ".w", c_out, c_in * config_.kernel});
    m.push_back({base + ".b", c_out, 1});
    c_in = c_out;
  }
  int width = c_in + (config_.step_input ? config_.embed_width : 0);
  for (int i = 0; i < 4; ++i) {
    const int out = i == 3 ? 1 : config_.hidden;
    const std::string base = "mlp" + std::to_string(i);
    m.push_back({base + ".w", out, width});
    m.push_back({base + ".b", out, 1});
    width = out;
  }
  return m;
}

ParamSet ValueNet::init(std::uint64_t seed, bool zero_output) const {
  return init_params(manifest(), seed, zero_output, "mlp3.");
}

int ValueNet::min_length() const {
  const ConvGeometry geo{config_.kernel, 1, config_.stride, 0};
  for (int length = 1;; ++length) {
    int l = length;
    for (std::size_t i = 0; i < config_.encoder_channels.size() && l > 0; ++i) {
      l = l >= config_.kernel ? geo.output_length(l) : 0;
    }
    if (l > 0) return length;
  }
}

ValueNet::Pass ValueNet::run(const ParamSet& params,
                             std::span<const double> x_t,
                             std::span<const double> eps,
                             std::span<const double> x0, double step) const {
  if (x_t.size() != eps.size() || x_t.size() != x0.size()) {
    throw DataError("value net: inputs differ in length");
  }
  if (static_cast<int>(x_t.size()) < min_length()) {
    throw DataError("value net: input shorter than " +
                    std::to_string(min_length()) + " samples");
  }
  Pass pass;
  pass.graph_ = std::make_unique<Graph>();
  Graph& g = *pass.graph_;
  auto p = [&](const std::string& name) { return g.param(params, params.find(name)); };

  pass.eps_ = g.input(stack_rows({eps}));
  Var h = g.concat_rows({g.constant(stack_rows({x_t})), pass.eps_,
                         g.constant(stack_rows({x0}))});
  const ConvGeometry strided{config_.kernel, 1, config_.stride, 0};
  for (std::size_t i = 0; i < config_.encoder_channels.size(); ++i) {
    const std::string base = "enc" + std::to_string(i);
    h = g.relu(g.conv1d(h, p(base + ".w"), p(base + ".b"), strided));
  }
  h = g.mean_cols(h);
  if (config_.step_input) {
    h = g.concat_rows({h, g.constant(step_embedding(step, config_.embed_width))});
  }
  for (int i = 0; i < 4; ++i) {
    const std::string base = "mlp" + std::to_string(i);
    h = g.add(g.matmul(p(base + ".w"), h), p(base + ".b"));
    if (i < 3) h = g.relu(h);
  }
  pass.out_ = h;
  return pass;
}

double ValueNet::forward(const ParamSet& params, std::span<const double> x_t,
                         std::span<const double> eps,
                         std::span<const double> x0, double step) const {
  return run(params, x_t, eps, x0, step).value();
}

double ValueNet::Pass::value() const { return graph_->value(out_)(0, 0); }

void ValueNet::Pass::backward(double seed, std::span<double> param_grads) {
  Matrix s(1, 1);
  s(0, 0) = seed;
  graph_->backward(out_, s, param_grads);
}

std::vector<double> ValueNet::Pass::eps_grad() const {
  const Matrix& ge = graph_->grad(eps_);
  return {ge.data(), ge.data() + ge.size()};
}

}  // namespace mose
