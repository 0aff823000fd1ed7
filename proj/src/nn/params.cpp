// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/nn/params.h"

#include <cmath>
#include <sstream>

#include "mose/errors.h"
#include "mose/rng.h"

namespace mose::nn {

ParamSet::ParamSet(std::vector<ParamShape> manifest)
    : manifest_(std::move(manifest)) {
  std::size_t total = 0;
  for (const ParamShape& shape : manifest_) {
    if (shape.rows <= 0 || shape.cols <= 0) {
      throw ConfigError("parameter '" + shape.name + "' has an empty shape");
    }
    offsets_.push_back(total);
    total += shape.size();
  }
  values_.assign(total, 0.0);
  grads_.assign(total, 0.0);
}

std::size_t ParamSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < manifest_.size(); ++i) {
    if (manifest_[i].name == name) return i;
  }
  throw ConfigError("no parameter named '" + name + "'");
}

std::span<double> ParamSet::entry_values(std::size_t entry) {
  return std::span<double>(values_).subspan(offsets_.at(entry),
                                            manifest_[entry].size());
}

std::span<const double> ParamSet::entry_values(std::size_t entry) const {
  return std::span<const double>(values_).subspan(offsets_.at(entry),
                                                  manifest_[entry].size());
}

Eigen::Map<const Matrix> ParamSet::matrix(std::size_t entry) const {
  const ParamShape& s = manifest_.at(entry);
  return Eigen::Map<const Matrix>(values_.data() + offsets_[entry], s.rows,
                                  s.cols);
}

void ParamSet::zero_grad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

void ParamSet::round_to_float() {
  for (double& v : values_) v = static_cast<float>(v);
}

std::uint64_t ParamSet::hash() const {
  std::vector<float> image(values_.begin(), values_.end());
  return hash_values<float>(image);
}

std::string describe_manifest(const std::vector<ParamShape>& manifest) {
  std::ostringstream out;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (i) out << ';';
    out << manifest[i].name << ':' << manifest[i].rows << 'x'
        << manifest[i].cols;
  }
  return out.str();
}

std::vector<ParamShape> parse_manifest(const std::string& text) {
  std::vector<ParamShape> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    const auto colon = item.rfind(':');
    const auto x = item.rfind('x');
    if (colon == std::string::npos || x == std::string::npos || x < colon) {
      throw DataError("bad manifest entry '" + item + "'");
    }
    ParamShape shape;
    shape.name = item.substr(0, colon);
    try {
      shape.rows = std::stoi(item.substr(colon + 1, x - colon - 1));
      shape.cols = std::stoi(item.substr(x + 1));
    } catch (const std::exception&) {
      throw DataError("bad manifest entry '" + item + "'");
    }
    out.push_back(shape);
  }
  return out;
}

void fill_uniform(std::span<double> values, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : values) {
    v = static_cast<float>(bound * (2.0 * rng.uniform() - 1.0));
  }
}

}  // namespace mose::nn
