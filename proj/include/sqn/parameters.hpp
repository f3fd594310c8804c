// Copyright 2026 The SQN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sqn/tensor.hpp"

namespace sqn {

/// Named learnable tensors plus their adaptive-moment optimizer state.
///
/// Iteration is in name order, which fixes the checkpoint layout and keeps
/// every pass over the parameters deterministic.
template <typename Scalar>
class Parameters {
 public:
  struct Slot {
    Tensor<Scalar> value;
    Matrix<Scalar> first_moment;
    Matrix<Scalar> second_moment;
  };

  /// Registers a new parameter; names must be unique.
  Tensor<Scalar>& add(const std::string& name, Matrix<Scalar> value) {
    if (slots_.contains(name)) throw ArgumentError("duplicate parameter name '" + name + "'");
    auto& slot = slots_[name];
    slot.value = Tensor<Scalar>::parameter(std::move(value));
    return slot.value;
  }

  bool contains(const std::string& name) const { return slots_.contains(name); }

  const Tensor<Scalar>& get(const std::string& name) const {
    auto it = slots_.find(name);
    if (it == slots_.end()) throw ArgumentError("unknown parameter '" + name + "'");
    return it->second.value;
  }
  Tensor<Scalar>& get(const std::string& name) {
    auto it = slots_.find(name);
    if (it == slots_.end()) throw ArgumentError("unknown parameter '" + name + "'");
    return it->second.value;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : slots_) out.push_back(name);
    return out;
  }
  std::size_t size() const { return slots_.size(); }
  Eigen::Index scalar_count() const {
    Eigen::Index n = 0;
    for (const auto& [_, slot] : slots_) n += slot.value.value().size();
    return n;
  }

  std::map<std::string, Slot>& slots() { return slots_; }
  const std::map<std::string, Slot>& slots() const { return slots_; }

  void zero_grad() {
    for (auto& [_, slot] : slots_) slot.value.zero_grad();
  }

  /// Optimizer steps taken so far.
  std::uint64_t step = 0;

  /// Deep copy in another scalar type. Optimizer moments are not carried.
  template <typename Other>
  Parameters<Other> cast() const {
    Parameters<Other> out;
    for (const auto& [name, slot] : slots_) out.add(name, slot.value.value().template cast<Other>());
    out.step = step;
    return out;
  }

  /// Deep copy; the copy shares no graph nodes with this set.
  Parameters clone() const {
    Parameters out;
    for (const auto& [name, slot] : slots_) {
      auto& dst = out.slots_[name];
      dst.value = Tensor<Scalar>::parameter(slot.value.value());
      dst.first_moment = slot.first_moment;
      dst.second_moment = slot.second_moment;
    }
    out.step = step;
    return out;
  }

 private:
  std::map<std::string, Slot> slots_;
};

/// Uniform in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
template <typename Scalar>
Matrix<Scalar> glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix<Scalar> w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(dist(rng));
  return w;
}

struct AdamOptions {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected adaptive-moment update over every parameter that holds
/// a gradient, then clears all gradients. Parameters that received no
/// gradient this step are left untouched.
template <typename Scalar>
void adam_step(Parameters<Scalar>& params, const AdamOptions& opt) {
  bool any = false;
  for (const auto& [_, slot] : params.slots()) any = any || slot.value.has_grad();
  if (!any) throw ArgumentError("adam_step: no parameter has a gradient");

  ++params.step;
  const double t = static_cast<double>(params.step);
  const Scalar lr = static_cast<Scalar>(opt.learning_rate);
  const Scalar b1 = static_cast<Scalar>(opt.beta1);
  const Scalar b2 = static_cast<Scalar>(opt.beta2);
  const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(opt.beta1, t));
  const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(opt.beta2, t));
  const Scalar eps = static_cast<Scalar>(opt.epsilon);

  for (auto& [_, slot] : params.slots()) {
    if (!slot.value.has_grad()) continue;
    const auto& g = slot.value.grad();
    auto& w = slot.value.mutable_value();
    if (slot.first_moment.size() == 0) {
      slot.first_moment = Matrix<Scalar>::Zero(w.rows(), w.cols());
      slot.second_moment = Matrix<Scalar>::Zero(w.rows(), w.cols());
    }
    slot.first_moment = b1 * slot.first_moment + (Scalar(1) - b1) * g;
    slot.second_moment =
        b2 * slot.second_moment + (Scalar(1) - b2) * g.cwiseProduct(g);
    w.array() -= lr * (slot.first_moment.array() / c1) /
                 ((slot.second_moment.array() / c2).sqrt() + eps);
  }
  params.zero_grad();
}

// SQNW v1 (little-endian): "SQNW" | u8 version=1 | u32 count | per parameter
// in name order: u16 name length, UTF-8 name, u8 rank, rank x u64 dims,
// f32 data (row-major) | u64 training step.

std::string encode_checkpoint(const Parameters<float>& params);
Parameters<float> decode_checkpoint(std::string_view bytes);
void save_checkpoint(const Parameters<float>& params, const std::filesystem::path& path);
Parameters<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace sqn
