// Copyright 2026 The ECAT Authors.
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

#ifndef ECAT_MODEL_TRANSFORMER_HEAD_HPP_
#define ECAT_MODEL_TRANSFORMER_HEAD_HPP_

#include <array>
#include <string>
#include <vector>

#include "ecat/model/config.hpp"
#include "ecat/nn/layers.hpp"

namespace ecat {

inline constexpr double kEmbedInitStd = 0.02;

template <typename T>
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(const std::string& name, int channels, int heads);

  void Init(nn::Rng& rng);

  // x: [B,T,C] -> [B,T,C].
  nn::Var<T> operator()(nn::Tape<T>& tape, nn::Var<T> x);

  nn::LinearLayer<T>& qkv() { return qkv_; }
  nn::LinearLayer<T>& proj() { return proj_; }
  int heads() const { return heads_; }

  template <typename F>
  void Visit(F&& f) {
    qkv_.Visit(f);
    proj_.Visit(f);
  }

 private:
  int heads_ = 1;
  nn::LinearLayer<T> qkv_;
  nn::LinearLayer<T> proj_;
};

// Linear -> GELU -> Linear.
template <typename T>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(const std::string& name, int channels, int hidden);

  void Init(nn::Rng& rng);

  nn::Var<T> operator()(nn::Tape<T>& tape, nn::Var<T> x);

  nn::LinearLayer<T>& fc1() { return fc1_; }
  nn::LinearLayer<T>& fc2() { return fc2_; }

  template <typename F>
  void Visit(F&& f) {
    fc1_.Visit(f);
    fc2_.Visit(f);
  }

 private:
  nn::LinearLayer<T> fc1_;
  nn::LinearLayer<T> fc2_;
};

// Pre-norm residual block:
//   x <- MSA(LN(x)) + x
//   x <- FFN(LN(x)) + x
template <typename T>
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(const std::string& name, const ModelConfig& cfg);

  void Init(nn::Rng& rng);

  nn::Var<T> operator()(nn::Tape<T>& tape, nn::Var<T> x);

  MultiHeadSelfAttention<T>& attention() { return attn_; }
  FeedForward<T>& ffn() { return ffn_; }

  template <typename F>
  void Visit(F&& f) {
    ln1_.Visit(f);
    attn_.Visit(f);
    ln2_.Visit(f);
    ffn_.Visit(f);
  }

 private:
  nn::LayerNormLayer<T> ln1_;
  MultiHeadSelfAttention<T> attn_;
  nn::LayerNormLayer<T> ln2_;
  FeedForward<T> ffn_;
};

template <typename T>
struct EmbeddedTokens {
  nn::Var<T> seq;  // [B, T+1, C], class token first
  nn::Var<T> z0;   // [B, h, w, C], expanded latent before position embedding
};

template <typename T>
struct TransformerOutputs {
  std::array<nn::Var<T>, 3> intermediates;  // [B, h, w, C] after blocks 1..3
  nn::Var<T> cls;                           // [B, C] after the last block
};

// Decoder-classifier over the quantized latent. Spatial positions are
// flattened in raster order.
template <typename T>
class TransformerHead {
 public:
  TransformerHead() = default;
  explicit TransformerHead(const ModelConfig& cfg);

  void Init(nn::Rng& rng);

  // z_hat: [B, h, w, M].
  EmbeddedTokens<T> Embed(nn::Tape<T>& tape, nn::Var<T> z_hat);

  TransformerOutputs<T> Forward(nn::Tape<T>& tape, nn::Var<T> seq);

  // LN then linear map of the class token: [B, C] -> [B, K].
  nn::Var<T> Logits(nn::Tape<T>& tape, nn::Var<T> cls);

  std::vector<TransformerBlock<T>>& blocks() { return blocks_; }
  nn::LinearLayer<T>& expand() { return expand_; }
  nn::LinearLayer<T>& classifier() { return classifier_; }
  nn::Parameter<T>& pos_embed() { return pos_embed_; }
  nn::Parameter<T>& class_embed() { return class_embed_; }

  template <typename F>
  void Visit(F&& f) {
    expand_.Visit(f);
    f(pos_embed_);
    f(class_embed_);
    for (auto& b : blocks_) b.Visit(f);
    norm_.Visit(f);
    classifier_.Visit(f);
  }

 private:
  int h_ = 0, w_ = 0, c_ = 0;
  nn::LinearLayer<T> expand_;
  nn::Parameter<T> pos_embed_;
  nn::Parameter<T> class_embed_;
  std::vector<TransformerBlock<T>> blocks_;
  nn::LayerNormLayer<T> norm_;
  nn::LinearLayer<T> classifier_;
};

}  // namespace ecat

#endif  // ECAT_MODEL_TRANSFORMER_HEAD_HPP_
