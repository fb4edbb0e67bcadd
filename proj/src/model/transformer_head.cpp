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

#include "ecat/model/transformer_head.hpp"

namespace ecat {

template <typename T>
MultiHeadSelfAttention<T>::MultiHeadSelfAttention(const std::string& name,
                                                  int channels, int heads)
    : heads_(heads),
      qkv_(name + ".qkv", channels, 3 * channels),
      proj_(name + ".proj", channels, channels) {
  if (heads <= 0 || channels % heads != 0) {
    throw ConfigError("attention width must be divisible by heads");
  }
}

template <typename T>
void MultiHeadSelfAttention<T>::Init(nn::Rng& rng) {
  qkv_.InitTruncNormal(rng, kEmbedInitStd);
  proj_.InitTruncNormal(rng, kEmbedInitStd);
}

template <typename T>
nn::Var<T> MultiHeadSelfAttention<T>::operator()(nn::Tape<T>& tape,
                                                 nn::Var<T> x) {
  return proj_(tape, nn::SelfAttention(qkv_(tape, x), heads_));
}

template <typename T>
FeedForward<T>::FeedForward(const std::string& name, int channels, int hidden)
    : fc1_(name + ".fc1", channels, hidden),
      fc2_(name + ".fc2", hidden, channels) {}

template <typename T>
void FeedForward<T>::Init(nn::Rng& rng) {
  fc1_.InitTruncNormal(rng, kEmbedInitStd);
  fc2_.InitTruncNormal(rng, kEmbedInitStd);
}

template <typename T>
nn::Var<T> FeedForward<T>::operator()(nn::Tape<T>& tape, nn::Var<T> x) {
  return fc2_(tape, nn::Gelu(fc1_(tape, x)));
}

template <typename T>
TransformerBlock<T>::TransformerBlock(const std::string& name,
                                      const ModelConfig& cfg)
    : ln1_(name + ".ln1", cfg.embed_c),
      attn_(name + ".attn", cfg.embed_c, cfg.heads),
      ln2_(name + ".ln2", cfg.embed_c),
      ffn_(name + ".ffn", cfg.embed_c, cfg.ffn_hidden()) {}

template <typename T>
void TransformerBlock<T>::Init(nn::Rng& rng) {
  attn_.Init(rng);
  ffn_.Init(rng);
}

template <typename T>
nn::Var<T> TransformerBlock<T>::operator()(nn::Tape<T>& tape, nn::Var<T> x) {
  x = nn::Add(attn_(tape, ln1_(tape, x)), x);
  return nn::Add(ffn_(tape, ln2_(tape, x)), x);
}

template <typename T>
TransformerHead<T>::TransformerHead(const ModelConfig& cfg)
    : h_(cfg.latent_h()),
      w_(cfg.latent_w()),
      c_(cfg.embed_c),
      expand_("head.expand", cfg.channels_m, cfg.embed_c),
      pos_embed_("head.pos_embed",
                 nn::Tensor<T>(nn::Shape{cfg.tokens(), cfg.embed_c})),
      class_embed_("head.class_embed",
                   nn::Tensor<T>(nn::Shape{1, cfg.embed_c})),
      norm_("head.norm", cfg.embed_c),
      classifier_("head.classifier", cfg.embed_c, cfg.num_classes) {
  blocks_.reserve(static_cast<std::size_t>(cfg.depth_l));
  for (int i = 0; i < cfg.depth_l; ++i) {
    blocks_.emplace_back("head.block" + std::to_string(i), cfg);
  }
}

template <typename T>
void TransformerHead<T>::Init(nn::Rng& rng) {
  expand_.InitFanIn(rng);
  for (auto& v : pos_embed_.value.values()) {
    v = static_cast<T>(rng.TruncatedNormal(kEmbedInitStd));
  }
  for (auto& v : class_embed_.value.values()) {
    v = static_cast<T>(rng.TruncatedNormal(kEmbedInitStd));
  }
  for (auto& b : blocks_) b.Init(rng);
  classifier_.InitTruncNormal(rng, kEmbedInitStd);
}

template <typename T>
EmbeddedTokens<T> TransformerHead<T>::Embed(nn::Tape<T>& tape,
                                            nn::Var<T> z_hat) {
  const nn::Shape& s = z_hat.shape();
  if (s.size() != 4 || s[1] != h_ || s[2] != w_) {
    throw nn::ShapeError("latent " + nn::ShapeToString(s) +
                         " does not match position embedding grid " +
                         std::to_string(h_) + "x" + std::to_string(w_));
  }
  const std::int64_t b = s[0];
  EmbeddedTokens<T> out;
  out.z0 = expand_(tape, z_hat);
  nn::Var<T> seq = nn::Reshape(out.z0, nn::Shape{b, h_ * w_, c_});
  seq = nn::Add(seq, tape.Param(pos_embed_));
  out.seq = nn::PrependToken(seq, tape.Param(class_embed_));
  return out;
}

template <typename T>
TransformerOutputs<T> TransformerHead<T>::Forward(nn::Tape<T>& tape,
                                                  nn::Var<T> seq) {
  if (blocks_.size() < 3) {
    throw ConfigError("feature aggregation needs at least 3 blocks");
  }
  const std::int64_t b = seq.shape().at(0);
  TransformerOutputs<T> out;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    seq = blocks_[i](tape, seq);
    if (i < 3) {
      out.intermediates[i] = nn::Reshape(nn::SliceTokens(seq, 1, h_ * w_),
                                         nn::Shape{b, h_, w_, c_});
    }
  }
  out.cls = nn::Reshape(nn::SliceTokens(seq, 0, 1), nn::Shape{b, c_});
  return out;
}

template <typename T>
nn::Var<T> TransformerHead<T>::Logits(nn::Tape<T>& tape, nn::Var<T> cls) {
  return classifier_(tape, norm_(tape, cls));
}

template class MultiHeadSelfAttention<float>;
template class MultiHeadSelfAttention<double>;
template class FeedForward<float>;
template class FeedForward<double>;
template class TransformerBlock<float>;
template class TransformerBlock<double>;
template class TransformerHead<float>;
template class TransformerHead<double>;

}  // namespace ecat
