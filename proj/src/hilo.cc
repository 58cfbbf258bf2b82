// Copyright 2026 The sehilo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sehilo/hilo.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "sehilo/metrics.h"
#include "sehilo/robustness.h"

namespace sehilo {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Tensor LinearRows(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor out = MatMul(x, w);
  if (b.rank() != 1 || b.dim(0) != out.dim(1)) {
    throw std::invalid_argument("hilo: bias length mismatch");
  }
  for (int64_t i = 0; i < out.dim(0); ++i) {
    for (int64_t j = 0; j < out.dim(1); ++j) out.at(i, j) += b.at(j);
  }
  return out;
}

Tensor Gelu(Tensor x) {
  for (int64_t i = 0; i < x.size(); ++i) {
    const double v = x.at(i);
    x.at(i) = 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
  }
  return x;
}

Tensor AddTensors(const Tensor& a, const Tensor& b) {
  if (!a.SameShape(b)) {
    throw std::invalid_argument("hilo: residual shape mismatch");
  }
  Tensor out = a;
  for (int64_t i = 0; i < out.size(); ++i) out.at(i) += b.at(i);
  return out;
}

Tensor SliceColumns(const Tensor& x, int64_t begin, int64_t count) {
  Tensor out({x.dim(0), count});
  for (int64_t i = 0; i < x.dim(0); ++i) {
    for (int64_t j = 0; j < count; ++j) out.at(i, j) = x.at(i, begin + j);
  }
  return out;
}

// Multi-head attention with separate query and key/value token sets. Inputs
// are (n_q, d) and (n_kv, d); all four projections are (d, d) and bias-free.
Tensor MultiHeadAttention(const Tensor& q_in, const Tensor& kv_in,
                          const Tensor& wq, const Tensor& wk, const Tensor& wv,
                          const Tensor& wo, int n_heads,
                          AttentionProbe* probe) {
  const int64_t d = q_in.dim(1);
  if (d % n_heads != 0) {
    throw std::invalid_argument("hilo: heads must divide feature dim");
  }
  const int64_t hd = d / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  const Tensor q = MatMul(q_in, wq);
  const Tensor k = MatMul(kv_in, wk);
  const Tensor v = MatMul(kv_in, wv);
  const int64_t n_q = q.dim(0);
  const int64_t n_kv = k.dim(0);

  Tensor merged({n_q, d});
  for (int h = 0; h < n_heads; ++h) {
    const int64_t off = h * hd;
    Tensor scores({n_q, n_kv});
    for (int64_t i = 0; i < n_q; ++i) {
      for (int64_t j = 0; j < n_kv; ++j) {
        double acc = 0.0;
        for (int64_t p = 0; p < hd; ++p) {
          acc += q.at(i, off + p) * k.at(j, off + p);
        }
        scores.at(i, j) = acc * scale;
      }
    }
    const Tensor attn = SoftmaxRows(scores);
    if (probe != nullptr) probe->head_weights.push_back(attn);
    for (int64_t i = 0; i < n_q; ++i) {
      for (int64_t p = 0; p < hd; ++p) {
        double acc = 0.0;
        for (int64_t j = 0; j < n_kv; ++j) {
          acc += attn.at(i, j) * v.at(j, off + p);
        }
        merged.at(i, off + p) = acc;
      }
    }
  }
  return MatMul(merged, wo);
}

void CheckGrid(const Tensor& x, int64_t channels, const char* what) {
  if (x.rank() != 3) {
    throw std::invalid_argument(std::string(what) + ": need a rank-3 tensor");
  }
  if (x.dim(2) != channels) {
    throw std::invalid_argument(std::string(what) + ": channel count mismatch");
  }
}

bool IsEmpty(const Tensor& t) { return t.rank() == 0; }

// Image patch helpers: token (i, j) maps to row i * (w_img / p) + j, with the
// p x p x c block flattened row-major.
Tensor ImageToPatchRows(const Tensor& image, int p) {
  const int64_t h_img = image.dim(0);
  const int64_t w_img = image.dim(1);
  const int64_t c = image.dim(2);
  const int64_t grid_h = h_img / p;
  const int64_t grid_w = w_img / p;
  Tensor rows({grid_h * grid_w, static_cast<int64_t>(p) * p * c});
  for (int64_t i = 0; i < grid_h; ++i) {
    for (int64_t j = 0; j < grid_w; ++j) {
      const int64_t row = i * grid_w + j;
      int64_t col = 0;
      for (int di = 0; di < p; ++di) {
        for (int dj = 0; dj < p; ++dj) {
          for (int64_t ch = 0; ch < c; ++ch) {
            rows.at(row, col++) = image.at(i * p + di, j * p + dj, ch);
          }
        }
      }
    }
  }
  return rows;
}

Tensor PatchRowsToImage(const Tensor& rows, int64_t h_img, int64_t w_img,
                        int p, int64_t c) {
  const int64_t grid_w = w_img / p;
  Tensor image({h_img, w_img, c});
  for (int64_t i = 0; i < h_img / p; ++i) {
    for (int64_t j = 0; j < grid_w; ++j) {
      const int64_t row = i * grid_w + j;
      int64_t col = 0;
      for (int di = 0; di < p; ++di) {
        for (int dj = 0; dj < p; ++dj) {
          for (int64_t ch = 0; ch < c; ++ch) {
            image.at(i * p + di, j * p + dj, ch) = rows.at(row, col++);
          }
        }
      }
    }
  }
  return image;
}

void InitBlockWeights(WeightSet& ws, const std::string& prefix,
                      const HiLoConfig& cfg, RngStream& rng) {
  const int64_t d = cfg.d_model;
  const int64_t hidden = static_cast<int64_t>(cfg.mlp_ratio) * d;

  Tensor ones({d});
  for (int64_t i = 0; i < d; ++i) ones.at(i) = 1.0;
  ws.tensors[prefix + ".ln1.scale"] = ones;
  ws.tensors[prefix + ".ln1.bias"] = Tensor({d});
  if (cfg.d_hi > 0) {
    for (const char* name : {".hi.wq", ".hi.wk", ".hi.wv", ".hi.wo"}) {
      ws.tensors[prefix + name] =
          UniformInitTensor({cfg.d_hi, cfg.d_hi}, cfg.d_hi, rng);
    }
  }
  if (cfg.d_lo > 0) {
    for (const char* name : {".lo.wq", ".lo.wk", ".lo.wv", ".lo.wo"}) {
      ws.tensors[prefix + name] =
          UniformInitTensor({cfg.d_lo, cfg.d_lo}, cfg.d_lo, rng);
    }
  }
  ws.tensors[prefix + ".ln2.scale"] = ones;
  ws.tensors[prefix + ".ln2.bias"] = Tensor({d});
  ws.tensors[prefix + ".mlp.w1"] =
      UniformInitTensor({d, hidden}, static_cast<int>(d), rng);
  ws.tensors[prefix + ".mlp.b1"] = Tensor({hidden});
  ws.tensors[prefix + ".mlp.w2"] =
      UniformInitTensor({hidden, d}, static_cast<int>(hidden), rng);
  ws.tensors[prefix + ".mlp.b2"] = Tensor({d});
}

struct StreamQuant {
  Tensor values;        // (n, d_fsq) scaled-domain representatives
  TokenIndices indices;
  Tensor normalized;    // (n, d_fsq) representatives scaled into [-1, 1]
};

StreamQuant QuantizeRows(const Tensor& pre, const QuantizerConfig& qcfg) {
  const int64_t n = pre.dim(0);
  const int64_t d = pre.dim(1);
  StreamQuant out;
  out.values = Tensor({n, d});
  out.normalized = Tensor({n, d});
  out.indices.n_tokens = static_cast<int>(n);
  out.indices.d = static_cast<int>(d);
  out.indices.values.reserve(static_cast<size_t>(n * d));
  for (int64_t t = 0; t < n; ++t) {
    const std::span<const double> row(pre.data() + t * d,
                                      static_cast<size_t>(d));
    const TokenCode code = FsqForward(row, qcfg);
    for (int64_t j = 0; j < d; ++j) {
      out.values.at(t, j) = code.scaled_values[j];
      out.normalized.at(t, j) = code.normalized_values[j];
      out.indices.values.push_back(code.indices[j]);
    }
  }
  return out;
}

struct StreamRequant {
  Tensor normalized;
  TokenIndices indices;
};

StreamRequant RequantizeRows(const Tensor& received,
                             const QuantizerConfig& qcfg) {
  const int64_t n = received.dim(0);
  const int64_t d = received.dim(1);
  StreamRequant out;
  out.normalized = Tensor({n, d});
  out.indices.n_tokens = static_cast<int>(n);
  out.indices.d = static_cast<int>(d);
  out.indices.values.reserve(static_cast<size_t>(n * d));
  for (int64_t t = 0; t < n; ++t) {
    const std::span<const double> row(received.data() + t * d,
                                      static_cast<size_t>(d));
    const TokenCode code = Requantize(row, qcfg);
    for (int64_t j = 0; j < d; ++j) {
      out.normalized.at(t, j) = code.normalized_values[j];
      out.indices.values.push_back(code.indices[j]);
    }
  }
  return out;
}

void CheckPipelineConfigs(const HiLoConfig& cfg, const QuantizerConfig& qcfg) {
  cfg.Validate();
  qcfg.Validate();
  if (cfg.d_hi == 0 || cfg.d_lo == 0) {
    throw std::invalid_argument(
        "hilo: encode/decode need both branches non-empty");
  }
  if (qcfg.num_dims() != cfg.d_fsq) {
    throw std::invalid_argument("hilo: quantizer dims disagree with d_fsq");
  }
}

// Token recovery rate over tokens whose sent indices are all interior.
void InteriorStats(const TokenIndices& sent, const TokenIndices& got,
                   const QuantizerConfig& qcfg, double* acc,
                   long long* n_interior) {
  long long interior = 0;
  long long correct = 0;
  for (int t = 0; t < sent.n_tokens; ++t) {
    bool is_interior = true;
    for (int j = 0; j < sent.d; ++j) {
      const int idx = sent.At(t, j);
      if (idx == 0 || idx == qcfg.levels[j] - 1) {
        is_interior = false;
        break;
      }
    }
    if (!is_interior) continue;
    ++interior;
    bool ok = true;
    for (int j = 0; j < sent.d; ++j) {
      if (sent.At(t, j) != got.At(t, j)) {
        ok = false;
        break;
      }
    }
    if (ok) ++correct;
  }
  *n_interior = interior;
  *acc = interior > 0 ? static_cast<double>(correct) / interior
                      : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void HiLoConfig::Validate() const {
  if (d_model < 1 || d_hi < 0 || d_lo < 0 || d_hi + d_lo != d_model) {
    throw std::invalid_argument("HiLoConfig: need d_hi + d_lo == d_model");
  }
  if (n_heads < 1 || (d_hi > 0 && d_hi % n_heads != 0) ||
      (d_lo > 0 && d_lo % n_heads != 0)) {
    throw std::invalid_argument("HiLoConfig: heads must divide branch dims");
  }
  if (pool_stride < 1 || window_size < 1 || n_blocks < 1 || patch_size < 1 ||
      d_fsq < 1 || mlp_ratio < 1 || in_channels < 1) {
    throw std::invalid_argument("HiLoConfig: size fields must be positive");
  }
  if (!(layernorm_eps > 0.0)) {
    throw std::invalid_argument("HiLoConfig: layernorm_eps must be positive");
  }
}

void SplitChannels(const Tensor& x, const HiLoConfig& cfg, Tensor* x_hi,
                   Tensor* x_lo) {
  CheckGrid(x, cfg.d_model, "SplitChannels");
  const int64_t h = x.dim(0);
  const int64_t w = x.dim(1);
  *x_hi = Tensor();
  *x_lo = Tensor();
  if (cfg.d_hi > 0) {
    Tensor hi({h, w, cfg.d_hi});
    for (int64_t i = 0; i < h; ++i) {
      for (int64_t j = 0; j < w; ++j) {
        for (int64_t c = 0; c < cfg.d_hi; ++c) hi.at(i, j, c) = x.at(i, j, c);
      }
    }
    *x_hi = std::move(hi);
  }
  if (cfg.d_lo > 0) {
    Tensor lo({h, w, cfg.d_lo});
    for (int64_t i = 0; i < h; ++i) {
      for (int64_t j = 0; j < w; ++j) {
        for (int64_t c = 0; c < cfg.d_lo; ++c) {
          lo.at(i, j, c) = x.at(i, j, cfg.d_hi + c);
        }
      }
    }
    *x_lo = std::move(lo);
  }
}

Tensor ConcatChannels(const Tensor& x_hi, const Tensor& x_lo,
                      const HiLoConfig& cfg) {
  if (IsEmpty(x_hi) && IsEmpty(x_lo)) {
    throw std::invalid_argument("ConcatChannels: both inputs empty");
  }
  if (!IsEmpty(x_hi)) CheckGrid(x_hi, cfg.d_hi, "ConcatChannels");
  if (!IsEmpty(x_lo)) CheckGrid(x_lo, cfg.d_lo, "ConcatChannels");
  if ((IsEmpty(x_hi) ? 0 : cfg.d_hi) + (IsEmpty(x_lo) ? 0 : cfg.d_lo) !=
      cfg.d_model) {
    throw std::invalid_argument("ConcatChannels: channels do not sum to d_model");
  }
  const Tensor& ref = IsEmpty(x_hi) ? x_lo : x_hi;
  if (!IsEmpty(x_hi) && !IsEmpty(x_lo) &&
      (x_hi.dim(0) != x_lo.dim(0) || x_hi.dim(1) != x_lo.dim(1))) {
    throw std::invalid_argument("ConcatChannels: spatial shapes disagree");
  }
  const int64_t h = ref.dim(0);
  const int64_t w = ref.dim(1);
  Tensor out({h, w, cfg.d_model});
  for (int64_t i = 0; i < h; ++i) {
    for (int64_t j = 0; j < w; ++j) {
      int64_t c = 0;
      if (!IsEmpty(x_hi)) {
        for (int64_t p = 0; p < cfg.d_hi; ++p) out.at(i, j, c++) = x_hi.at(i, j, p);
      }
      if (!IsEmpty(x_lo)) {
        for (int64_t p = 0; p < cfg.d_lo; ++p) out.at(i, j, c++) = x_lo.at(i, j, p);
      }
    }
  }
  return out;
}

Tensor HiBranch(const Tensor& x_hi, const WeightSet& ws,
                const std::string& prefix, const HiLoConfig& cfg,
                AttentionProbe* probe) {
  CheckGrid(x_hi, cfg.d_hi, "HiBranch");
  const int64_t h = x_hi.dim(0);
  const int64_t w = x_hi.dim(1);
  const int win = cfg.window_size;
  if (h % win != 0 || w % win != 0) {
    throw std::invalid_argument("HiBranch: window must divide the grid");
  }
  const Tensor& wq = ws.Get(prefix + ".wq");
  const Tensor& wk = ws.Get(prefix + ".wk");
  const Tensor& wv = ws.Get(prefix + ".wv");
  const Tensor& wo = ws.Get(prefix + ".wo");

  const Tensor windows = WindowPartition(x_hi, win);
  const int64_t n_win = windows.dim(0);
  const int64_t tokens = windows.dim(1);
  Tensor out_windows({n_win, tokens, cfg.d_hi});
  for (int64_t win_idx = 0; win_idx < n_win; ++win_idx) {
    Tensor tile({tokens, cfg.d_hi});
    for (int64_t t = 0; t < tokens; ++t) {
      for (int64_t c = 0; c < cfg.d_hi; ++c) {
        tile.at(t, c) = windows.at(win_idx, t, c);
      }
    }
    const Tensor attended =
        MultiHeadAttention(tile, tile, wq, wk, wv, wo, cfg.n_heads, probe);
    for (int64_t t = 0; t < tokens; ++t) {
      for (int64_t c = 0; c < cfg.d_hi; ++c) {
        out_windows.at(win_idx, t, c) = attended.at(t, c);
      }
    }
  }
  return WindowMerge(out_windows, static_cast<int>(h), static_cast<int>(w),
                     win);
}

Tensor LoBranch(const Tensor& x_lo, const WeightSet& ws,
                const std::string& prefix, const HiLoConfig& cfg,
                AttentionProbe* probe) {
  CheckGrid(x_lo, cfg.d_lo, "LoBranch");
  const int64_t h = x_lo.dim(0);
  const int64_t w = x_lo.dim(1);
  if (h % cfg.pool_stride != 0 || w % cfg.pool_stride != 0) {
    throw std::invalid_argument("LoBranch: pool_stride must divide the grid");
  }
  const Tensor pooled = AvgPool2d(x_lo, cfg.pool_stride);
  const Tensor queries = x_lo.Reshaped({h * w, cfg.d_lo});
  const Tensor keys =
      pooled.Reshaped({pooled.dim(0) * pooled.dim(1), cfg.d_lo});
  const Tensor attended = MultiHeadAttention(
      queries, keys, ws.Get(prefix + ".wq"), ws.Get(prefix + ".wk"),
      ws.Get(prefix + ".wv"), ws.Get(prefix + ".wo"), cfg.n_heads, probe);
  return attended.Reshaped({h, w, cfg.d_lo});
}

Tensor HiLoBlock(const Tensor& x, const WeightSet& ws,
                 const std::string& prefix, const HiLoConfig& cfg,
                 AttentionProbe* probe_hi, AttentionProbe* probe_lo) {
  cfg.Validate();
  CheckGrid(x, cfg.d_model, "HiLoBlock");
  const int64_t h = x.dim(0);
  const int64_t w = x.dim(1);
  const int64_t n = h * w;

  const Tensor normed =
      LayerNorm(x.Reshaped({n, cfg.d_model}), ws.Get(prefix + ".ln1.scale"),
                ws.Get(prefix + ".ln1.bias"), cfg.layernorm_eps)
          .Reshaped({h, w, cfg.d_model});
  Tensor u_hi, u_lo;
  SplitChannels(normed, cfg, &u_hi, &u_lo);
  Tensor a_hi, a_lo;
  if (cfg.d_hi > 0) {
    a_hi = HiBranch(u_hi, ws, prefix + ".hi", cfg, probe_hi);
  }
  if (cfg.d_lo > 0) {
    a_lo = LoBranch(u_lo, ws, prefix + ".lo", cfg, probe_lo);
  }
  const Tensor y = AddTensors(x, ConcatChannels(a_hi, a_lo, cfg));

  const Tensor normed2 =
      LayerNorm(y.Reshaped({n, cfg.d_model}), ws.Get(prefix + ".ln2.scale"),
                ws.Get(prefix + ".ln2.bias"), cfg.layernorm_eps);
  const Tensor hidden =
      Gelu(LinearRows(normed2, ws.Get(prefix + ".mlp.w1"),
                      ws.Get(prefix + ".mlp.b1")));
  const Tensor mlp_out = LinearRows(hidden, ws.Get(prefix + ".mlp.w2"),
                                    ws.Get(prefix + ".mlp.b2"));
  return AddTensors(y, mlp_out.Reshaped({h, w, cfg.d_model}));
}

WeightSet InitWeights(const HiLoConfig& cfg, uint64_t seed) {
  cfg.Validate();
  WeightSet ws;
  ws.init_seed = seed;
  RngStream rng(seed);

  const int64_t patch_dim = static_cast<int64_t>(cfg.patch_size) *
                            cfg.patch_size * cfg.in_channels;
  ws.tensors["enc.patch.w"] = UniformInitTensor(
      {patch_dim, cfg.d_model}, static_cast<int>(patch_dim), rng);
  ws.tensors["enc.patch.b"] = Tensor({static_cast<int64_t>(cfg.d_model)});
  for (int k = 0; k < cfg.n_blocks; ++k) {
    InitBlockWeights(ws, "enc.block" + std::to_string(k), cfg, rng);
  }
  if (cfg.d_hi > 0) {
    ws.tensors["enc.head_hi.w"] =
        UniformInitTensor({cfg.d_hi, cfg.d_fsq}, cfg.d_hi, rng);
    ws.tensors["enc.head_hi.b"] = Tensor({static_cast<int64_t>(cfg.d_fsq)});
  }
  if (cfg.d_lo > 0) {
    ws.tensors["enc.head_lo.w"] =
        UniformInitTensor({cfg.d_lo, cfg.d_fsq}, cfg.d_lo, rng);
    ws.tensors["enc.head_lo.b"] = Tensor({static_cast<int64_t>(cfg.d_fsq)});
  }
  if (cfg.d_hi > 0) {
    ws.tensors["dec.in_hi.w"] =
        UniformInitTensor({cfg.d_fsq, cfg.d_hi}, cfg.d_fsq, rng);
    ws.tensors["dec.in_hi.b"] = Tensor({static_cast<int64_t>(cfg.d_hi)});
  }
  if (cfg.d_lo > 0) {
    ws.tensors["dec.in_lo.w"] =
        UniformInitTensor({cfg.d_fsq, cfg.d_lo}, cfg.d_fsq, rng);
    ws.tensors["dec.in_lo.b"] = Tensor({static_cast<int64_t>(cfg.d_lo)});
  }
  for (int k = 0; k < cfg.n_blocks; ++k) {
    InitBlockWeights(ws, "dec.block" + std::to_string(k), cfg, rng);
  }
  ws.tensors["dec.unpatch.w"] = UniformInitTensor(
      {cfg.d_model, patch_dim}, cfg.d_model, rng);
  ws.tensors["dec.unpatch.b"] = Tensor({patch_dim});
  return ws;
}

void SaveWeightSet(const WeightSet& ws, const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["init_seed"] = ws.init_seed;
  json tensors = json::object();
  for (const auto& [name, tensor] : ws.tensors) {
    std::string file = name;
    for (char& c : file) {
      if (c == '.') c = '_';
    }
    file += ".shlt";
    WriteTensorFile(tensor, (fs::path(dir) / file).string());
    tensors[name] = file;
  }
  manifest["tensors"] = tensors;
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) {
    throw std::runtime_error("SaveWeightSet: cannot write manifest");
  }
  out << manifest.dump(2) << "\n";
}

WeightSet LoadWeightSet(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) {
    throw std::runtime_error("LoadWeightSet: cannot open manifest");
  }
  json manifest = json::parse(in);
  WeightSet ws;
  ws.init_seed = manifest.at("init_seed").get<uint64_t>();
  for (const auto& [name, file] : manifest.at("tensors").items()) {
    ws.tensors[name] =
        ReadTensorFile((fs::path(dir) / file.get<std::string>()).string());
  }
  return ws;
}

EncodeResult Encode(const Tensor& image, const WeightSet& ws,
                    const HiLoConfig& cfg, const QuantizerConfig& qcfg) {
  CheckPipelineConfigs(cfg, qcfg);
  CheckGrid(image, cfg.in_channels, "Encode");
  const int64_t h_img = image.dim(0);
  const int64_t w_img = image.dim(1);
  if (h_img % cfg.patch_size != 0 || w_img % cfg.patch_size != 0) {
    throw std::invalid_argument("Encode: patch_size must divide image dims");
  }
  const int64_t grid_h = h_img / cfg.patch_size;
  const int64_t grid_w = w_img / cfg.patch_size;

  const Tensor patches = ImageToPatchRows(image, cfg.patch_size);
  Tensor grid =
      LinearRows(patches, ws.Get("enc.patch.w"), ws.Get("enc.patch.b"))
          .Reshaped({grid_h, grid_w, cfg.d_model});
  for (int k = 0; k < cfg.n_blocks; ++k) {
    grid = HiLoBlock(grid, ws, "enc.block" + std::to_string(k), cfg);
  }

  Tensor feat_hi, feat_lo;
  SplitChannels(grid, cfg, &feat_hi, &feat_lo);
  const int64_t n = grid_h * grid_w;
  const Tensor pre_hi =
      LinearRows(feat_hi.Reshaped({n, cfg.d_hi}), ws.Get("enc.head_hi.w"),
                 ws.Get("enc.head_hi.b"));
  const Tensor pre_lo =
      LinearRows(feat_lo.Reshaped({n, cfg.d_lo}), ws.Get("enc.head_lo.w"),
                 ws.Get("enc.head_lo.b"));

  StreamQuant hi = QuantizeRows(pre_hi, qcfg);
  StreamQuant lo = QuantizeRows(pre_lo, qcfg);
  EncodeResult result;
  result.values.hi = std::move(hi.values);
  result.values.lo = std::move(lo.values);
  result.indices.hi = std::move(hi.indices);
  result.indices.lo = std::move(lo.indices);
  return result;
}

DecodeResult Decode(const DualStream& received, int image_h, int image_w,
                    const WeightSet& ws, const HiLoConfig& cfg,
                    const QuantizerConfig& qcfg) {
  CheckPipelineConfigs(cfg, qcfg);
  if (image_h < 1 || image_w < 1 || image_h % cfg.patch_size != 0 ||
      image_w % cfg.patch_size != 0) {
    throw std::invalid_argument("Decode: patch_size must divide image dims");
  }
  const int64_t grid_h = image_h / cfg.patch_size;
  const int64_t grid_w = image_w / cfg.patch_size;
  const int64_t n = grid_h * grid_w;
  const auto check_stream = [&](const Tensor& t, const char* name) {
    if (t.rank() != 2 || t.dim(0) != n || t.dim(1) != cfg.d_fsq) {
      throw std::invalid_argument(std::string("Decode: bad stream shape for ") +
                                  name);
    }
  };
  check_stream(received.hi, "hi");
  check_stream(received.lo, "lo");

  StreamRequant hi = RequantizeRows(received.hi, qcfg);
  StreamRequant lo = RequantizeRows(received.lo, qcfg);
  const Tensor feat_hi = LinearRows(hi.normalized, ws.Get("dec.in_hi.w"),
                                    ws.Get("dec.in_hi.b"));
  const Tensor feat_lo = LinearRows(lo.normalized, ws.Get("dec.in_lo.w"),
                                    ws.Get("dec.in_lo.b"));
  Tensor grid = ConcatChannels(feat_hi.Reshaped({grid_h, grid_w, cfg.d_hi}),
                               feat_lo.Reshaped({grid_h, grid_w, cfg.d_lo}),
                               cfg);
  for (int k = 0; k < cfg.n_blocks; ++k) {
    grid = HiLoBlock(grid, ws, "dec.block" + std::to_string(k), cfg);
  }
  const Tensor rows =
      LinearRows(grid.Reshaped({n, cfg.d_model}), ws.Get("dec.unpatch.w"),
                 ws.Get("dec.unpatch.b"));

  DecodeResult result;
  result.image = PatchRowsToImage(rows, image_h, image_w, cfg.patch_size,
                                  cfg.in_channels);
  result.recovered.hi = std::move(hi.indices);
  result.recovered.lo = std::move(lo.indices);
  return result;
}

PipelineResult RunPipeline(const Tensor& image, const WeightSet& ws,
                           const HiLoConfig& cfg, const QuantizerConfig& qcfg,
                           const ChannelConfig& channel_hi,
                           const ChannelConfig& channel_lo) {
  PipelineResult result;
  result.encoded = Encode(image, ws, cfg, qcfg);
  const int64_t n = result.encoded.values.hi.dim(0);

  const TransmitResult tx_hi =
      Transmit(result.encoded.values.hi.flat(), channel_hi);
  const TransmitResult tx_lo =
      Transmit(result.encoded.values.lo.flat(), channel_lo);
  DualStream received;
  received.hi = Tensor::FromData({n, cfg.d_fsq}, tx_hi.output);
  received.lo = Tensor::FromData({n, cfg.d_fsq}, tx_lo.output);

  DecodeResult decoded =
      Decode(received, static_cast<int>(image.dim(0)),
             static_cast<int>(image.dim(1)), ws, cfg, qcfg);
  result.reconstruction = std::move(decoded.image);
  result.recovered = std::move(decoded.recovered);

  PipelineStats& stats = result.stats;
  stats.n_tokens = static_cast<int>(n);
  stats.sigma_hi = tx_hi.sigma;
  stats.sigma_lo = tx_lo.sigma;
  stats.measured_snr_hi_db = tx_hi.MeasuredSnrDb();
  stats.measured_snr_lo_db = tx_lo.MeasuredSnrDb();
  const SymbolAccuracy acc =
      ComputeSymbolAccuracy(result.encoded.indices, result.recovered);
  stats.symbol_acc_hi = acc.hi;
  stats.symbol_acc_lo = acc.lo;
  InteriorStats(result.encoded.indices.hi, result.recovered.hi, qcfg,
                &stats.interior_acc_hi, &stats.n_interior_hi);
  InteriorStats(result.encoded.indices.lo, result.recovered.lo, qcfg,
                &stats.interior_acc_lo, &stats.n_interior_lo);
  stats.theory_acc_hi =
      std::pow(PCorrectSingle(qcfg.alpha, tx_hi.sigma), cfg.d_fsq);
  stats.theory_acc_lo =
      std::pow(PCorrectSingle(qcfg.alpha, tx_lo.sigma), cfg.d_fsq);
  return result;
}

}  // namespace sehilo
