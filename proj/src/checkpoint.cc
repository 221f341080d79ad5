// udac/checkpoint.cc

// Copyright 2026  UDAC Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "udac/checkpoint.h"

#include <cstring>
#include <fstream>

#include "udac/binio.h"
#include "udac/error.h"

namespace udac {

namespace {

void write_widths(BinWriter &w, const std::vector<int64_t> &v) {
  w.write_u32(static_cast<uint32_t>(v.size()));
  for (int64_t x : v) w.write_i64(x);
}

std::vector<int64_t> read_widths(BinReader &r) {
  const uint32_t n = r.read_u32();
  if (n > 4096) r.fail("implausible width-vector length");
  std::vector<int64_t> v(n);
  for (uint32_t i = 0; i < n; i++) v[i] = r.read_i64();
  return v;
}

void write_config(BinWriter &w, const ArchConfig &cfg) {
  w.write_u32(static_cast<uint32_t>(cfg.variant));
  w.write_i64(cfg.input_dim);
  w.write_i64(cfg.senone_count);
  w.write_i64(cfg.domain_count);
  write_widths(w, cfg.feat_hidden);
  write_widths(w, cfg.senone_head_hidden);
  write_widths(w, cfg.domain_head_hidden);
  write_widths(w, cfg.private_hidden);
  write_widths(w, cfg.decoder_hidden);
  w.write_f64(cfg.bn_eps);
  w.write_f64(cfg.bn_momentum);
}

ArchConfig read_config(BinReader &r) {
  ArchConfig cfg;
  const uint32_t variant = r.read_u32();
  if (variant > 3) r.fail("bad variant tag " + std::to_string(variant));
  cfg.variant = static_cast<Variant>(variant);
  cfg.input_dim = r.read_i64();
  cfg.senone_count = r.read_i64();
  cfg.domain_count = r.read_i64();
  cfg.feat_hidden = read_widths(r);
  cfg.senone_head_hidden = read_widths(r);
  cfg.domain_head_hidden = read_widths(r);
  cfg.private_hidden = read_widths(r);
  cfg.decoder_hidden = read_widths(r);
  cfg.bn_eps = r.read_f64();
  cfg.bn_momentum = r.read_f64();
  return cfg;
}

void write_stack(BinWriter &w, const LayerStack &stack) {
  w.write_string(stack.name());
  w.write_u32(static_cast<uint32_t>(stack.layer_count()));
  for (size_t i = 0; i < stack.layer_count(); i++) {
    auto &layer = const_cast<LayerStack &>(stack).layer(i);
    w.write_u32(static_cast<uint32_t>(layer.kind()));
    switch (layer.kind()) {
      case LayerKind::kLinear: {
        auto &lin = static_cast<LinearLayer &>(layer);
        w.write_i64(lin.input_dim());
        w.write_i64(lin.output_dim());
        w.write_f64v(lin.weight().data());
        w.write_f64v(lin.bias().data());
        break;
      }
      case LayerKind::kBatchNorm: {
        auto &bn = static_cast<BatchNormLayer &>(layer);
        w.write_i64(bn.input_dim());
        w.write_f64v((*bn.params()[0]).data());
        w.write_f64v((*bn.params()[1]).data());
        w.write_f64v(bn.running_mean().data());
        w.write_f64v(bn.running_var().data());
        break;
      }
      case LayerKind::kRelu:
      case LayerKind::kLogSoftmax:
      case LayerKind::kGrl:
        w.write_i64(layer.input_dim());
        break;
    }
  }
}

// Reads one stack; when shapes_only, parameters are skipped over but the
// structural summary is still produced.
StackShape read_stack(BinReader &r, LayerStack *stack,
                      const ArchConfig &cfg) {
  StackShape shape;
  shape.name = r.read_string(256);
  if (stack != nullptr) stack->set_name(shape.name);
  const uint32_t layer_count = r.read_u32();
  if (layer_count > 4096) r.fail("implausible layer count");
  for (uint32_t i = 0; i < layer_count; i++) {
    const uint32_t kind_tag = r.read_u32();
    if (kind_tag > 4) r.fail("bad layer kind tag " + std::to_string(kind_tag));
    const auto kind = static_cast<LayerKind>(kind_tag);
    shape.kinds.push_back(kind);
    switch (kind) {
      case LayerKind::kLinear: {
        const int64_t n_in = r.read_i64();
        const int64_t n_out = r.read_i64();
        if (n_in < 1 || n_out < 1) r.fail("bad linear dims");
        auto lin = std::make_unique<LinearLayer>(n_in, n_out);
        r.read_f64v(&lin->weight().data(), static_cast<size_t>(n_in * n_out));
        r.read_f64v(&lin->bias().data(), static_cast<size_t>(n_out));
        shape.in_dims.push_back(n_in);
        shape.out_dims.push_back(n_out);
        if (stack != nullptr) stack->append(std::move(lin));
        break;
      }
      case LayerKind::kBatchNorm: {
        const int64_t n = r.read_i64();
        if (n < 1) r.fail("bad batch-norm dim");
        auto bn = std::make_unique<BatchNormLayer>(n, cfg.bn_eps,
                                                   cfg.bn_momentum);
        r.read_f64v(&(*bn->params()[0]).data(), static_cast<size_t>(n));
        r.read_f64v(&(*bn->params()[1]).data(), static_cast<size_t>(n));
        r.read_f64v(&bn->running_mean().data(), static_cast<size_t>(n));
        r.read_f64v(&bn->running_var().data(), static_cast<size_t>(n));
        for (double v : bn->running_var().data()) {
          if (!(v > 0.0)) r.fail("batch-norm running variance must be > 0");
        }
        shape.in_dims.push_back(n);
        shape.out_dims.push_back(n);
        if (stack != nullptr) stack->append(std::move(bn));
        break;
      }
      case LayerKind::kRelu: {
        const int64_t n = r.read_i64();
        shape.in_dims.push_back(n);
        shape.out_dims.push_back(n);
        if (stack != nullptr) stack->append(std::make_unique<ReluLayer>(n));
        break;
      }
      case LayerKind::kLogSoftmax: {
        const int64_t n = r.read_i64();
        shape.in_dims.push_back(n);
        shape.out_dims.push_back(n);
        if (stack != nullptr) {
          stack->append(std::make_unique<LogSoftmaxLayer>(n));
        }
        break;
      }
      case LayerKind::kGrl: {
        const int64_t n = r.read_i64();
        shape.in_dims.push_back(n);
        shape.out_dims.push_back(n);
        if (stack != nullptr) stack->append(std::make_unique<GrlLayer>(n));
        break;
      }
    }
  }
  return shape;
}

}  // namespace

void save_checkpoint(const ModelBundle &model, std::ostream &os) {
  BinWriter w(os);
  w.write_bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.write_u32(kCheckpointVersion);
  write_config(w, model.config());
  const auto stacks = model.stacks();
  w.write_u32(static_cast<uint32_t>(stacks.size()));
  for (const LayerStack *s : stacks) write_stack(w, *s);
  w.write_crc_trailer();
}

void save_checkpoint(const ModelBundle &model, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  save_checkpoint(model, os);
  os.flush();
  if (!os) throw IoError("write to " + path + " failed");
}

namespace {

ModelBundle load_impl(BinReader &r, CheckpointMeta *meta_out,
                      bool want_model) {
  char magic[4];
  r.read_bytes(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    r.fail("bad magic, not a checkpoint file");
  }
  const uint32_t version = r.read_u32();
  if (version != kCheckpointVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(version));
  }
  const ArchConfig cfg = read_config(r);
  cfg.validate();

  ModelBundle model;
  model.set_config(cfg);
  const uint32_t stack_count = r.read_u32();

  // Map serialized stack names onto bundle members.
  auto member = [&model](const std::string &name) -> LayerStack * {
    if (name == "feature_extractor") return &model.feature_extractor;
    if (name == "shared") return &model.shared;
    if (name == "private_src") return &model.private_src;
    if (name == "private_tgt") return &model.private_tgt;
    if (name == "decoder") return &model.decoder;
    if (name == "senone_head") return &model.senone_head;
    if (name == "domain_head") return &model.domain_head;
    if (name == "grl") return &model.grl;
    return nullptr;
  };

  if (meta_out != nullptr) meta_out->config = cfg;
  for (uint32_t i = 0; i < stack_count; i++) {
    LayerStack scratch;
    StackShape shape = read_stack(r, want_model ? &scratch : nullptr, cfg);
    if (want_model) {
      LayerStack *dst = member(shape.name);
      if (dst == nullptr) r.fail("unknown stack '" + shape.name + "'");
      *dst = std::move(scratch);
    }
    if (meta_out != nullptr) meta_out->stacks.push_back(std::move(shape));
  }
  r.check_crc_trailer();

  if (want_model) {
    // Cross-check that the variant's expected stacks all arrived.
    for (const LayerStack *s : model.stacks()) {
      if (s->empty()) {
        r.fail("checkpoint is missing a stack required by variant " +
               variant_name(cfg.variant));
      }
    }
  }
  return model;
}

}  // namespace

ModelBundle load_checkpoint(std::istream &is, const std::string &source) {
  BinReader r(is, source);
  return load_impl(r, nullptr, true);
}

ModelBundle load_checkpoint(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return load_checkpoint(is, path);
}

CheckpointMeta read_checkpoint_meta(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  BinReader r(is, path);
  CheckpointMeta meta;
  load_impl(r, &meta, false);
  return meta;
}

}  // namespace udac
