// udac/arch.cc

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

#include "udac/arch.h"

#include <cmath>

#include "udac/error.h"

namespace udac {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kDnn: return "DNN";
    case Variant::kMt: return "MT";
    case Variant::kGrl: return "GRL";
    case Variant::kDsn: return "DSN";
  }
  return "?";
}

Variant variant_from_name(const std::string &name) {
  if (name == "DNN" || name == "dnn") return Variant::kDnn;
  if (name == "MT" || name == "mt") return Variant::kMt;
  if (name == "GRL" || name == "grl") return Variant::kGrl;
  if (name == "DSN" || name == "dsn") return Variant::kDsn;
  throw ConfigError("unknown model variant '" + name + "'");
}

void ArchConfig::validate() const {
  auto check_widths = [](const std::vector<int64_t> &w, const char *what) {
    for (int64_t v : w) {
      if (v < 1) {
        throw ConfigError(std::string(what) + ": width " + std::to_string(v) +
                          " < 1");
      }
    }
  };
  if (input_dim < 1) throw ConfigError("input_dim < 1");
  if (senone_count < 2) throw ConfigError("senone_count < 2");
  if (domain_count != 2) {
    throw ConfigError("domain_count must be 2, got " +
                      std::to_string(domain_count));
  }
  if (feat_hidden.empty()) throw ConfigError("feat_hidden must be nonempty");
  check_widths(feat_hidden, "feat_hidden");
  check_widths(senone_head_hidden, "senone_head_hidden");
  check_widths(domain_head_hidden, "domain_head_hidden");
  check_widths(private_hidden, "private_hidden");
  check_widths(decoder_hidden, "decoder_hidden");
}

namespace {

// Hidden block: Linear -> BatchNorm -> ReLU per width.
void append_hidden(LayerStack &stack, int64_t in, const std::vector<int64_t> &widths,
                   const ArchConfig &cfg, Rng &rng) {
  int64_t prev = in;
  for (int64_t w : widths) {
    stack.append(std::make_unique<LinearLayer>(prev, w, rng));
    stack.append(std::make_unique<BatchNormLayer>(w, cfg.bn_eps, cfg.bn_momentum));
    stack.append(std::make_unique<ReluLayer>(w));
    prev = w;
  }
}

// Classifier output: Linear (std sqrt(1/n_in)) -> LogSoftmax.
void append_classifier_out(LayerStack &stack, int64_t in, int64_t classes,
                           Rng &rng) {
  stack.append(std::make_unique<LinearLayer>(
      in, classes, rng, std::sqrt(1.0 / static_cast<double>(in))));
  stack.append(std::make_unique<LogSoftmaxLayer>(classes));
}

LayerStack make_classifier(const std::string &name, int64_t in,
                           const std::vector<int64_t> &hidden, int64_t classes,
                           const ArchConfig &cfg, Rng &rng) {
  LayerStack s(name);
  append_hidden(s, in, hidden, cfg, rng);
  append_classifier_out(s, hidden.empty() ? in : hidden.back(), classes, rng);
  return s;
}

LayerStack make_encoder(const std::string &name, int64_t in,
                        const std::vector<int64_t> &hidden,
                        const ArchConfig &cfg, Rng &rng) {
  LayerStack s(name);
  append_hidden(s, in, hidden, cfg, rng);
  return s;
}

}  // namespace

ModelBundle ModelBundle::build(const ArchConfig &cfg, uint64_t seed) {
  cfg.validate();
  ModelBundle m;
  m.cfg_ = cfg;
  Rng rng(seed);
  const int64_t code = cfg.code_dim();
  switch (cfg.variant) {
    case Variant::kDnn:
    case Variant::kMt:
    case Variant::kGrl: {
      m.feature_extractor = make_encoder("feature_extractor", cfg.input_dim,
                                         cfg.feat_hidden, cfg, rng);
      m.senone_head = make_classifier("senone_head", code,
                                      cfg.senone_head_hidden,
                                      cfg.senone_count, cfg, rng);
      if (cfg.variant != Variant::kDnn) {
        m.domain_head = make_classifier("domain_head", code,
                                        cfg.domain_head_hidden,
                                        cfg.domain_count, cfg, rng);
      }
      if (cfg.variant == Variant::kGrl) {
        m.grl = LayerStack("grl");
        m.grl.append(std::make_unique<GrlLayer>(code));
      }
      break;
    }
    case Variant::kDsn: {
      // Private encoders end in a plain linear projection to the shared
      // code width so the decoder can consume the sum of both codes.  The
      // projection starts small: private codes grow only as the
      // reconstruction demands, which keeps the early orthogonality
      // penalty from deforming the shared representation.
      auto make_private = [&](const std::string &name) {
        LayerStack s(name);
        append_hidden(s, cfg.input_dim, cfg.private_hidden, cfg, rng);
        const int64_t in =
            cfg.private_hidden.empty() ? cfg.input_dim : cfg.private_hidden.back();
        s.append(std::make_unique<LinearLayer>(
            in, code, rng, 0.25 * std::sqrt(1.0 / static_cast<double>(in))));
        return s;
      };
      m.private_src = make_private("private_src");
      m.private_tgt = make_private("private_tgt");
      m.shared = make_encoder("shared", cfg.input_dim, cfg.feat_hidden, cfg, rng);
      // Decoder: hidden blocks then a plain linear output back to the
      // input space (targets span negative values, so no ReLU).
      m.decoder = LayerStack("decoder");
      append_hidden(m.decoder, code, cfg.decoder_hidden, cfg, rng);
      {
        const int64_t in =
            cfg.decoder_hidden.empty() ? code : cfg.decoder_hidden.back();
        m.decoder.append(std::make_unique<LinearLayer>(
            in, cfg.input_dim, rng, std::sqrt(1.0 / static_cast<double>(in))));
      }
      m.senone_head = make_classifier("senone_head", code,
                                      cfg.senone_head_hidden,
                                      cfg.senone_count, cfg, rng);
      m.domain_head = make_classifier("domain_head", code,
                                      cfg.domain_head_hidden,
                                      cfg.domain_count, cfg, rng);
      m.grl = LayerStack("grl");
      m.grl.append(std::make_unique<GrlLayer>(code));
      break;
    }
  }
  return m;
}

ForwardOutputs ModelBundle::forward(const Tensor &src, const Tensor &tgt,
                                    double alpha, Mode mode) {
  const int64_t bs = src.rows(), bt = tgt.rows();
  if (bs + bt == 0) throw Error("forward: empty batch");
  if (!src.empty() && src.cols() != cfg_.input_dim) {
    throw ShapeError("forward: source dim " + std::to_string(src.cols()) +
                     " != input_dim " + std::to_string(cfg_.input_dim));
  }
  if (!tgt.empty() && tgt.cols() != cfg_.input_dim) {
    throw ShapeError("forward: target dim " + std::to_string(tgt.cols()) +
                     " != input_dim " + std::to_string(cfg_.input_dim));
  }
  if (cfg_.variant == Variant::kDnn && bt > 0) {
    throw Error("forward: the DNN variant takes no target frames");
  }
  fwd_src_rows_ = bs;
  fwd_tgt_rows_ = bt;
  if (!grl.empty()) set_grl_alpha(alpha);

  ForwardOutputs out;
  if (cfg_.variant == Variant::kDsn) {
    const Tensor x = vstack(src, tgt);
    const Tensor f_c = shared.forward(x, mode);
    out.shared_src = slice_rows(f_c, 0, bs);
    out.shared_tgt = slice_rows(f_c, bs, bs + bt);
    if (bs > 0) out.private_src_code = private_src.forward(src, mode);
    if (bt > 0) out.private_tgt_code = private_tgt.forward(tgt, mode);
    if (bs > 0) out.senone_logprobs = senone_head.forward(out.shared_src, mode);
    out.domain_logprobs = domain_head.forward(grl.forward(f_c, mode), mode);
    Tensor code_src = out.shared_src;
    if (bs > 0) add_inplace(code_src, out.private_src_code);
    Tensor code_tgt = out.shared_tgt;
    if (bt > 0) add_inplace(code_tgt, out.private_tgt_code);
    const Tensor recon = decoder.forward(vstack(code_src, code_tgt), mode);
    out.recon_src = slice_rows(recon, 0, bs);
    out.recon_tgt = slice_rows(recon, bs, bs + bt);
    return out;
  }

  const Tensor x = vstack(src, tgt);
  const Tensor f = feature_extractor.forward(x, mode);
  if (bs > 0) {
    out.senone_logprobs = senone_head.forward(slice_rows(f, 0, bs), mode);
  }
  if (cfg_.variant == Variant::kMt) {
    out.domain_logprobs = domain_head.forward(f, mode);
  } else if (cfg_.variant == Variant::kGrl) {
    out.domain_logprobs = domain_head.forward(grl.forward(f, mode), mode);
  }
  return out;
}

void ModelBundle::backward(const OutputGrads &grads) {
  const int64_t bs = fwd_src_rows_, bt = fwd_tgt_rows_;
  const int64_t b = bs + bt;

  auto add_rows = [](Tensor &acc, const Tensor &part, int64_t row0) {
    for (int64_t i = 0; i < part.rows(); i++) {
      double *arow = acc.row(row0 + i);
      const double *prow = part.row(i);
      for (int64_t j = 0; j < part.cols(); j++) arow[j] += prow[j];
    }
  };

  if (cfg_.variant == Variant::kDsn) {
    const int64_t code = cfg_.code_dim();
    Tensor d_fc(b, code);
    Tensor d_code_src, d_code_tgt;
    if (!grads.d_recon_src.empty() || !grads.d_recon_tgt.empty()) {
      const Tensor d_code =
          decoder.backward(vstack(grads.d_recon_src, grads.d_recon_tgt));
      d_code_src = slice_rows(d_code, 0, bs);
      d_code_tgt = slice_rows(d_code, bs, b);
    }
    if (!grads.d_senone_logprobs.empty()) {
      add_rows(d_fc, senone_head.backward(grads.d_senone_logprobs), 0);
    }
    if (!grads.d_domain_logprobs.empty()) {
      add_inplace(d_fc, grl.backward(domain_head.backward(grads.d_domain_logprobs)));
    }
    if (!d_code_src.empty()) add_rows(d_fc, d_code_src, 0);
    if (!d_code_tgt.empty()) add_rows(d_fc, d_code_tgt, bs);
    if (!grads.d_shared_src.empty()) add_rows(d_fc, grads.d_shared_src, 0);
    if (!grads.d_shared_tgt.empty()) add_rows(d_fc, grads.d_shared_tgt, bs);
    if (bs > 0) {
      Tensor d_fp = d_code_src.empty() ? Tensor(bs, code) : d_code_src;
      if (!grads.d_private_src_code.empty()) {
        add_inplace(d_fp, grads.d_private_src_code);
      }
      private_src.backward(d_fp);
    }
    if (bt > 0) {
      Tensor d_fp = d_code_tgt.empty() ? Tensor(bt, code) : d_code_tgt;
      if (!grads.d_private_tgt_code.empty()) {
        add_inplace(d_fp, grads.d_private_tgt_code);
      }
      private_tgt.backward(d_fp);
    }
    shared.backward(d_fc);
    return;
  }

  Tensor d_f(b, cfg_.code_dim());
  if (!grads.d_senone_logprobs.empty()) {
    add_rows(d_f, senone_head.backward(grads.d_senone_logprobs), 0);
  }
  if (!grads.d_domain_logprobs.empty()) {
    Tensor d = domain_head.backward(grads.d_domain_logprobs);
    if (cfg_.variant == Variant::kGrl) d = grl.backward(d);
    add_inplace(d_f, d);
  }
  feature_extractor.backward(d_f);
}

Tensor ModelBundle::infer_senone_logprobs(const Tensor &x) {
  LayerStack &enc =
      cfg_.variant == Variant::kDsn ? shared : feature_extractor;
  const Tensor f = enc.forward(x, Mode::kInfer);
  const Tensor out = senone_head.forward(f, Mode::kInfer);
  enc.invalidate_forward();
  senone_head.invalidate_forward();
  return out;
}

Tensor ModelBundle::infer_domain_logprobs(const Tensor &x) {
  if (!cfg_.has_domain_head()) {
    throw Error("variant " + variant_name(cfg_.variant) +
                " has no domain head");
  }
  LayerStack &enc =
      cfg_.variant == Variant::kDsn ? shared : feature_extractor;
  const Tensor f = enc.forward(x, Mode::kInfer);
  const Tensor out = domain_head.forward(f, Mode::kInfer);
  enc.invalidate_forward();
  domain_head.invalidate_forward();
  return out;
}

Tensor ModelBundle::infer_embeddings(const Tensor &x) {
  LayerStack &enc =
      cfg_.variant == Variant::kDsn ? shared : feature_extractor;
  const Tensor f = enc.forward(x, Mode::kInfer);
  enc.invalidate_forward();
  return f;
}

void ModelBundle::zero_grads() {
  for (LayerStack *s : stacks()) s->zero_grads();
}

void ModelBundle::set_grl_alpha(double alpha) {
  if (grl.empty()) return;
  static_cast<GrlLayer &>(grl.layer(0)).set_alpha(alpha);
}

int64_t ModelBundle::param_count() const {
  int64_t count = 0;
  for (const LayerStack *s : stacks()) count += s->param_count();
  return count;
}

std::vector<LayerStack::ParamRef> ModelBundle::param_refs() {
  std::vector<LayerStack::ParamRef> refs;
  for (LayerStack *s : stacks()) {
    auto sr = s->param_refs();
    refs.insert(refs.end(), std::make_move_iterator(sr.begin()),
                std::make_move_iterator(sr.end()));
  }
  return refs;
}

std::vector<LayerStack *> ModelBundle::stacks() {
  switch (cfg_.variant) {
    case Variant::kDnn:
      return {&feature_extractor, &senone_head};
    case Variant::kMt:
      return {&feature_extractor, &senone_head, &domain_head};
    case Variant::kGrl:
      return {&feature_extractor, &senone_head, &domain_head, &grl};
    case Variant::kDsn:
      return {&private_src, &private_tgt, &shared, &decoder,
              &senone_head, &domain_head, &grl};
  }
  return {};
}

std::vector<const LayerStack *> ModelBundle::stacks() const {
  auto mutable_stacks = const_cast<ModelBundle *>(this)->stacks();
  return {mutable_stacks.begin(), mutable_stacks.end()};
}

}  // namespace udac
