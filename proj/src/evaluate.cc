// udac/evaluate.cc

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

#include "udac/evaluate.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "udac/error.h"

namespace udac {

SenonePrior SenonePrior::from_counts(std::vector<double> counts) {
  SenonePrior prior;
  prior.counts = std::move(counts);
  double total = 0.0;
  for (double c : prior.counts) {
    if (c < 0.0) throw Error("senone prior: negative count");
    total += c;
  }
  if (total <= 0.0) throw Error("senone prior: no frames counted");
  // Zero-count senones get half a frame so the log stays finite.
  const double floor = 0.5;
  double smoothed_total = 0.0;
  std::vector<double> smoothed(prior.counts.size());
  for (size_t i = 0; i < prior.counts.size(); i++) {
    smoothed[i] = std::max(prior.counts[i], floor);
    smoothed_total += smoothed[i];
  }
  prior.log_prior.resize(prior.counts.size());
  for (size_t i = 0; i < smoothed.size(); i++) {
    prior.log_prior[i] = std::log(smoothed[i] / smoothed_total);
  }
  return prior;
}

SenonePrior SenonePrior::from_labels(const LabeledFrameCorpus &corpus,
                                     int64_t senone_count) {
  std::vector<double> counts(static_cast<size_t>(senone_count), 0.0);
  for (const auto &utt : corpus.labels) {
    for (int32_t s : utt) {
      if (s < 0 || s >= senone_count) {
        throw Error("senone prior: label " + std::to_string(s) +
                    " outside [0, " + std::to_string(senone_count) + ")");
      }
      counts[static_cast<size_t>(s)] += 1.0;
    }
  }
  return from_counts(std::move(counts));
}

SenonePrior SenonePrior::from_alignments(const AlignmentMap &ali,
                                         int64_t senone_count) {
  std::vector<double> counts(static_cast<size_t>(senone_count), 0.0);
  for (const auto &[id, senones] : ali) {
    for (int32_t s : senones) {
      if (s < 0 || s >= senone_count) {
        throw Error("senone prior: label " + std::to_string(s) + " in '" + id +
                    "' outside [0, " + std::to_string(senone_count) + ")");
      }
      counts[static_cast<size_t>(s)] += 1.0;
    }
  }
  return from_counts(std::move(counts));
}

namespace {

int64_t argmax_row(const double *row, int64_t n) {
  int64_t best = 0;
  for (int64_t j = 1; j < n; j++) {
    if (row[j] > row[best]) best = j;  // ties keep the lowest index
  }
  return best;
}

}  // namespace

double senone_accuracy(ModelBundle &model, const LabeledFrameCorpus &corpus) {
  if (corpus.frames.dim != model.config().input_dim) {
    throw ShapeError("senone_accuracy: corpus dim " +
                     std::to_string(corpus.frames.dim) + " != model input " +
                     std::to_string(model.config().input_dim));
  }
  int64_t correct = 0, total = 0;
  for (size_t u = 0; u < corpus.frames.utterances.size(); u++) {
    const Tensor &x = corpus.frames.utterances[u].frames;
    const Tensor logprobs = model.infer_senone_logprobs(x);
    for (int64_t t = 0; t < x.rows(); t++) {
      const int64_t pred = argmax_row(logprobs.row(t), logprobs.cols());
      if (pred == corpus.labels[u][static_cast<size_t>(t)]) correct++;
      total++;
    }
  }
  if (total == 0) throw Error("senone_accuracy: empty corpus");
  return static_cast<double>(correct) / static_cast<double>(total);
}

DomainAccuracy domain_accuracy(ModelBundle &model, const FrameCorpus &src_eval,
                               const FrameCorpus &tgt_eval) {
  DomainAccuracy acc;
  auto count = [&model](const FrameCorpus &corpus, int64_t want) {
    int64_t hit = 0, total = 0;
    for (const auto &utt : corpus.utterances) {
      const Tensor logprobs = model.infer_domain_logprobs(utt.frames);
      for (int64_t t = 0; t < logprobs.rows(); t++) {
        if (argmax_row(logprobs.row(t), 2) == want) hit++;
        total++;
      }
    }
    return std::pair<int64_t, int64_t>(hit, total);
  };
  auto [src_hit, src_total] = count(src_eval, 0);
  auto [tgt_hit, tgt_total] = count(tgt_eval, 1);
  if (src_total == 0 || tgt_total == 0) {
    throw Error("domain_accuracy: empty evaluation corpus");
  }
  acc.source = static_cast<double>(src_hit) / static_cast<double>(src_total);
  acc.target = static_cast<double>(tgt_hit) / static_cast<double>(tgt_total);
  acc.source_frames = src_total;
  acc.target_frames = tgt_total;
  return acc;
}

Tensor pseudo_loglik(ModelBundle &model, const Tensor &frames,
                     const SenonePrior &prior) {
  if (static_cast<int64_t>(prior.log_prior.size()) !=
      model.config().senone_count) {
    throw ShapeError("pseudo_loglik: prior has " +
                     std::to_string(prior.log_prior.size()) +
                     " senones, model has " +
                     std::to_string(model.config().senone_count));
  }
  Tensor out = model.infer_senone_logprobs(frames);
  for (int64_t t = 0; t < out.rows(); t++) {
    double *row = out.row(t);
    for (int64_t j = 0; j < out.cols(); j++) row[j] -= prior.log_prior[j];
  }
  return out;
}

FeatureArchive pseudo_loglik_archive(ModelBundle &model,
                                     const FrameCorpus &corpus,
                                     const SenonePrior &prior) {
  FeatureArchive archive;
  archive.stage = FeatureStage::kLogLik;
  archive.dim = model.config().senone_count;
  archive.config_digest = 0;
  for (const auto &utt : corpus.utterances) {
    ArchiveUtterance rec;
    rec.id = utt.id;
    rec.frames = pseudo_loglik(model, utt.frames, prior);
    archive.utterances.push_back(std::move(rec));
  }
  return archive;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << "frames: source " << frames_source << ", target " << frames_target
     << "\n";
  os << "senone accuracy: source " << senone_acc_source << ", target "
     << senone_acc_target << "\n";
  if (has_domain) {
    os << "domain accuracy: source-eval " << domain.source << ", target-eval "
       << domain.target << "\n";
  }
  return os.str();
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "metric,value\n";
  os << "senone_acc_source," << senone_acc_source << "\n";
  os << "senone_acc_target," << senone_acc_target << "\n";
  if (has_domain) {
    os << "domain_acc_source," << domain.source << "\n";
    os << "domain_acc_target," << domain.target << "\n";
  }
  os << "frames_source," << frames_source << "\n";
  os << "frames_target," << frames_target << "\n";
  return os.str();
}

EvalReport evaluate_model(ModelBundle &model,
                          const LabeledFrameCorpus &src_eval,
                          const LabeledFrameCorpus &tgt_eval) {
  EvalReport report;
  report.senone_acc_source = senone_accuracy(model, src_eval);
  report.senone_acc_target = senone_accuracy(model, tgt_eval);
  report.frames_source = src_eval.frames.total_frames();
  report.frames_target = tgt_eval.frames.total_frames();
  if (model.config().has_domain_head()) {
    report.has_domain = true;
    report.domain = domain_accuracy(model, src_eval.frames, tgt_eval.frames);
  }
  return report;
}

// -------------------------------------------------------------------- PCA

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix; returns
// eigenvalues (descending) and matching eigenvectors as rows of *vectors.
void jacobi_eigen(Tensor a, std::vector<double> *values, Tensor *vectors) {
  const int64_t n = a.rows();
  Tensor v(n, n);
  for (int64_t i = 0; i < n; i++) v(i, i) = 1.0;
  for (int sweep = 0; sweep < 100; sweep++) {
    double off = 0.0;
    for (int64_t p = 0; p < n; p++) {
      for (int64_t q = p + 1; q < n; q++) off += a(p, q) * a(p, q);
    }
    if (off < 1e-24) break;
    for (int64_t p = 0; p < n; p++) {
      for (int64_t q = p + 1; q < n; q++) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int64_t k = 0; k < n; k++) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int64_t k = 0; k < n; k++) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int64_t k = 0; k < n; k++) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; i++) diag[static_cast<size_t>(i)] = a(i, i);
  std::sort(order.begin(), order.end(), [&diag](int64_t x, int64_t y) {
    return diag[static_cast<size_t>(x)] > diag[static_cast<size_t>(y)];
  });
  values->resize(static_cast<size_t>(n));
  *vectors = Tensor(n, n);
  for (int64_t r = 0; r < n; r++) {
    const int64_t src_col = order[static_cast<size_t>(r)];
    (*values)[static_cast<size_t>(r)] = diag[static_cast<size_t>(src_col)];
    for (int64_t k = 0; k < n; k++) (*vectors)(r, k) = v(k, src_col);
  }
}

}  // namespace

Pca pca_fit(const Tensor &rows, int64_t n_components) {
  const int64_t n = rows.rows(), d = rows.cols();
  if (n < 2) throw Error("pca_fit: need at least 2 rows");
  if (n_components < 1 || n_components > d) {
    throw Error("pca_fit: bad component count " +
                std::to_string(n_components));
  }
  Pca pca;
  pca.mean.assign(static_cast<size_t>(d), 0.0);
  for (int64_t i = 0; i < n; i++) {
    const double *row = rows.row(i);
    for (int64_t j = 0; j < d; j++) pca.mean[static_cast<size_t>(j)] += row[j];
  }
  for (double &m : pca.mean) m /= static_cast<double>(n);

  Tensor cov(d, d);
  for (int64_t i = 0; i < n; i++) {
    const double *row = rows.row(i);
    for (int64_t a = 0; a < d; a++) {
      const double ca = row[a] - pca.mean[static_cast<size_t>(a)];
      double *crow = cov.row(a);
      for (int64_t b = a; b < d; b++) {
        crow[b] += ca * (row[b] - pca.mean[static_cast<size_t>(b)]);
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(n - 1);
  for (int64_t a = 0; a < d; a++) {
    for (int64_t b = a; b < d; b++) {
      cov(a, b) *= inv;
      cov(b, a) = cov(a, b);
    }
  }

  std::vector<double> values;
  Tensor vectors;
  jacobi_eigen(std::move(cov), &values, &vectors);
  pca.eigenvalues = values;
  pca.components = Tensor(n_components, d);
  for (int64_t c = 0; c < n_components; c++) {
    std::copy(vectors.row(c), vectors.row(c) + d, pca.components.row(c));
  }
  return pca;
}

Tensor Pca::project(const Tensor &rows) const {
  const int64_t n = rows.rows(), d = rows.cols();
  const int64_t k = components.rows();
  Tensor out(n, k);
  for (int64_t i = 0; i < n; i++) {
    const double *row = rows.row(i);
    for (int64_t c = 0; c < k; c++) {
      const double *comp = components.row(c);
      double acc = 0.0;
      for (int64_t j = 0; j < d; j++) {
        acc += (row[j] - mean[static_cast<size_t>(j)]) * comp[j];
      }
      out(i, c) = acc;
    }
  }
  return out;
}

EmbeddingTable export_embeddings(ModelBundle &model,
                                 const LabeledFrameCorpus &src,
                                 const LabeledFrameCorpus &tgt,
                                 std::optional<int32_t> senone_filter) {
  EmbeddingTable table;
  std::vector<const LabeledFrameCorpus *> corpora = {&src, &tgt};
  std::vector<Tensor> chunks;
  int64_t total = 0;
  const int64_t code = model.config().code_dim();
  for (int dom = 0; dom < 2; dom++) {
    const LabeledFrameCorpus &corpus = *corpora[static_cast<size_t>(dom)];
    for (size_t u = 0; u < corpus.frames.utterances.size(); u++) {
      const Tensor &x = corpus.frames.utterances[u].frames;
      // Select rows first so only matching frames are embedded.
      std::vector<int64_t> keep;
      for (int64_t t = 0; t < x.rows(); t++) {
        const int32_t senone = corpus.labels[u][static_cast<size_t>(t)];
        if (!senone_filter.has_value() || senone == *senone_filter) {
          keep.push_back(t);
        }
      }
      if (keep.empty()) continue;
      Tensor sel(static_cast<int64_t>(keep.size()), x.cols());
      for (size_t r = 0; r < keep.size(); r++) {
        std::copy(x.row(keep[r]), x.row(keep[r]) + x.cols(),
                  sel.row(static_cast<int64_t>(r)));
      }
      chunks.push_back(model.infer_embeddings(sel));
      total += static_cast<int64_t>(keep.size());
      for (int64_t t : keep) {
        table.domains.push_back(static_cast<int32_t>(dom));
        table.senones.push_back(corpus.labels[u][static_cast<size_t>(t)]);
      }
    }
  }
  if (total == 0) {
    throw Error("export_embeddings: no frames match the senone filter");
  }
  table.embeddings = Tensor(total, code);
  int64_t row = 0;
  for (const Tensor &chunk : chunks) {
    for (int64_t i = 0; i < chunk.rows(); i++, row++) {
      std::copy(chunk.row(i), chunk.row(i) + code, table.embeddings.row(row));
    }
  }
  if (total >= 2) {
    const Pca pca = pca_fit(table.embeddings, 2);
    table.projection = pca.project(table.embeddings);
    table.eigenvalues = pca.eigenvalues;
  } else {
    table.projection = Tensor(total, 2);
  }
  check_finite(table.embeddings, "embedding export");
  return table;
}

void write_embedding_csv(const EmbeddingTable &table, const std::string &path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  const int64_t d = table.embeddings.cols();
  os << "domain,senone";
  for (int64_t j = 0; j < d; j++) os << ",dim" << j;
  os << ",pc1,pc2\n";
  char buf[40];
  for (int64_t i = 0; i < table.embeddings.rows(); i++) {
    os << table.domains[static_cast<size_t>(i)] << ','
       << table.senones[static_cast<size_t>(i)];
    const double *row = table.embeddings.row(i);
    for (int64_t j = 0; j < d; j++) {
      std::snprintf(buf, sizeof buf, "%.17g", row[j]);
      os << ',' << buf;
    }
    for (int64_t c = 0; c < 2; c++) {
      std::snprintf(buf, sizeof buf, "%.17g", table.projection(i, c));
      os << ',' << buf;
    }
    os << '\n';
  }
  os.flush();
  if (!os) throw IoError("write to " + path + " failed");
}

}  // namespace udac
