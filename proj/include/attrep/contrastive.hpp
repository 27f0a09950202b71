#pragma once

#include <Eigen/Dense>
#include <vector>

#include "attrep/losses.hpp"

namespace attrep {

// delta-thresholded positive sets over a two-view batch. Anchor i's universe
// A(i) is every other index; members[i] holds K'(i) = {k != i : JS <= delta}.
struct PositiveSets {
  std::vector<std::vector<int>> members;
  std::vector<char> skipped;  // anchors whose K'(i) came out empty

  int size() const { return static_cast<int>(members.size()); }
  int skipped_count() const;
  // Mean |K'(i)| over all anchors (diagnostics).
  double mean_size() const;
};

// Symmetric matrix of pairwise JS divergences between soft labels.
Eigen::MatrixXd pairwise_js(const std::vector<Vec>& labels);

PositiveSets build_positive_sets(const std::vector<Vec>& labels, double delta);
// Variant reusing an already computed JS matrix.
PositiveSets build_positive_sets(const Eigen::MatrixXd& js, double delta);

// Contrastive regularization over per-view vectors (class-probability vectors
// in the default configuration):
//   L = mean over non-skipped anchors i of
//       (-1/|K'(i)|) sum_{k in K'(i)} log( exp(s_ik) / sum_{a != i} exp(s_ia) )
// with s_ik = u_i . u_k / tau and u = inputs, L2-normalized first when
// normalize is set.
double contrastive_regularization(const std::vector<Vec>& inputs, const PositiveSets& positives,
                                  double tau, bool normalize = true);

struct CrGradResult {
  double value = 0.0;
  // dL/d(inputs): gradient w.r.t. the raw (pre-normalization) vectors.
  std::vector<Vec> grad_inputs;
};
CrGradResult contrastive_regularization_with_grad(const std::vector<Vec>& inputs,
                                                  const PositiveSets& positives, double tau,
                                                  bool normalize = true);

// Convenience for probability-space CR: chains the input gradient through
// softmax, assuming inputs[i] = softmax(logits_i).
std::vector<Vec> contrastive_regularization_grad_logits(const std::vector<Vec>& probs,
                                                        const PositiveSets& positives, double tau,
                                                        bool normalize = true);

// CR evaluated on a precomputed similarity matrix s_ik (diagonal ignored).
// Exposed for the repulsion/permutation property tests.
double cr_from_similarity(const Eigen::MatrixXd& similarity, const PositiveSets& positives);

// InfoNCE with positives fixed to the cross-view pairing: view i's only
// positive is (i + N) mod 2N. Equals contrastive_regularization at delta = 0
// when the two views of each sample carry identical labels. Test oracle and
// `gradcheck` helper, not a training path.
double info_nce_reference(const std::vector<Vec>& inputs, double tau, bool normalize = true);

}  // namespace attrep
