#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lsa/scene_graph.hpp"

namespace lsa {

// Reference settings for external fine-tuning scripts. The toolkit never
// trains a model; these are recorded so downstream trainers and the
// exported token weights share one set of defaults.
struct ExternalTrainerDefaults {
  int lora_rank = 32;
  int lora_alpha = 32;
  double learning_rate = 1e-5;
  int batch_size = 1;
  int goa_epochs = 5;
  int oora_epochs = 10;
  int context_tokens = 2000;
};

// Constants of the training objectives. delta has no established default
// and is 0, so only empty tracks are excluded.
struct LossConfig {
  double beta = 0.5;       // cosine mix
  double lambda = 0.03;    // transition-loss weight
  double delta = 0.0;      // minimum ground-truth transition mass
  double tau = 0.2;        // probability-change gate
  bool tau_gate = true;    // literal gating; false accumulates every step
  double epsilon = 1e-9;   // normalization smoothing and log clamp
  double gamma_pos = 0.9;
  double gamma_neg = 0.5;
  double eta = 0.5;        // threshold-loss weight
};

// Presence/probability sequences of one relation over aligned future
// frames.
struct RelationTrack {
  int relation = -1;
  std::vector<int> truth;    // y_r(t) in {0,1}
  std::vector<double> prob;  // p_r(t) in [0,1]
};

// Row = state at t, column = state at t+1.
using TransitionMatrix = std::array<std::array<double, 2>, 2>;

double matrix_mass(const TransitionMatrix& m);
// D = T / (|T|_1 + epsilon).
TransitionMatrix normalize_transitions(const TransitionMatrix& m, double epsilon);
// (KL(pred||real) + KL(real||pred)) / 2 over the four cells, natural log,
// cells clamped to epsilon before the logarithms.
double symmetric_kl_divergence(const TransitionMatrix& pred, const TransitionMatrix& real,
                               double epsilon);

// Cosine attenuation weight for future graph t in {n+1..T}:
//   w(t) = beta * (1 + cos(pi * (t-(n+1)) / (T-(n+1)))) + (1-beta),
// with the cosine argument defined as 0 when T == n+1. Throws
// std::invalid_argument when t is outside [n+1, T].
double cosine_weight(int t, int n, int t_end, double beta);

// Temporally weighted token loss: sum_t w(t) sum_i l_ti / sum_t w(t) K_t.
// token_losses holds one array per future graph, externally computed.
double goa_weighted_loss(const std::vector<std::vector<double>>& token_losses,
                         int n, int t_end, double beta);

// T_real counts all consecutive ground-truth pairs; T_pred accumulates
// p^(i)(t) * p^(j)(t+1) with p^(1) = p and p^(0) = 1-p, restricted (when
// gate is on) to steps with |p(t+1)-p(t)| > tau. T_real is never gated.
// Sequences must be aligned with length >= 2.
std::pair<TransitionMatrix, TransitionMatrix> transition_matrices(
    const RelationTrack& track, double tau, bool tau_gate);

struct TransitionLossResult {
  double value = 0;
  int valid_relations = 0;
  bool no_valid_relations = false;
};

// Mean over delta-gated relations of the symmetrized KL divergence between
// the normalized transition histograms, natural log, cells clamped to
// epsilon before the logarithms. Returns value 0 with a flag when no
// relation passes the gate.
TransitionLossResult transition_loss(std::span<const RelationTrack> tracks,
                                     const LossConfig& config);

// d transition_loss / d prob, per track and step; valid with the tau gate
// off and probabilities away from the epsilon clamps.
std::vector<std::vector<double>> transition_loss_gradient(
    std::span<const RelationTrack> tracks, const LossConfig& config);

// Mean binary cross-entropy, probabilities clamped to [epsilon, 1-epsilon].
double bce(std::span<const double> p, std::span<const int> y, double epsilon = 1e-9);
std::vector<double> bce_gradient(std::span<const double> p, std::span<const int> y,
                                 double epsilon = 1e-9);

// Mean hinge loss carving the decision margin:
//   y*max(0, gamma_pos - p) + (1-y)*max(0, p - gamma_neg).
double threshold_margin_loss(std::span<const double> p, std::span<const int> y,
                             double gamma_pos, double gamma_neg);
std::vector<double> threshold_margin_gradient(std::span<const double> p,
                                              std::span<const int> y,
                                              double gamma_pos, double gamma_neg);

// L_rel = L_BCE + eta * L_thr.
double sgg_relation_loss(std::span<const double> p, std::span<const int> y,
                         const LossConfig& config);

// L_OORA = L_CE + L_BCE + lambda * L_trans.
double oora_total_loss(double ce, double bce_value, double transition, double lambda);

// Per-token weights of the weighted loss, for external trainers.
struct TokenWeightExport {
  int n = 0;
  int t_end = 0;
  double beta = 0;
  std::vector<int> token_counts;          // K_t per future graph
  std::vector<double> graph_weights;      // w(t) per future graph
  std::vector<double> per_token_weights;  // w(t) repeated K_t times
  double normalizer = 0;                  // sum_t w(t) K_t
};

TokenWeightExport export_token_weights(int n, int t_end, double beta,
                                       const std::vector<int>& token_counts);

// Transition-consistency scores of hard 0/1 predictions against ground
// truth, per relation and aggregated; lower is smoother. Tracks are built
// per (object, relation) over the aligned future frames.
struct TransitionScoreReport {
  std::map<std::string, double> per_relation;  // mean over (video, object) tracks
  double aggregate = 0;                        // mean over relations with tracks
  int tracks = 0;
  bool no_valid_relations = false;
};

struct FramePair {
  std::vector<FrameGraph> predicted;
  std::vector<FrameGraph> truth;  // aligned by frame id
};

TransitionScoreReport score_transition_consistency(std::span<const FramePair> videos,
                                                   const Vocabulary& vocab,
                                                   const LossConfig& config);

}  // namespace lsa
