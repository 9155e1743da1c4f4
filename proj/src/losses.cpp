#include "lsa/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace lsa {

namespace {

double clamp_cell(double v, double epsilon) { return std::max(v, epsilon); }

void check_track(const RelationTrack& track) {
  if (track.truth.size() != track.prob.size()) {
    throw std::invalid_argument("track sequences are not aligned");
  }
  if (track.truth.size() < 2) {
    throw std::invalid_argument("track needs at least two frames");
  }
}

void check_probability_shapes(std::span<const double> p, std::span<const int> y) {
  if (p.size() != y.size()) throw std::invalid_argument("p and y differ in length");
  if (p.empty()) throw std::invalid_argument("empty probability vector");
}

}  // namespace

double matrix_mass(const TransitionMatrix& m) {
  return m[0][0] + m[0][1] + m[1][0] + m[1][1];
}

TransitionMatrix normalize_transitions(const TransitionMatrix& m, double epsilon) {
  const double denom = matrix_mass(m) + epsilon;
  TransitionMatrix out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out[i][j] = m[i][j] / denom;
  }
  return out;
}

double symmetric_kl_divergence(const TransitionMatrix& pred, const TransitionMatrix& real,
                               double epsilon) {
  double forward = 0, backward = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double p = clamp_cell(pred[i][j], epsilon);
      const double q = clamp_cell(real[i][j], epsilon);
      forward += p * std::log(p / q);
      backward += q * std::log(q / p);
    }
  }
  return 0.5 * (forward + backward);
}

double cosine_weight(int t, int n, int t_end, double beta) {
  if (t < n + 1 || t > t_end) {
    throw std::invalid_argument("t=" + std::to_string(t) + " outside [" +
                                std::to_string(n + 1) + "," + std::to_string(t_end) + "]");
  }
  const double argument =
      t_end == n + 1 ? 0.0
                     : std::numbers::pi * static_cast<double>(t - (n + 1)) /
                           static_cast<double>(t_end - (n + 1));
  return beta * (1.0 + std::cos(argument)) + (1.0 - beta);
}

double goa_weighted_loss(const std::vector<std::vector<double>>& token_losses,
                         int n, int t_end, double beta) {
  if (token_losses.empty()) throw std::invalid_argument("no token losses given");
  if (static_cast<int>(token_losses.size()) != t_end - n) {
    throw std::invalid_argument("expected one token array per graph in {n+1..T}");
  }
  double numerator = 0, denominator = 0;
  for (int t = n + 1; t <= t_end; ++t) {
    const auto& losses = token_losses[static_cast<std::size_t>(t - (n + 1))];
    const double w = cosine_weight(t, n, t_end, beta);
    double sum = 0;
    for (double l : losses) sum += l;
    numerator += w * sum;
    denominator += w * static_cast<double>(losses.size());
  }
  if (denominator == 0) throw std::invalid_argument("zero total token count");
  return numerator / denominator;
}

std::pair<TransitionMatrix, TransitionMatrix> transition_matrices(
    const RelationTrack& track, double tau, bool tau_gate) {
  check_track(track);
  TransitionMatrix real{{{0, 0}, {0, 0}}};
  TransitionMatrix pred{{{0, 0}, {0, 0}}};
  for (std::size_t t = 0; t + 1 < track.truth.size(); ++t) {
    real[track.truth[t] != 0 ? 1 : 0][track.truth[t + 1] != 0 ? 1 : 0] += 1.0;
    if (tau_gate && std::abs(track.prob[t + 1] - track.prob[t]) <= tau) continue;
    const double p0 = track.prob[t];
    const double p1 = track.prob[t + 1];
    pred[1][1] += p0 * p1;
    pred[1][0] += p0 * (1.0 - p1);
    pred[0][1] += (1.0 - p0) * p1;
    pred[0][0] += (1.0 - p0) * (1.0 - p1);
  }
  return {real, pred};
}

TransitionLossResult transition_loss(std::span<const RelationTrack> tracks,
                                     const LossConfig& config) {
  if (tracks.empty()) throw std::invalid_argument("no relation tracks given");
  TransitionLossResult result;
  double sum = 0;
  for (const auto& track : tracks) {
    auto [real, pred] = transition_matrices(track, config.tau, config.tau_gate);
    if (!(matrix_mass(real) > config.delta)) continue;
    sum += symmetric_kl_divergence(normalize_transitions(pred, config.epsilon),
                        normalize_transitions(real, config.epsilon), config.epsilon);
    ++result.valid_relations;
  }
  if (result.valid_relations == 0) {
    result.no_valid_relations = true;
    return result;
  }
  result.value = sum / result.valid_relations;
  return result;
}

std::vector<std::vector<double>> transition_loss_gradient(
    std::span<const RelationTrack> tracks, const LossConfig& config) {
  if (config.tau_gate) {
    throw std::logic_error("analytic transition gradient requires the tau gate off");
  }
  if (tracks.empty()) throw std::invalid_argument("no relation tracks given");

  int valid = 0;
  for (const auto& track : tracks) {
    auto [real, pred] = transition_matrices(track, config.tau, false);
    (void)pred;
    if (matrix_mass(real) > config.delta) ++valid;
  }

  std::vector<std::vector<double>> gradients;
  gradients.reserve(tracks.size());
  for (const auto& track : tracks) {
    const std::size_t length = track.prob.size();
    std::vector<double> grad(length, 0.0);
    auto [real, pred] = transition_matrices(track, config.tau, false);
    if (valid == 0 || !(matrix_mass(real) > config.delta)) {
      gradients.push_back(std::move(grad));
      continue;
    }
    const double pred_denom = matrix_mass(pred) + config.epsilon;
    const TransitionMatrix d_real = normalize_transitions(real, config.epsilon);
    const TransitionMatrix d_pred = normalize_transitions(pred, config.epsilon);

    // dL/dD_pred(i,j) of the symmetrized KL, using the clamped cells.
    TransitionMatrix dl{{{0, 0}, {0, 0}}};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double p = clamp_cell(d_pred[i][j], config.epsilon);
        const double q = clamp_cell(d_real[i][j], config.epsilon);
        dl[i][j] = 0.5 * (std::log(p / q) + 1.0 - q / p);
      }
    }
    for (std::size_t s = 0; s < length; ++s) {
      // T_pred(i,j) = sum_t p^(i)(t) p^(j)(t+1); p(s) enters the incoming
      // step (s-1 -> s) through the column state and the outgoing step
      // (s -> s+1) through the row state.
      double d = 0;
      if (s >= 1) {
        const double prev = track.prob[s - 1];
        d += dl[1][1] * prev + dl[0][1] * (1.0 - prev);
        d -= dl[1][0] * prev + dl[0][0] * (1.0 - prev);
      }
      if (s + 1 < length) {
        const double next = track.prob[s + 1];
        d += dl[1][1] * next + dl[1][0] * (1.0 - next);
        d -= dl[0][1] * next + dl[0][0] * (1.0 - next);
      }
      grad[s] = d / pred_denom / valid;
    }
    gradients.push_back(std::move(grad));
  }
  return gradients;
}

double bce(std::span<const double> p, std::span<const int> y, double epsilon) {
  check_probability_shapes(p, y);
  double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], epsilon, 1.0 - epsilon);
    sum += y[i] != 0 ? -std::log(q) : -std::log(1.0 - q);
  }
  return sum / static_cast<double>(p.size());
}

std::vector<double> bce_gradient(std::span<const double> p, std::span<const int> y,
                                 double epsilon) {
  check_probability_shapes(p, y);
  std::vector<double> grad(p.size());
  const auto count = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], epsilon, 1.0 - epsilon);
    grad[i] = (y[i] != 0 ? -1.0 / q : 1.0 / (1.0 - q)) / count;
  }
  return grad;
}

double threshold_margin_loss(std::span<const double> p, std::span<const int> y,
                             double gamma_pos, double gamma_neg) {
  check_probability_shapes(p, y);
  double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += y[i] != 0 ? std::max(0.0, gamma_pos - p[i]) : std::max(0.0, p[i] - gamma_neg);
  }
  return sum / static_cast<double>(p.size());
}

std::vector<double> threshold_margin_gradient(std::span<const double> p,
                                              std::span<const int> y,
                                              double gamma_pos, double gamma_neg) {
  check_probability_shapes(p, y);
  std::vector<double> grad(p.size(), 0.0);
  const auto count = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (y[i] != 0) {
      if (p[i] < gamma_pos) grad[i] = -1.0 / count;
    } else {
      if (p[i] > gamma_neg) grad[i] = 1.0 / count;
    }
  }
  return grad;
}

double sgg_relation_loss(std::span<const double> p, std::span<const int> y,
                         const LossConfig& config) {
  return bce(p, y, config.epsilon) +
         config.eta * threshold_margin_loss(p, y, config.gamma_pos, config.gamma_neg);
}

double oora_total_loss(double ce, double bce_value, double transition, double lambda) {
  return ce + bce_value + lambda * transition;
}

TokenWeightExport export_token_weights(int n, int t_end, double beta,
                                       const std::vector<int>& token_counts) {
  if (token_counts.empty()) throw std::invalid_argument("no token counts given");
  if (static_cast<int>(token_counts.size()) != t_end - n) {
    throw std::invalid_argument("expected one token count per graph in {n+1..T}");
  }
  TokenWeightExport out;
  out.n = n;
  out.t_end = t_end;
  out.beta = beta;
  out.token_counts = token_counts;
  for (int t = n + 1; t <= t_end; ++t) {
    const double w = cosine_weight(t, n, t_end, beta);
    const int count = token_counts[static_cast<std::size_t>(t - (n + 1))];
    if (count < 0) throw std::invalid_argument("negative token count");
    out.graph_weights.push_back(w);
    out.per_token_weights.insert(out.per_token_weights.end(),
                                 static_cast<std::size_t>(count), w);
    out.normalizer += w * count;
  }
  return out;
}

TransitionScoreReport score_transition_consistency(std::span<const FramePair> videos,
                                                   const Vocabulary& vocab,
                                                   const LossConfig& config) {
  TransitionScoreReport report;
  std::map<std::string, std::pair<double, int>> sums;  // relation -> (sum, count)

  for (const auto& video : videos) {
    std::map<int, const FrameGraph*> truth_by_id;
    for (const auto& frame : video.truth) truth_by_id[frame.frame_id] = &frame;
    std::vector<std::pair<const FrameGraph*, const FrameGraph*>> aligned;
    for (const auto& frame : video.predicted) {
      auto it = truth_by_id.find(frame.frame_id);
      if (it != truth_by_id.end()) aligned.emplace_back(&frame, it->second);
    }
    if (aligned.size() < 2) continue;

    std::set<std::string> objects;
    for (const auto& [pred, truth] : aligned) {
      for (const auto& obj : pred->objects) objects.insert(obj.name);
      for (const auto& obj : truth->objects) objects.insert(obj.name);
    }
    for (const auto& object : objects) {
      for (RelationKind kind :
           {RelationKind::attention, RelationKind::spatial, RelationKind::contact}) {
        for (const auto& relation : vocab.relations(kind)) {
          RelationTrack track;
          for (const auto& [pred, truth] : aligned) {
            auto present = [&](const FrameGraph* g) {
              const ObjectState* state = g->find(object);
              if (state == nullptr) return false;
              const auto& names = state->relations(kind);
              return std::find(names.begin(), names.end(), relation) != names.end();
            };
            track.truth.push_back(present(truth) ? 1 : 0);
            track.prob.push_back(present(pred) ? 1.0 : 0.0);
          }
          auto [real, pred_m] = transition_matrices(track, config.tau, config.tau_gate);
          if (!(matrix_mass(real) > config.delta)) continue;
          const double score =
              symmetric_kl_divergence(normalize_transitions(pred_m, config.epsilon),
                           normalize_transitions(real, config.epsilon), config.epsilon);
          auto& [sum, count] = sums[relation];
          sum += score;
          count += 1;
          ++report.tracks;
        }
      }
    }
  }

  if (sums.empty()) {
    report.no_valid_relations = true;
    return report;
  }
  double total = 0;
  for (const auto& [relation, entry] : sums) {
    const double mean = entry.first / entry.second;
    report.per_relation[relation] = mean;
    total += mean;
  }
  report.aggregate = total / static_cast<double>(sums.size());
  return report;
}

}  // namespace lsa
