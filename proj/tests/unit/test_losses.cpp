#include <stdexcept>
#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "lsa/losses.hpp"
#include "support/generators.hpp"

using namespace lsa;

namespace {

// Scalar reference for the symmetric KL of two 2x2 histograms, written out
// longhand; used to pin the transition-loss fixture independently.
double scalar_symmetric_kl(const double p[4], const double q[4], double eps) {
  double forward = 0, backward = 0;
  for (int i = 0; i < 4; ++i) {
    const double pi = p[i] < eps ? eps : p[i];
    const double qi = q[i] < eps ? eps : q[i];
    forward += pi * std::log(pi / qi);
    backward += qi * std::log(qi / pi);
  }
  return 0.5 * (forward + backward);
}

}  // namespace

TEST_CASE("cosine weight endpoints and midpoint") {
  CHECK(cosine_weight(6, 5, 10, 0.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(cosine_weight(10, 5, 10, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  // midpoint of an even-length horizon: cos(pi/2) = 0 forces exactly 1
  CHECK(cosine_weight(8, 5, 10, 0.77) == doctest::Approx(1.0).epsilon(1e-12));
  // single future graph: the argument is defined as 0
  CHECK(cosine_weight(6, 5, 6, 0.25) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK_THROWS_AS(cosine_weight(5, 5, 10, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(cosine_weight(11, 5, 10, 0.5), std::invalid_argument);
}

TEST_CASE("cosine weight is non-increasing and bounded by [1-beta, 1+beta]") {
  for (double beta : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    double previous = 1.0 + beta + 1e-12;
    for (int t = 1; t <= 40; ++t) {
      const double w = cosine_weight(t, 0, 40, beta);
      CHECK(w <= previous + 1e-12);
      CHECK(w >= 1.0 - beta - 1e-12);
      CHECK(w <= 1.0 + beta + 1e-12);
      previous = w;
    }
  }
}

TEST_CASE("goa weighted loss fixture equals 8/7") {
  const std::vector<std::vector<double>> losses{{1.0, 1.0}, {2.0}};
  CHECK(goa_weighted_loss(losses, 0, 2, 0.5) == doctest::Approx(8.0 / 7.0).epsilon(1e-14));
}

TEST_CASE("goa weighted loss of a constant is that constant; beta=0 is a plain mean") {
  const std::vector<std::vector<double>> constant{{3.25, 3.25, 3.25}, {3.25}, {3.25, 3.25}};
  for (double beta : {0.0, 0.3, 0.7, 1.0}) {
    CHECK(goa_weighted_loss(constant, 4, 7, beta) == doctest::Approx(3.25).epsilon(1e-13));
  }
  const std::vector<std::vector<double>> mixed{{1.0, 2.0}, {3.0}};
  CHECK(goa_weighted_loss(mixed, 0, 2, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(goa_weighted_loss({}, 0, 0, 0.5), std::invalid_argument);
}

TEST_CASE("goa weighted loss is linear in the token losses") {
  testsupport::GraphGenerator gen(5150);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::vector<double>> losses;
    const int graphs = gen.uniform(1, 5);
    for (int t = 0; t < graphs; ++t) {
      std::vector<double> row;
      for (int i = gen.uniform(1, 6); i > 0; --i) row.push_back(gen.uniform(0, 100) / 10.0);
      losses.push_back(std::move(row));
    }
    const double base = goa_weighted_loss(losses, 0, graphs, 0.5);
    std::vector<std::vector<double>> scaled = losses;
    for (auto& row : scaled) {
      for (auto& value : row) value *= 3.5;
    }
    CHECK(goa_weighted_loss(scaled, 0, graphs, 0.5) ==
          doctest::Approx(3.5 * base).epsilon(1e-12));
  }
}

TEST_CASE("transition matrices count ground-truth pairs and gate predictions") {
  RelationTrack track;
  track.truth = {0, 0, 1, 1, 0};
  track.prob = {0.0, 0.0, 1.0, 1.0, 0.0};

  SUBCASE("T_real enumerates the four consecutive pairs") {
    auto [real, pred] = transition_matrices(track, 0.2, true);
    CHECK(real[0][0] == 1.0);
    CHECK(real[0][1] == 1.0);
    CHECK(real[1][1] == 1.0);
    CHECK(real[1][0] == 1.0);
  }
  SUBCASE("gate off with p == y makes T_pred equal T_real") {
    auto [real, pred] = transition_matrices(track, 0.0, false);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) CHECK(pred[i][j] == doctest::Approx(real[i][j]));
    }
    std::vector<RelationTrack> tracks{track};
    LossConfig config;
    config.tau_gate = false;
    CHECK(transition_loss(tracks, config).value == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("constant p=0.5 with tau=0.2 leaves T_pred all zero") {
    RelationTrack flat;
    flat.truth = {0, 1, 0, 1};
    flat.prob = {0.5, 0.5, 0.5, 0.5};
    auto [real, pred] = transition_matrices(flat, 0.2, true);
    CHECK(matrix_mass(pred) == 0.0);
  }
  RelationTrack bad;
  bad.truth = {1};
  bad.prob = {0.5};
  CHECK_THROWS_AS(transition_matrices(bad, 0.2, true), std::invalid_argument);
}

TEST_CASE("transition loss symmetric-KL fixture") {
  // D_pred = [[0.4,0.1],[0.1,0.4]] vs uniform D_real, natural log:
  // KL(pred||real) = 0.8 ln 1.6 + 0.2 ln 0.4, KL(real||pred) = 0.5 ln 0.625^-1 ...
  const double pred[4] = {0.4, 0.1, 0.1, 0.4};
  const double real[4] = {0.25, 0.25, 0.25, 0.25};
  const double expected = scalar_symmetric_kl(pred, real, 1e-9);
  CHECK(expected == doctest::Approx(0.20794415416798363).epsilon(1e-12));

  // A track whose raw matrices normalize to exactly those histograms:
  // T_real uniform over the four pair kinds, T_pred 0.4/0.1/0.1/0.4 masses.
  TransitionMatrix pred_m{{{0.4, 0.1}, {0.1, 0.4}}};
  TransitionMatrix real_m{{{1.0, 1.0}, {1.0, 1.0}}};
  TransitionMatrix d_pred = normalize_transitions(pred_m, 1e-9);
  TransitionMatrix d_real = normalize_transitions(real_m, 1e-9);
  double forward = 0, backward = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      forward += d_pred[i][j] * std::log(d_pred[i][j] / d_real[i][j]);
      backward += d_real[i][j] * std::log(d_real[i][j] / d_pred[i][j]);
    }
  }
  CHECK(0.5 * (forward + backward) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("transition loss is zero iff histograms agree, and never negative") {
  testsupport::GraphGenerator gen(777);
  LossConfig config;
  config.tau_gate = false;
  for (int round = 0; round < 100; ++round) {
    RelationTrack track;
    const int length = gen.uniform(2, 12);
    for (int i = 0; i < length; ++i) {
      track.truth.push_back(gen.uniform(0, 1));
      track.prob.push_back(gen.uniform(1, 99) / 100.0);
    }
    std::vector<RelationTrack> tracks{track};
    CHECK(transition_loss(tracks, config).value >= 0.0);
  }
}

TEST_CASE("delta gate excludes sparse relations and flags an empty result") {
  RelationTrack track;
  track.truth = {0, 0, 0};
  track.prob = {0.1, 0.1, 0.1};
  std::vector<RelationTrack> tracks{track};
  LossConfig config;
  config.delta = 5.0;  // |T_real|_1 == 2 fails the gate
  TransitionLossResult result = transition_loss(tracks, config);
  CHECK(result.no_valid_relations);
  CHECK(result.value == 0.0);
}

TEST_CASE("bce fixtures and brute-force agreement") {
  const double half[1] = {0.5};
  const int one[1] = {1};
  CHECK(bce(half, one) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const double sure[1] = {1.0 - 1e-9};
  CHECK(bce(sure, one) == doctest::Approx(0.0).epsilon(1e-8));

  testsupport::GraphGenerator gen(31337);
  for (int round = 0; round < 100; ++round) {
    const int n = gen.uniform(1, 24);
    std::vector<double> p;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      p.push_back(gen.uniform(1, 999) / 1000.0);
      y.push_back(gen.uniform(0, 1));
    }
    double expected = 0;  // independent scalar loop
    for (int i = 0; i < n; ++i) {
      expected += y[i] == 1 ? -std::log(p[i]) : -std::log(1.0 - p[i]);
    }
    expected /= n;
    CHECK(bce(p, y) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("threshold margin loss fixtures") {
  const int pos[1] = {1};
  const int neg[1] = {0};
  const double p95[1] = {0.95};
  const double p70[1] = {0.7};
  const double p60[1] = {0.6};
  CHECK(threshold_margin_loss(p95, pos, 0.9, 0.5) == 0.0);
  CHECK(threshold_margin_loss(p70, neg, 0.9, 0.5) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(threshold_margin_loss(p60, pos, 0.9, 0.5) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("sgg relation loss composes bce and the margin term") {
  LossConfig config;
  const double p70[1] = {0.7};
  const int neg[1] = {0};
  CHECK(sgg_relation_loss(p70, neg, config) ==
        doctest::Approx(-std::log(0.3) + 0.5 * 0.2).epsilon(1e-12));
  CHECK(-std::log(0.3) + 0.5 * 0.2 == doctest::Approx(1.303973).epsilon(1e-6));
  LossConfig no_margin = config;
  no_margin.eta = 0.0;
  CHECK(sgg_relation_loss(p70, neg, no_margin) == doctest::Approx(bce(p70, neg)));
  const double extremes[2] = {1.0 - 1e-9, 1e-9};
  const int labels[2] = {1, 0};
  CHECK(sgg_relation_loss(extremes, labels, config) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("oora total loss is the stated combination") {
  CHECK(oora_total_loss(1.0, 0.5, 2.0, 0.03) == doctest::Approx(1.56).epsilon(1e-14));
  CHECK(oora_total_loss(1.25, 0.75, 99.0, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(oora_total_loss(0, 0, 0, 0.03) == 0.0);
}

TEST_CASE("token weight export fixture and round trip through the loss") {
  TokenWeightExport weights = export_token_weights(0, 2, 0.5, {2, 1});
  CHECK(weights.per_token_weights == std::vector<double>{1.5, 1.5, 0.5});
  CHECK(weights.normalizer == doctest::Approx(3.5).epsilon(1e-14));

  TokenWeightExport flat = export_token_weights(3, 6, 0.0, {4, 2, 5});
  for (double w : flat.per_token_weights) CHECK(w == 1.0);

  // applying the exported weights externally reproduces goa_weighted_loss
  const std::vector<std::vector<double>> losses{{1.0, 1.0}, {2.0}};
  double numerator = 0;
  std::size_t flat_index = 0;
  for (const auto& row : losses) {
    for (double l : row) numerator += l * weights.per_token_weights[flat_index++];
  }
  CHECK(numerator / weights.normalizer ==
        doctest::Approx(goa_weighted_loss(losses, 0, 2, 0.5)).epsilon(1e-14));
}

TEST_CASE("losses are permutation-invariant over the relation axis") {
  testsupport::GraphGenerator gen(2024);
  const int n = 10;
  std::vector<double> p;
  std::vector<int> y;
  for (int i = 0; i < n; ++i) {
    p.push_back(gen.uniform(1, 999) / 1000.0);
    y.push_back(gen.uniform(0, 1));
  }
  std::vector<double> p2(p.rbegin(), p.rend());
  std::vector<int> y2(y.rbegin(), y.rend());
  CHECK(bce(p, y) == doctest::Approx(bce(p2, y2)).epsilon(1e-12));
  CHECK(threshold_margin_loss(p, y, 0.9, 0.5) ==
        doctest::Approx(threshold_margin_loss(p2, y2, 0.9, 0.5)).epsilon(1e-12));
}

namespace {

double fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                   std::vector<double> x, std::size_t i, double h) {
  x[i] += h;
  const double up = f(x);
  x[i] -= 2 * h;
  const double down = f(x);
  return (up - down) / (2 * h);
}

}  // namespace

TEST_CASE("analytic gradients match central differences") {
  testsupport::GraphGenerator gen(90210);
  LossConfig config;
  config.tau_gate = false;

  for (int round = 0; round < 20; ++round) {
    const int n = gen.uniform(2, 10);
    std::vector<double> p;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      // keep away from the clamp and the hinge kinks
      double value = gen.uniform(100, 880) / 1000.0;
      if (std::abs(value - 0.5) < 0.02) value += 0.05;
      p.push_back(value);
      y.push_back(gen.uniform(0, 1));
    }

    std::vector<double> grad_bce = bce_gradient(p, y);
    std::vector<double> grad_thr = threshold_margin_gradient(p, y, 0.9, 0.5);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double fd_b = fd_gradient([&](const std::vector<double>& q) { return bce(q, y); },
                                      p, i, 1e-6);
      CHECK(grad_bce[i] == doctest::Approx(fd_b).epsilon(1e-5));
      const double fd_t = fd_gradient(
          [&](const std::vector<double>& q) { return threshold_margin_loss(q, y, 0.9, 0.5); },
          p, i, 1e-7);
      CHECK(grad_thr[i] == doctest::Approx(fd_t).epsilon(1e-5));
    }

    RelationTrack track;
    const int length = gen.uniform(3, 8);
    for (int i = 0; i < length; ++i) {
      track.truth.push_back(gen.uniform(0, 1));
      track.prob.push_back(gen.uniform(100, 900) / 1000.0);
    }
    std::vector<RelationTrack> tracks{track};
    std::vector<std::vector<double>> grad = transition_loss_gradient(tracks, config);
    for (std::size_t i = 0; i < track.prob.size(); ++i) {
      const double fd = fd_gradient(
          [&](const std::vector<double>& q) {
            std::vector<RelationTrack> perturbed{track};
            perturbed[0].prob = q;
            return transition_loss(perturbed, config).value;
          },
          track.prob, i, 1e-6);
      CHECK(grad[0][i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  CHECK_THROWS_AS(transition_loss_gradient(std::vector<RelationTrack>{}, LossConfig{}),
                  std::logic_error);
}

TEST_CASE("transition-consistency scorer on a 3-frame fixture") {
  const Vocabulary& vocab = Vocabulary::action_genome();
  auto broom_frame = [](int id, const char* attn, const char* cont) {
    FrameGraph g;
    g.frame_id = id;
    g.objects.push_back(ObjectState{"broom", {attn}, {"in_front_of"}, {cont}, std::nullopt});
    return g;
  };
  LossConfig config;
  config.tau_gate = false;

  SUBCASE("prediction identical to ground truth scores zero") {
    FramePair pair;
    pair.truth = {broom_frame(1, "looking_at", "holding"), broom_frame(2, "unsure", "holding"),
                  broom_frame(3, "looking_at", "touching")};
    pair.predicted = pair.truth;
    std::vector<FramePair> videos{pair};
    TransitionScoreReport report = score_transition_consistency(videos, vocab, config);
    CHECK(report.aggregate == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.tracks > 0);
  }
  SUBCASE("oscillating prediction against constant truth is strictly positive") {
    FramePair pair;
    pair.truth = {broom_frame(1, "looking_at", "holding"), broom_frame(2, "looking_at", "holding"),
                  broom_frame(3, "looking_at", "holding")};
    pair.predicted = {broom_frame(1, "looking_at", "holding"),
                      broom_frame(2, "not_looking_at", "touching"),
                      broom_frame(3, "looking_at", "holding")};
    std::vector<FramePair> videos{pair};
    TransitionScoreReport report = score_transition_consistency(videos, vocab, config);
    CHECK(report.aggregate > 0.0);
  }
  SUBCASE("score equals a direct per-track recomputation") {
    FramePair pair;
    pair.truth = {broom_frame(1, "looking_at", "holding"), broom_frame(2, "unsure", "touching"),
                  broom_frame(3, "looking_at", "holding")};
    pair.predicted = {broom_frame(1, "looking_at", "touching"),
                      broom_frame(2, "looking_at", "holding"),
                      broom_frame(3, "unsure", "holding")};
    std::vector<FramePair> videos{pair};
    TransitionScoreReport report = score_transition_consistency(videos, vocab, config);

    double expected_sum = 0;
    int relations = 0;
    for (RelationKind kind :
         {RelationKind::attention, RelationKind::spatial, RelationKind::contact}) {
      for (const auto& relation : vocab.relations(kind)) {
        RelationTrack track;
        for (int frame = 1; frame <= 3; ++frame) {
          auto present = [&](const std::vector<FrameGraph>& frames) {
            const ObjectState* s = frames[static_cast<std::size_t>(frame - 1)].find("broom");
            const auto& names = s->relations(kind);
            return std::find(names.begin(), names.end(), relation) != names.end();
          };
          track.truth.push_back(present(pair.truth) ? 1 : 0);
          track.prob.push_back(present(pair.predicted) ? 1.0 : 0.0);
        }
        std::vector<RelationTrack> one{track};
        expected_sum += transition_loss(one, config).value;
        ++relations;
      }
    }
    CHECK(report.aggregate == doctest::Approx(expected_sum / relations).epsilon(1e-12));
  }
}
