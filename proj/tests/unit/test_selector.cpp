#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "semsec/errors.hpp"
#include "semsec/feature_maps.hpp"
#include "semsec/importance.hpp"
#include "semsec/rng.hpp"
#include "semsec/selector.hpp"

using namespace semsec;

namespace {

ImportanceVector make_iv(std::vector<double> scores, double confidence) {
  ImportanceVector iv;
  iv.raw = scores;
  iv.scores = std::move(scores);
  iv.confidence = confidence;
  return iv;
}

}  // namespace

TEST_SUITE("selector") {
  TEST_CASE("strict inequality at the boundary") {
    const auto sel = select_maps(make_iv({0.5, 0.3, 0.15, 0.05}, 1.0), 0.2);
    CHECK(sel.indices == std::vector<std::size_t>{0, 1, 2});
    CHECK(sel.lambda == 3);
    CHECK(sel.residual == doctest::Approx(0.05));
  }

  TEST_CASE("zero budget sends everything") {
    const auto sel = select_maps(make_iv({0.1, 0.6, 0.3}, 1.0), 0.0);
    CHECK(sel.lambda == 3);
    CHECK(sel.indices == std::vector<std::size_t>{1, 2, 0});
  }

  TEST_CASE("budget above the confidence sends nothing") {
    const auto sel = select_maps(make_iv({0.5, 0.3}, 0.8), 0.9);
    CHECK(sel.lambda == 0);
    CHECK(sel.residual == 0.8);
  }

  TEST_CASE("ties broken by ascending index") {
    CHECK(score_order({0.2, 0.4, 0.2, 0.4}) == std::vector<std::size_t>{1, 3, 0, 2});
  }

  TEST_CASE("negative epsilon") {
    CHECK_THROWS_AS(select_maps(make_iv({1.0}, 1.0), -0.1), ParameterError);
  }

  TEST_CASE("greedy matches brute force and is monotone") {
    Rng rng(17);
    for (int t = 0; t < 2000; ++t) {
      const std::size_t n = 1 + rng.below(12);
      std::vector<double> s(n);
      for (auto& v : s) {
        v = rng.below(4) == 0 ? 0.0 : rng.uniform();
      }
      const double total = std::accumulate(s.begin(), s.end(), 0.0);
      const double conf = 0.2 + 0.8 * rng.uniform();
      for (auto& v : s) {
        v = total > 0 ? v * conf / total : 0.0;
      }
      const auto iv = make_iv(s, conf);
      std::size_t prev = n;
      for (int e = 0; e <= 20; ++e) {
        const double eps = 0.05 * e;
        const auto sel = select_maps(iv, eps);
        CHECK(sel.lambda == oracle::brute_force_lambda(s, conf, eps));
        CHECK(sel.lambda <= prev);
        prev = sel.lambda;
      }
    }
  }

  TEST_CASE("skew-one item at the operating budget") {
    const SynthParams p;
    const Dataset d = synth_dataset(p);
    const HeadParams h = train_head(d, TrainOptions{}, p.n_classes);
    for (const auto& item : d) {
      CHECK(select_maps(importance(h, item), 0.01).lambda <= 4);
    }
  }

  TEST_CASE("dataset estimate") {
    const SynthParams p;
    const Dataset d = synth_dataset(p);
    const HeadParams h = train_head(d, TrainOptions{}, p.n_classes);
    CHECK(semantic_entropy_estimate(d, h, 0.0) == 10.0);
    CHECK(semantic_entropy_estimate(d, h, 1.0) == 0.0);
    CHECK_THROWS_AS(semantic_entropy_estimate(Dataset{}, h, 0.1), ParameterError);

    // Item A is classed 0, whose weight spreads over 3 maps; item B is
    // classed 1, spread over all 5.
    HeadParams two_class;
    two_class.n_classes = 2;
    two_class.n_maps = 5;
    two_class.weights = {3, 3, 3, 0, 0, 0.5, 0.5, 0.5, 0.5, 0.5};
    two_class.bias = {0, 0};
    const Dataset two{FeatureMapSet(5, 1, 1, {1, 1, 1, 1, 1}, 0),
                      FeatureMapSet(5, 1, 1, {-1, -1, -1, -1, -1}, 1)};
    CHECK(select_maps(importance(two_class, two[0]), 0.01).lambda == 3);
    CHECK(select_maps(importance(two_class, two[1]), 0.01).lambda == 5);
    CHECK(semantic_entropy_estimate(two, two_class, 0.01) == 4.0);
  }
}
