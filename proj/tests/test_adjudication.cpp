// Copyright 2026 The GonStat Authors
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

#include "gonstat/adjudication.hpp"

#include <vector>

#include "doctest.h"
#include "gonstat/errors.hpp"
#include "gonstat/rng.hpp"
#include "oracles.hpp"

using namespace gonstat;

namespace {

// A full record with every feature at code `fill` and the given GON risk.
GradeRecord record(const std::string& image, const std::string& grader,
                   int round, int seq, GonRisk gon, int fill = 1) {
  GradeRecord r;
  r.image_id = image;
  r.grader_id = grader;
  r.role = GraderRole::kGlaucomaSpecialist;
  r.round = round;
  r.seq = seq;
  r.gon = gon;
  for (FeatureId f : kAllFeatures) {
    int code = std::min(fill, level_count(f));
    r.feature[static_cast<size_t>(f)] = code;
  }
  return r;
}

void set_feature(GradeRecord& r, FeatureId f, std::optional<int> code) {
  size_t i = static_cast<size_t>(f);
  r.feature[i] = code;
  r.feature_gradability[i] =
      code ? Gradability::kGradable : Gradability::kUngradable;
}

void set_gon(GradeRecord& r, std::optional<GonRisk> gon) {
  r.gon = gon;
  r.gon_gradability = gon ? Gradability::kGradable : Gradability::kUngradable;
}

}  // namespace

TEST_CASE("ordinal_median3 basics") {
  CHECK(ordinal_median3(1, 1, 1) == 1);
  CHECK(ordinal_median3(1, 3, 3) == 3);
  CHECK(ordinal_median3(2, 1, 2) == 2);
  CHECK(ordinal_median3(1, 2, 3) == 2);
  CHECK(ordinal_median3(3, 1, 2) == 2);
}

TEST_CASE("ordinal_median3 is permutation-invariant and picks an input") {
  SplitMix64 g(404);
  for (int trial = 0; trial < 500; ++trial) {
    int a = 1 + static_cast<int>(g.next_below(9));
    int b = 1 + static_cast<int>(g.next_below(9));
    int c = 1 + static_cast<int>(g.next_below(9));
    int m = ordinal_median3(a, b, c);
    CHECK(m == ordinal_median3(a, c, b));
    CHECK(m == ordinal_median3(b, a, c));
    CHECK(m == ordinal_median3(c, b, a));
    CHECK((m == a || m == b || m == c));
    CHECK(m >= std::min({a, b, c}));
    CHECK(m <= std::max({a, b, c}));
  }
}

TEST_CASE("ordinal_median3 exhaustive: majority wins, all-distinct -> middle") {
  for (int levels = 2; levels <= 9; ++levels) {
    for (int a = 1; a <= levels; ++a) {
      for (int b = 1; b <= levels; ++b) {
        for (int c = 1; c <= levels; ++c) {
          int m = ordinal_median3(a, b, c);
          // Counting oracle for the majority case.
          int count_a = (a == b) + (a == c) + 1;
          int count_b = (b == a) + (b == c) + 1;
          int count_c = (c == a) + (c == b) + 1;
          if (count_a >= 2) {
            CHECK(m == a);
          } else if (count_b >= 2) {
            CHECK(m == b);
          } else if (count_c >= 2) {
            CHECK(m == c);
          } else {
            // All distinct: the middle code.
            int lo = std::min({a, b, c});
            int hi = std::max({a, b, c});
            CHECK(m != lo);
            CHECK(m != hi);
            CHECK((m == a || m == b || m == c));
          }
        }
      }
    }
  }
}

TEST_CASE("identical round-1 grades resolve by round-1 consensus") {
  std::vector<GradeRecord> log = {
      record("im1", "g1", 1, 1, GonRisk::kHighRisk, 2),
      record("im1", "g2", 1, 2, GonRisk::kHighRisk, 2),
      record("im1", "g3", 1, 3, GonRisk::kHighRisk, 2),
  };
  ReferenceStandard ref = resolve_image(log);
  CHECK(ref.resolution == Resolution::kConsensusRound1);
  CHECK(ref.n_reviews == 3);
  CHECK(ref.gon == GonRisk::kHighRisk);
  CHECK_FALSE(ref.excluded);
  REQUIRE(ref.labels.refer.has_value());
  CHECK(*ref.labels.refer);
}

TEST_CASE("median over latest round-2 GON grades") {
  // Round 1 disagrees; all three revise in round 2 to (LowRisk, HighRisk,
  // HighRisk) with matching features; GON resolves to HighRisk by median.
  std::vector<GradeRecord> log = {
      record("im2", "g1", 1, 1, GonRisk::kNonGlaucomatous),
      record("im2", "g2", 1, 2, GonRisk::kLikely),
      record("im2", "g3", 1, 3, GonRisk::kHighRisk),
      record("im2", "g1", 2, 1, GonRisk::kLowRisk),
      record("im2", "g2", 2, 2, GonRisk::kHighRisk),
      record("im2", "g3", 2, 3, GonRisk::kHighRisk),
  };
  ReferenceStandard ref = resolve_image(log);
  CHECK(ref.resolution == Resolution::kMedian);
  CHECK(ref.n_reviews == 6);
  CHECK(ref.gon == GonRisk::kHighRisk);
  REQUIRE(ref.labels.refer.has_value());
  CHECK(*ref.labels.refer);
}

TEST_CASE("six-review log with a No/Possible/Yes spread takes the middle") {
  std::vector<GradeRecord> log = {
      record("im3", "g1", 1, 1, GonRisk::kLowRisk),
      record("im3", "g2", 1, 2, GonRisk::kLowRisk),
      record("im3", "g3", 1, 3, GonRisk::kLowRisk),
  };
  // Features all agree except notch: latest grades end up No, Possible, Yes.
  set_feature(log[0], FeatureId::kNotch, 1);
  set_feature(log[1], FeatureId::kNotch, 2);
  set_feature(log[2], FeatureId::kNotch, 3);
  for (int i = 0; i < 3; ++i) {
    GradeRecord r2 = log[static_cast<size_t>(i)];
    r2.round = 2;
    r2.seq = i + 1;
    log.push_back(r2);
  }
  ReferenceStandard ref = resolve_image(log);
  CHECK(ref.resolution == Resolution::kMedian);
  CHECK(ref.n_reviews == 6);
  CHECK(ref.feature[static_cast<size_t>(FeatureId::kNotch)] == 2);
  // Possible binarizes positive for notch.
  CHECK(ref.labels.feature[static_cast<size_t>(FeatureId::kNotch)] == true);
}

TEST_CASE("consensus during round 2 stops the replay") {
  std::vector<GradeRecord> log = {
      record("im4", "g1", 1, 1, GonRisk::kLowRisk),
      record("im4", "g2", 1, 2, GonRisk::kHighRisk),
      record("im4", "g3", 1, 3, GonRisk::kHighRisk),
      record("im4", "g1", 2, 1, GonRisk::kHighRisk),
  };
  ReferenceStandard ref = resolve_image(log);
  CHECK(ref.resolution == Resolution::kConsensusRound2);
  CHECK(ref.n_reviews == 4);
  CHECK(ref.gon == GonRisk::kHighRisk);
}

TEST_CASE("round-2 records after consensus are audit-only") {
  std::vector<GradeRecord> log = {
      record("im5", "g1", 1, 1, GonRisk::kLowRisk),
      record("im5", "g2", 1, 2, GonRisk::kHighRisk),
      record("im5", "g3", 1, 3, GonRisk::kHighRisk),
      record("im5", "g1", 2, 1, GonRisk::kHighRisk),
      // Later revision would break consensus again; it must not count.
      record("im5", "g2", 2, 2, GonRisk::kNonGlaucomatous),
  };
  ReferenceStandard ref = resolve_image(log);
  CHECK(ref.resolution == Resolution::kConsensusRound2);
  CHECK(ref.n_reviews == 4);
  CHECK(ref.gon == GonRisk::kHighRisk);
}

TEST_CASE("majority-ungradable GON excludes the image") {
  std::vector<GradeRecord> log = {
      record("im6", "g1", 1, 1, GonRisk::kLowRisk),
      record("im6", "g2", 1, 2, GonRisk::kHighRisk),
      record("im6", "g3", 1, 3, GonRisk::kLowRisk),
  };
  set_gon(log[0], std::nullopt);
  set_gon(log[1], std::nullopt);
  ReferenceStandard ref = resolve_image(log);
  CHECK(ref.excluded);
  CHECK_FALSE(ref.gon.has_value());
  CHECK_FALSE(ref.labels.refer.has_value());
  // Features still resolve.
  CHECK(ref.feature[static_cast<size_t>(FeatureId::kNotch)].has_value());
}

TEST_CASE("majority-ungradable feature is excluded without excluding image") {
  std::vector<GradeRecord> log = {
      record("im7", "g1", 1, 1, GonRisk::kLowRisk),
      record("im7", "g2", 1, 2, GonRisk::kHighRisk),
      record("im7", "g3", 1, 3, GonRisk::kLowRisk),
  };
  set_feature(log[0], FeatureId::kBetaPpa, std::nullopt);
  set_feature(log[2], FeatureId::kBetaPpa, std::nullopt);
  ReferenceStandard ref = resolve_image(log);
  CHECK_FALSE(ref.excluded);
  CHECK(ref.gon == GonRisk::kLowRisk);
  CHECK_FALSE(ref.feature[static_cast<size_t>(FeatureId::kBetaPpa)].has_value());
  CHECK_FALSE(
      ref.labels.feature[static_cast<size_t>(FeatureId::kBetaPpa)].has_value());
}

TEST_CASE("two surviving codes that disagree resolve to the lower middle") {
  std::vector<GradeRecord> log = {
      record("im8", "g1", 1, 1, GonRisk::kLowRisk),
      record("im8", "g2", 1, 2, GonRisk::kHighRisk),
      record("im8", "g3", 1, 3, GonRisk::kLowRisk),
  };
  // VCDR: one grader ungradable, the others 0.3 and 0.7 -> floor mean 0.5.
  set_feature(log[0], FeatureId::kVerticalCdr, std::nullopt);
  set_feature(log[1], FeatureId::kVerticalCdr, 3);
  set_feature(log[2], FeatureId::kVerticalCdr, 7);
  // Notch: adjacent pair (possible, yes) -> possible.
  set_feature(log[0], FeatureId::kNotch, std::nullopt);
  set_feature(log[1], FeatureId::kNotch, 2);
  set_feature(log[2], FeatureId::kNotch, 3);
  ReferenceStandard ref = resolve_image(log);
  CHECK(ref.feature[static_cast<size_t>(FeatureId::kVerticalCdr)] == 5);
  CHECK(ref.feature[static_cast<size_t>(FeatureId::kNotch)] == 2);
}

TEST_CASE("malformed logs are rejected") {
  // Two graders only.
  std::vector<GradeRecord> two = {
      record("im9", "g1", 1, 1, GonRisk::kLowRisk),
      record("im9", "g2", 1, 2, GonRisk::kLowRisk),
  };
  CHECK_THROWS_AS(resolve_image(two), MalformedLog);

  // A third review by one grader.
  std::vector<GradeRecord> thrice = {
      record("imA", "g1", 1, 1, GonRisk::kLowRisk),
      record("imA", "g2", 1, 2, GonRisk::kHighRisk),
      record("imA", "g3", 1, 3, GonRisk::kLowRisk),
      record("imA", "g1", 2, 1, GonRisk::kLowRisk),
      record("imA", "g1", 2, 2, GonRisk::kHighRisk),
  };
  CHECK_THROWS_AS(resolve_image(thrice), MalformedLog);

  // Duplicate seq within round 2.
  std::vector<GradeRecord> dup = {
      record("imB", "g1", 1, 1, GonRisk::kLowRisk),
      record("imB", "g2", 1, 2, GonRisk::kHighRisk),
      record("imB", "g3", 1, 3, GonRisk::kLowRisk),
      record("imB", "g1", 2, 1, GonRisk::kLowRisk),
      record("imB", "g2", 2, 1, GonRisk::kHighRisk),
  };
  CHECK_THROWS_AS(resolve_image(dup), MalformedLog);

  // Round-2 record from an unknown grader.
  std::vector<GradeRecord> stranger = {
      record("imC", "g1", 1, 1, GonRisk::kLowRisk),
      record("imC", "g2", 1, 2, GonRisk::kHighRisk),
      record("imC", "g3", 1, 3, GonRisk::kLowRisk),
      record("imC", "g4", 2, 1, GonRisk::kLowRisk),
  };
  CHECK_THROWS_AS(resolve_image(stranger), MalformedLog);

  // Mixed image ids.
  std::vector<GradeRecord> mixed = {
      record("imD", "g1", 1, 1, GonRisk::kLowRisk),
      record("imE", "g2", 1, 2, GonRisk::kLowRisk),
      record("imD", "g3", 1, 3, GonRisk::kLowRisk),
  };
  CHECK_THROWS_AS(resolve_image(mixed), MalformedLog);

  CHECK_THROWS_AS(resolve_image({}), MalformedLog);
}

TEST_CASE("single-round resolution") {
  std::vector<GradeRecord> agree = {
      record("imF", "g1", 1, 1, GonRisk::kLowRisk),
      record("imF", "g2", 1, 2, GonRisk::kLowRisk),
      record("imF", "g3", 1, 3, GonRisk::kLowRisk),
  };
  ReferenceStandard ref = resolve_single_round(agree);
  CHECK(ref.resolution == Resolution::kConsensusRound1);
  CHECK(ref.n_reviews == 3);

  std::vector<GradeRecord> spread = {
      record("imG", "g1", 1, 1, GonRisk::kNonGlaucomatous),
      record("imG", "g2", 1, 2, GonRisk::kHighRisk),
      record("imG", "g3", 1, 3, GonRisk::kLikely),
  };
  ReferenceStandard median = resolve_single_round(spread);
  CHECK(median.resolution == Resolution::kMedian);
  CHECK(median.gon == GonRisk::kHighRisk);

  std::vector<GradeRecord> with_r2 = spread;
  with_r2.push_back(record("imG", "g1", 2, 1, GonRisk::kHighRisk));
  CHECK_THROWS_AS(resolve_single_round(with_r2), MalformedLog);
}

TEST_CASE("circumlinear three-way tie honours the order policy") {
  std::vector<GradeRecord> log = {
      record("imH", "g1", 1, 1, GonRisk::kLowRisk),
      record("imH", "g2", 1, 2, GonRisk::kLowRisk),
      record("imH", "g3", 1, 3, GonRisk::kLowRisk),
  };
  set_feature(log[0], FeatureId::kCircumlinear, 1);
  set_feature(log[1], FeatureId::kCircumlinear, 3);
  set_feature(log[2], FeatureId::kCircumlinear, 4);
  MedianPolicy ordered;
  ReferenceStandard ref = resolve_image(log, ordered);
  CHECK(ref.feature[static_cast<size_t>(FeatureId::kCircumlinear)] == 3);

  MedianPolicy unordered;
  unordered.circumlinear_ordered = false;
  CHECK_THROWS_AS(resolve_image(log, unordered), NonOrdinalTie);
  // Majority agreement resolves even without an order.
  set_feature(log[1], FeatureId::kCircumlinear, 1);
  ReferenceStandard majority = resolve_image(log, unordered);
  CHECK(majority.feature[static_cast<size_t>(FeatureId::kCircumlinear)] == 1);
}

TEST_CASE("replay is deterministic and matches the brute-force oracle") {
  SplitMix64 g(90210);
  int consensus_r1 = 0, consensus_r2 = 0, median = 0;
  for (int trial = 0; trial < 400; ++trial) {
    auto log = test_oracles::random_log(g, "im" + std::to_string(trial));
    ReferenceStandard a = resolve_image(log);
    ReferenceStandard b = resolve_image(log);
    CHECK(test_oracles::same_reference(a, b));
    ReferenceStandard want = test_oracles::replay_oracle(log);
    CAPTURE(trial);
    CHECK(test_oracles::same_reference(a, want));
    switch (a.resolution) {
      case Resolution::kConsensusRound1: ++consensus_r1; break;
      case Resolution::kConsensusRound2: ++consensus_r2; break;
      case Resolution::kMedian: ++median; break;
    }
  }
  // The generator must exercise each path.
  CHECK(consensus_r1 > 0);
  CHECK(consensus_r2 > 0);
  CHECK(median > 0);
}

TEST_CASE("resolve_log groups by image and sorts output") {
  std::vector<GradeRecord> all;
  for (const char* image : {"zz", "aa", "mm"}) {
    for (int i = 0; i < 3; ++i) {
      all.push_back(record(image, "g" + std::to_string(i + 1), 1, i + 1,
                           GonRisk::kLowRisk));
    }
  }
  auto refs = resolve_log(all);
  REQUIRE(refs.size() == 3);
  CHECK(refs[0].image_id == "aa");
  CHECK(refs[1].image_id == "mm");
  CHECK(refs[2].image_id == "zz");
}

TEST_CASE("method_agreement cross-tabulates and counts changes") {
  std::vector<GonRisk> a = {GonRisk::kNonGlaucomatous, GonRisk::kLowRisk,
                            GonRisk::kHighRisk, GonRisk::kLikely,
                            GonRisk::kLowRisk};
  std::vector<GonRisk> b = {GonRisk::kNonGlaucomatous, GonRisk::kHighRisk,
                            GonRisk::kHighRisk, GonRisk::kHighRisk,
                            GonRisk::kNonGlaucomatous};
  MethodAgreement m = method_agreement(a, b);
  CHECK(m.n == 5);
  CHECK(m.counts[0][0] == 1);
  CHECK(m.counts[1][2] == 1);
  CHECK(m.counts[2][2] == 1);
  CHECK(m.counts[3][2] == 1);
  CHECK(m.counts[1][0] == 1);
  CHECK(m.n_label_changes == 3);
  // Only low->high crosses the referable boundary.
  CHECK(m.n_referral_changes == 1);
  CHECK_THROWS_AS(method_agreement(a, {GonRisk::kLowRisk}), LengthMismatch);
}

TEST_CASE("consensus logs never resolve through the median path") {
  SplitMix64 g(1717);
  for (int trial = 0; trial < 300; ++trial) {
    auto log = test_oracles::random_log(g, "im" + std::to_string(trial));
    ReferenceStandard ref = resolve_image(log);
    bool unanimous_somewhere =
        test_oracles::replay_oracle(log).resolution != Resolution::kMedian;
    if (unanimous_somewhere) {
      CHECK(ref.resolution != Resolution::kMedian);
    }
    if (ref.resolution == Resolution::kConsensusRound1) {
      CHECK(ref.n_reviews == 3);
    }
  }
}
