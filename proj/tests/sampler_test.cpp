#include <gtest/gtest.h>

#include <cmath>

#include "scenegen/dsl/compile.hpp"
#include "scenegen/sampler.hpp"
#include "test_support.hpp"

using namespace scenegen;

namespace {

struct BareScope : EvalScope {
  Rng r;
  explicit BareScope(std::uint64_t seed) : r(seed) {}
  std::optional<Value> lookup(const std::string&) const override { return std::nullopt; }
  std::optional<ObjectState> object_state(int) const override { return std::nullopt; }
  Rng& rng() override { return r; }
};

double eval_once(const std::string& expr, BareScope& scope) {
  return evaluate_scalar(dsl::parse_expression(dsl::tokenize(expr)), scope);
}

Scene sample(const std::string& src, std::uint64_t seed, const WorldModel& world = {}) {
  return sample_scene(dsl::compile(src), world, seed);
}

/// Evaluates `e` against a finished scene, with the same bindings sampling used.
bool holds(const dsl::Expr& e, const dsl::CheckedProgram& prog, const Scene& s) {
  Rng rng(0);
  SamplingScope scope(prog, rng);
  scope.params() = s.params;
  scope.placed() = s.objects;
  return evaluate_bool(e, scope);
}

bool inside(const Footprint& f, Vec2 p) {
  const Vec2 fw = heading_vector(f.heading), lw{-fw.y, fw.x};
  const Vec2 d = p - f.center;
  return std::abs(d.dot(fw)) <= f.length / 2.0 && std::abs(d.dot(lw)) <= f.width / 2.0;
}

/// Overlap decided by scanning a grid with spacing `step` over the union bbox.
bool grid_overlap(const Footprint& a, const Footprint& b, double step) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& f : {a, b})
    for (Vec2 c : f.corners()) {
      x0 = std::min(x0, c.x), x1 = std::max(x1, c.x);
      y0 = std::min(y0, c.y), y1 = std::max(y1, c.y);
    }
  const long nx = std::lround((x1 - x0) / step), ny = std::lround((y1 - y0) / step);
  for (long i = 0; i <= nx; ++i)
    for (long j = 0; j <= ny; ++j) {
      const Vec2 p{x0 + i * step, y0 + j * step};
      if (inside(a, p) && inside(b, p)) return true;
    }
  return false;
}

}  // namespace

// --- distributions --------------------------------------------------------------

TEST(Distributions, DegenerateUniformIsExact) {
  BareScope s(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(eval_once("Uniform(3, 3)", s), 3.0);
}

TEST(Distributions, ZeroSigmaNormalIsExact) {
  BareScope s(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(eval_once("Normal(0, 0)", s), 0.0);
}

TEST(Distributions, UniformVariance) {
  BareScope s(7);
  const auto e = dsl::parse_expression(dsl::tokenize("Uniform(0, 10)"));
  const int n = 100000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = evaluate_scalar(e, s);
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 10.0);
    sum += x, sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = (sum2 - n * mean * mean) / (n - 1);
  EXPECT_GE(var, 8.0);
  EXPECT_LE(var, 8.7);
}

TEST(Distributions, NormalMoments) {
  BareScope s(11);
  const auto e = dsl::parse_expression(dsl::tokenize("Normal(2, 3)"));
  const int n = 100000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = evaluate_scalar(e, s);
    sum += x, sum2 += x * x;
  }
  const double mean = sum / n, var = sum2 / n - mean * mean;
  // sd of the mean is 3/sqrt(n) ~ 0.0095
  EXPECT_NEAR(mean, 2.0, 0.04);
  EXPECT_NEAR(var, 9.0, 0.3);
}

TEST(Distributions, NormalUsesTwoDraws) {
  BareScope s(5);
  Rng ref(5);
  const double u1 = ref.next_double(), u2 = ref.next_double();
  const double expect = 1.0 + 2.0 * std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * kPi * u2);
  EXPECT_DOUBLE_EQ(eval_once("Normal(1, 2)", s), expect);
  EXPECT_EQ(s.r, ref);
}

TEST(Distributions, OptionsPicksUniformly) {
  BareScope s(3);
  const auto e = dsl::parse_expression(dsl::tokenize("Options([1, 2, 3, 4])"));
  std::array<int, 4> counts{};
  const int n = 40000;
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(evaluate_scalar(e, s)) - 1]++;
  // binomial sd ~ 87
  for (int c : counts) EXPECT_NEAR(c, n / 4, 400);
}

TEST(Distributions, DomainErrors) {
  BareScope s(1);
  EXPECT_THROW(eval_once("Uniform(2, 1)", s), DomainError);
  EXPECT_THROW(eval_once("Normal(0, -1)", s), DomainError);
  EXPECT_THROW(eval_once("1 / 0", s), EvalError);
}

// --- specifiers -------------------------------------------------------------------

TEST(Specifiers, AtFacingZero) {
  Scene s = sample("ego = new Car at (0, 0), facing 0", 1);
  ASSERT_EQ(s.objects.size(), 1u);
  EXPECT_EQ(s.objects[0].x, 0.0);
  EXPECT_EQ(s.objects[0].y, 0.0);
  EXPECT_EQ(s.objects[0].heading, 0.0);
  EXPECT_TRUE(s.objects[0].isEgo);
  EXPECT_EQ(s.seed, 1u);
}

TEST(Specifiers, AheadOf) {
  Scene s = sample("ego = new Car at (0, 0)\nnpc = new Car ahead of ego by 5", 1);
  const auto& n = s.objects[1];
  EXPECT_NEAR(n.x, 0.0, 1e-12);
  EXPECT_NEAR(n.y, 5.0, 1e-12);
  EXPECT_NEAR(n.heading, 0.0, 1e-12);
}

TEST(Specifiers, LeftOf) {
  Scene s = sample("ego = new Car at (0, 0)\nnpc = new Car left of ego by 3", 1);
  EXPECT_NEAR(s.objects[1].x, -3.0, 1e-12);
  EXPECT_NEAR(s.objects[1].y, 0.0, 1e-12);
}

TEST(Specifiers, LeftOfByTwo) {
  // A pedestrian is narrow enough that a 2 m lateral offset does not overlap.
  Scene s = sample("ego = new Pedestrian at (0, 0)\nnpc = new Pedestrian left of ego by 2", 1);
  EXPECT_NEAR(s.objects[1].x, -2.0, 1e-12);
  EXPECT_NEAR(s.objects[1].y, 0.0, 1e-12);
  EXPECT_NEAR(s.objects[1].heading, 0.0, 1e-12);
}

TEST(Specifiers, BehindAndRightOfRotatedReference) {
  Scene s = sample(
      "ego = new Car at (10, 10), facing 90\n"
      "a = new Car behind ego by 6\n"
      "b = new Car right of ego by 4",
      1);
  // heading 90 deg points along -x
  EXPECT_NEAR(s.objects[1].x, 16.0, 1e-12);
  EXPECT_NEAR(s.objects[1].y, 10.0, 1e-12);
  EXPECT_NEAR(s.objects[2].x, 10.0, 1e-12);
  EXPECT_NEAR(s.objects[2].y, 14.0, 1e-12);
  EXPECT_NEAR(s.objects[2].heading, kPi / 2, 1e-12);
}

TEST(Specifiers, FacingTowardPoint) {
  Scene s = sample("ego = new Car at (0, 0), facing toward (-5, 0)", 1);
  EXPECT_NEAR(s.objects[0].heading, kPi / 2, 1e-12);
  s = sample("ego = new Car at (0, 0), facing toward (0, -5)", 1);
  EXPECT_NEAR(s.objects[0].heading, kPi, 1e-12);
}

TEST(Specifiers, HeadingsAreNormalized) {
  Scene s = sample("ego = new Car at (0, 0), facing 270", 1);
  EXPECT_NEAR(s.objects[0].heading, -kPi / 2, 1e-12);
  s = sample("ego = new Car at (0, 0), facing -180", 1);
  EXPECT_NEAR(s.objects[0].heading, kPi, 1e-12);
}

TEST(Specifiers, WithProperties) {
  Scene s = sample("ego = new Car at (0, 0), with length 6, with width 2.2, with colorClass \"building\"", 1);
  EXPECT_EQ(s.objects[0].length, 6.0);
  EXPECT_EQ(s.objects[0].width, 2.2);
  EXPECT_EQ(s.objects[0].height, 1.5);
  EXPECT_EQ(s.objects[0].semantic, SemanticClass::Building);
}

TEST(Specifiers, Errors) {
  EXPECT_THROW(sample("ego = new Car on lane(\"nowhere\")", 1), UnknownLane);
}

TEST(Specifiers, OnLaneOffsetAndTangent) {
  WorldModel w = test::two_lane_world();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Scene s = sample("ego = new Car on lane(\"oncoming\") offset by 1", seed, w);
    const auto& o = s.objects[0];
    EXPECT_NEAR(o.x, -2.5, 1e-9);  // lane runs toward -y, so its left is +x
    EXPECT_NEAR(std::abs(o.heading), kPi, 1e-12);
  }
}

// --- sampling ----------------------------------------------------------------------

TEST(Sampling, TrivialProgram) {
  Scene s = sample("ego = new Car at (0,0)", 99);
  ASSERT_EQ(s.objects.size(), 1u);
  EXPECT_EQ(s.objects[0].x, 0.0);
  EXPECT_EQ(s.objects[0].y, 0.0);
  EXPECT_EQ(s.rejections, 0);
}

TEST(Sampling, HardRequirementRejects) {
  const auto prog = dsl::compile(
      "ego = new Car at (0, 0)\n"
      "npc = new Car at (Uniform(-12, 12), Uniform(-12, 12))\n"
      "require dist(ego, npc) > 10");
  int rejected = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Scene s = sample_scene(prog, {}, seed);
    EXPECT_GT((Vec2{s.objects[1].x, s.objects[1].y}).norm(), 10.0);
    rejected += s.rejections;
  }
  EXPECT_GT(rejected, 0);
}

TEST(Sampling, BudgetExhausted) {
  const auto prog = dsl::compile("ego = new Car at (0, 0)\nrequire false");
  try {
    sample_scene(prog, {}, 1, 25);
    FAIL();
  } catch (const RejectionBudgetExhausted& e) {
    EXPECT_EQ(e.attempts(), 25);
    EXPECT_NE(e.reason().find("line 2"), std::string::npos);
  }
  EXPECT_THROW(sample_scene(prog, {}, 1, 0), SamplingError);
}

TEST(Sampling, NoOverlapUnlessAllowed) {
  const std::string base =
      "ego = new Car at (0, 0)\n"
      "npc = new Car at (Uniform(-3, 3), Uniform(-5, 5))";
  const auto prog = dsl::compile(base);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Scene s = sample_scene(prog, {}, seed);
    EXPECT_FALSE(footprints_overlap(s.objects[0], s.objects[1]));
  }
  const auto loose = dsl::compile(base + ", with allowCollisions true");
  int overlapping = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Scene s = sample_scene(loose, {}, seed);
    EXPECT_EQ(s.rejections, 0);
    overlapping += footprints_overlap(s.objects[0], s.objects[1]);
  }
  EXPECT_GT(overlapping, 0);
}

TEST(Sampling, SoftRequirementActivationFrequency) {
  // Each attempt accepts with P(x > 5 or inactive) = 0.5 + 0.2 * 0.5, so
  // P(x > 5 | accepted) = 0.5 / 0.6 = 0.8333, sd over 20000 scenes ~ 0.0026.
  const auto prog = dsl::compile("param x = Uniform(0, 10)\nego = new Car at (0, 0)\nrequire[0.8] x > 5");
  const int n = 20000;
  int above = 0;
  for (int i = 0; i < n; ++i) {
    Scene s = sample_scene(prog, {}, static_cast<std::uint64_t>(i));
    above += std::get<double>(s.params.at("x")) > 5.0;
  }
  const double frac = static_cast<double>(above) / n;
  EXPECT_GE(frac, 0.82);
  EXPECT_LE(frac, 0.847);
}

TEST(Sampling, Deterministic) {
  const WorldModel w = test::two_lane_world();
  for (const auto& f : test::corpus_files()) {
    const auto prog = test::compile_file(f);
    for (std::uint64_t seed : {0ull, 1ull, 12345ull}) {
      EXPECT_EQ(sample_scene(prog, w, seed), sample_scene(prog, w, seed)) << f;
    }
    EXPECT_NE(sample_scene(prog, w, 1), sample_scene(prog, w, 2)) << f;
  }
}

TEST(Sampling, HardConstraintSoundnessOverCorpus) {
  const WorldModel w = test::two_lane_world();
  for (const auto& f : test::corpus_files()) {
    SCOPED_TRACE(f.string());
    const auto prog = test::compile_file(f);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const Scene s = sample_scene(prog, w, seed);
      int egos = 0;
      for (const auto& o : s.objects) {
        egos += o.isEgo;
        EXPECT_GT(o.length, 0.0);
        EXPECT_LE(std::abs(o.heading), kPi);
        EXPECT_GT(o.heading, -kPi);
      }
      EXPECT_EQ(egos, 1);
      for (const auto& r : prog.program.requirements) {
        if (r.probability) continue;
        ASSERT_TRUE(holds(r.condition, prog, s)) << "seed " << seed;
      }
      for (std::size_t i = 0; i < s.objects.size(); ++i) {
        for (std::size_t j = i + 1; j < s.objects.size(); ++j)
          EXPECT_FALSE(footprints_overlap(s.objects[i], s.objects[j]));
        for (const auto& p : w.staticProps) EXPECT_FALSE(footprints_overlap(s.objects[i], p));
      }
    }
  }
}

TEST(Sampling, OnLanePointsStayInsideLane) {
  WorldModel w = test::two_lane_world();
  w.lanes.push_back({"bend", {{30, 0}, {40, 10}, {40, 30}, {20, 40}}, 4.0});
  const auto prog = dsl::compile(
      "ego = new Pedestrian on lane(\"bend\") offset by Uniform(-2, 2)\n"
      "a = new Car on lane(\"main\") offset by Uniform(-1.75, 1.75), with allowCollisions true\n"
      "b = new Car on lane(\"curb\"), with allowCollisions true");
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Scene s = sample_scene(prog, w, seed);
    const char* lanes[] = {"bend", "main", "curb"};
    for (int i = 0; i < 3; ++i) {
      const Lane& l = *w.lane(lanes[i]);
      const auto& o = s.objects[static_cast<std::size_t>(i)];
      EXPECT_LE(distance_to_polyline(Vec2{o.x, o.y}, l.centerline), l.width / 2 + 1e-9);
    }
  }
}

// --- overlap ------------------------------------------------------------------------

TEST(Overlap, Examples) {
  const Footprint a{{0, 0}, 0, 4, 2};
  EXPECT_TRUE(rectangles_overlap(a, a));
  EXPECT_FALSE(rectangles_overlap(a, Footprint{{10, 0}, 0, 4, 2}));
  EXPECT_FALSE(rectangles_overlap(a, Footprint{{0, 10}, 0, 4, 2}));
}

TEST(Overlap, RotatedUnitSquaresAgreeWithGridOracle) {
  const Footprint a{{0, 0}, 0, 1, 1};
  const Footprint b{{1.2, 0}, kPi / 4, 1, 1};
  const bool oracle = grid_overlap(a, b, 0.001);
  EXPECT_TRUE(oracle);
  EXPECT_EQ(rectangles_overlap(a, b), oracle);
}

TEST(Overlap, RandomPairsAgreeWithGridOracle) {
  Rng rng(2024);
  int disagreements = 0, overlaps = 0;
  for (int i = 0; i < 300; ++i) {
    auto r = [&](double lo, double hi) { return lo + rng.next_double() * (hi - lo); };
    const Footprint a{{0, 0}, r(-kPi, kPi), r(0.5, 4), r(0.5, 2)};
    const Footprint b{{r(-4, 4), r(-4, 4)}, r(-kPi, kPi), r(0.5, 4), r(0.5, 2)};
    const bool sat = rectangles_overlap(a, b);
    const bool grid = grid_overlap(a, b, 0.01);
    overlaps += sat;
    // the grid can only miss slivers thinner than its spacing
    if (grid && !sat) ++disagreements;
    if (sat && !grid) {
      Footprint grown = a;
      grown.length += 0.03, grown.width += 0.03;
      if (!grid_overlap(grown, b, 0.01)) ++disagreements;
    }
  }
  EXPECT_EQ(disagreements, 0);
  EXPECT_GT(overlaps, 30);
}
