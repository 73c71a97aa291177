#include "doctest.h"
#include "test_util.hpp"

#include "ecomann/eval.hpp"
#include "ecomann/planner.hpp"
#include "ecomann/train.hpp"

#include <limits>
#include <sstream>

using namespace ecomann;

namespace {

TrainConfig quick_config(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.seed = 3;
  return c;
}

PlanningProblem plane_sphere_problem(std::uint64_t seed) {
  PlanningProblem p;
  p.manifolds = {std::make_shared<SphereManifold>(),
                 std::make_shared<PlaneManifold>(Eigen::Vector3d(0, 0, 1), 0.999)};
  p.q_start = Eigen::Vector3d(1, 0, 0);
  p.box_lo = Eigen::Vector3d::Constant(-2.0);
  p.box_hi = Eigen::Vector3d::Constant(2.0);
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("training is deterministic per seed") {
  const auto ds = gen_sphere(200, 1);
  const auto a = train(ds, quick_config(3));
  const auto b = train(ds, quick_config(3));
  CHECK(a.model.params() == b.model.params());
  CHECK(a.loss_history == b.loss_history);
  CHECK(a.codim == 1);
  auto other = quick_config(3);
  other.seed = 4;
  CHECK(train(ds, other).model.params() != a.model.params());
}

TEST_CASE("training on a sphere halves the loss") {
  const auto ds = gen_sphere(500, 2);
  const auto r = train(ds, quick_config(50));
  REQUIRE(r.loss_history.size() == 50);
  CHECK(r.loss_history.back() < 0.5 * r.loss_history.front());
}

TEST_CASE("learned sphere has one sign inside and the other outside") {
  const auto ds = gen_sphere(500, 2);
  auto c = quick_config(20);
  const auto prep = prepare_training_data(ds, c);
  const auto r = train_prepared(prep, 3, c);
  int inside_pos = 0, outside_pos = 0, inside = 0, outside = 0;
  for (const auto& p : prep.augmented.points) {
    if (p.level == 0) continue;
    const bool pos = r.model.forward(p.point)(0) > 0.0;
    if (p.point.norm() < 1.0) ++inside, inside_pos += pos;
    else ++outside, outside_pos += pos;
  }
  REQUIRE(inside > 0);
  REQUIRE(outside > 0);
  const double in_frac = static_cast<double>(inside_pos) / inside, out_frac = static_cast<double>(outside_pos) / outside;
  CAPTURE(in_frac);
  CAPTURE(out_frac);
  CHECK(std::abs(in_frac - out_frac) >= 0.98);

  // a zero output bias at the start leaves a sign boundary across the data
  c.output_bias_init = 0.0;
  const auto r0 = train_prepared(prep, 3, c);
  int agree = 0;
  for (const auto& [a, b] : prep.augmented.pairs.reflection) agree += r0.model.forward(prep.augmented.points[a].point)(0) > 0.0;
  const double frac0 = static_cast<double>(agree) / static_cast<double>(prep.augmented.pairs.reflection.size());
  CAPTURE(frac0);
  CHECK(frac0 > 0.02);
  CHECK(frac0 < 0.98);
}

TEST_CASE("norm loss alone learns the distance scale of a line") {
  OnManifoldDataset line;
  line.name = "line";
  line.true_codim = 1;
  line.points.resize(200, 2);
  for (int i = 0; i < 200; ++i) line.points.row(i) << -1.0 + 2.0 * i / 199.0, 0.0;
  TrainConfig c = quick_config(1000);
  c.levels = 1;
  c.disable_siamese = true;
  c.disable_alignment = true;
  c.disable_osa = true;
  c.learning_rate = 1e-2;
  // nothing couples signs here, so start from h ~ linear rather than a constant
  c.output_bias_init = 0.0;
  const auto prep = prepare_training_data(line, c);
  const auto r = train_prepared(prep, 2, c);
  double err = 0.0;
  int count = 0;
  for (const auto& a : prep.augmented.points) {
    if (a.level != 1) continue;
    const double e = std::abs(r.model.forward(a.point).norm() - prep.epsilon);
    CHECK(e <= 0.2);
    err += e;
    ++count;
  }
  REQUIRE(count > 0);
  CHECK(err / count <= 0.2 * prep.epsilon);
}

TEST_CASE("training errors") {
  const auto ds = gen_sphere(200, 1);
  auto c = quick_config(2);
  c.learning_rate = 1e200;
  CHECK_THROWS_AS(train(ds, c), TrainingError);
  c = quick_config(2);
  c.batch_size = 0;
  CHECK_THROWS_AS(train(ds, c), ParameterError);
  c = quick_config(2);
  c.w_norm = -1.0;
  CHECK_THROWS_AS(train(ds, c), ParameterError);
}

TEST_CASE("residual metrics") {
  PointMatrix on(2, 3);
  on << 1, 0, 0, 0, 0, -1;
  const auto z = metric_mu(on, GroundTruth::Sphere);
  CHECK(z.mean == doctest::Approx(0.0));
  CHECK(z.std == doctest::Approx(0.0));
  PointMatrix off(2, 3);
  off << 1.1, 0, 0, 0, 0.9, 0;
  const auto m = metric_mu(off, GroundTruth::Sphere);
  CHECK(m.mean == doctest::Approx(0.1));
  CHECK(m.std == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gt_residual(GroundTruth::Circle3D, Eigen::Vector3d(0, 0, 0)) == doctest::Approx(1.0));
  CHECK(gt_residual(GroundTruth::Circle3D, Eigen::Vector3d(2, 0, 1)) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(metric_mu(on, GroundTruth::None), ParameterError);
  const auto ms = mean_std({1.0, 3.0});
  CHECK(ms.mean == 2.0);
  CHECK(ms.std == 1.0);
}

TEST_CASE("success rate") {
  const SphereManifold sphere;
  CHECK(metric_P(sphere, GroundTruth::Sphere, 3) == doctest::Approx(100.0));
  EvalOptions loose;
  loose.threshold = std::numeric_limits<double>::infinity();
  loose.n_samples = 50;
  const LearnedManifold zero(MlpModel(MlpModel::default_dims(3, 1)));
  CHECK(metric_P(zero, GroundTruth::Sphere, 3, loose) == 100.0);
  const auto box = default_sample_box(GroundTruth::PlaneArm3R, 3);
  CHECK(box.hi(0) == doctest::Approx(3.14159265358979));
  const auto s = sample_uniform(default_sample_box(GroundTruth::Sphere, 3), 500, 1);
  CHECK(s.cwiseAbs().maxCoeff() <= 1.5);
  CHECK(s == sample_uniform(default_sample_box(GroundTruth::Sphere, 3), 500, 1));
}

TEST_CASE("ablation harness") {
  const auto ds = gen_sphere(200, 5);
  const TrainConfig base = quick_config(2);
  EvalOptions ev;
  ev.n_samples = 100;
  ev.seed = 9;

  CHECK(ablation_row_names().size() == 7);
  CHECK(ablation_config(base, 1).disable_augmentation);
  CHECK(ablation_config(base, 2).disable_osa);
  CHECK(ablation_config(base, 3).disable_siamese);
  CHECK(ablation_config(base, 6).disable_similar);
  CHECK_THROWS_AS(ablation_config(base, 7), ParameterError);

  const auto rows = run_ablation(ds, base, 1, ev);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0].row == "No Ablation");
  for (const auto& r : rows) CHECK(r.P.std == 0.0);

  const auto plain = train(ds, base);
  const auto rep = evaluate(LearnedManifold(plain.model), ds, ev);
  CHECK(rows[0].P.mean == rep.P);
  CHECK(rows[0].mu_train.mean == rep.mu_train.mean);

  const auto lv = run_level_study(ds, {3, 3}, base, 1, ev);
  REQUIRE(lv.size() == 2);
  CHECK(lv[0].row == "levels=3");
  CHECK(lv[0].P.mean == lv[1].P.mean);

  std::ostringstream csv;
  write_study_csv(csv, rows);
  CHECK(csv.str().rfind("dataset,row,P_mean,P_std,mu_train_mean,mu_train_std,mu_test_mean,mu_test_std,seed\n", 0) == 0);
  CHECK_THROWS_AS(run_ablation(ds, base, 0, ev), ParameterError);
}

TEST_CASE("planner: trivial stage when the start already lies on the next manifold") {
  PlanningProblem p = plane_sphere_problem(1);
  const auto plane = std::make_shared<PlaneManifold>(Eigen::Vector3d(0, 0, 1), 0.0);
  p.manifolds = {plane, plane};
  p.q_start = Eigen::Vector3d::Zero();
  const auto stage = rrt_star_stage(*plane, *plane, p.q_start, p, 1);
  CHECK(stage.success);
  CHECK(stage.tree.nodes.size() == 1);
  const auto path = sequential_plan(p);
  CHECK(path.total_cost == 0.0);
}

TEST_CASE("planner: sphere stage toward a high plane") {
  const auto p = plane_sphere_problem(3);
  const auto path = sequential_plan(p);
  REQUIRE(path.stages.size() == 1);
  const auto& end = path.stages[0].back();
  CHECK(std::abs(end.norm() - 1.0) <= p.on_manifold_tol);
  CHECK(std::abs(end(2) - 0.999) <= p.reach_tol);
  const auto report = validate_path(path, p);
  CHECK(report.valid);
  CHECK(path.total_cost == doctest::Approx(path_cost(path.stages[0])));
  CHECK(path.total_cost >= (end - p.q_start).norm() - 1e-12);

  const auto again = sequential_plan(p);
  CHECK(again.stages == path.stages);
}

TEST_CASE("planner: tree costs are path lengths to the root") {
  const auto p = plane_sphere_problem(5);
  const auto stage = rrt_star_stage(*p.manifolds[0], *p.manifolds[1], p.q_start, p, 5);
  REQUIRE(stage.success);
  const auto& t = stage.tree;
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    double c = 0.0;
    for (long k = static_cast<long>(i); t.parent[k] >= 0; k = t.parent[k]) c += (t.nodes[k] - t.nodes[t.parent[k]]).norm();
    CHECK(t.cost[i] == doctest::Approx(c).epsilon(1e-9));
  }
}

TEST_CASE("planner: failures and path validation") {
  auto p = plane_sphere_problem(2);
  p.rrt.max_nodes = 1;
  CHECK_THROWS_AS(sequential_plan(p), PlanningError);

  const auto good = sequential_plan(plane_sphere_problem(2));
  auto bad = good;
  bad.stages[0][bad.stages[0].size() / 2] *= 1.5;
  const auto report = validate_path(bad, plane_sphere_problem(2));
  CHECK_FALSE(report.valid);
  REQUIRE(!report.issues.empty());
  CHECK(report.issues[0].find("stage 1") != std::string::npos);

  CHECK_THROWS_AS(validate_path(PlannedPath{}, p), ParameterError);

  std::ostringstream csv;
  write_path_csv(csv, good);
  CHECK(csv.str().rfind("stage,index,q1,q2,q3\n", 0) == 0);
}

TEST_CASE("hourglass with the analytic sphere") {
  const auto p = hourglass_problem(std::make_shared<SphereManifold>(), 1);
  const auto path = sequential_plan(p);
  CHECK(path.stages.size() == 3);
  CHECK(validate_path(path, p).valid);
  CHECK((path.stages.back().back() - Eigen::Vector3d(-1, 0, -1.5)).norm() <= p.reach_tol);
}
