#include "plot_slice.hpp"
#include "run_config.hpp"

#include "ecomann/eval.hpp"
#include "ecomann/mlp.hpp"
#include "ecomann/osa.hpp"
#include "ecomann/planner.hpp"
#include "ecomann/train.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace ecomann;
using namespace ecomann::cli;

namespace {

struct CommonOptions {
  std::vector<std::string> configs;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.configs, "config file(s) of 'key = value' lines, applied in order");
  sub->add_option("--set", o.sets, "override one config key: --set key=value (repeatable)");
  sub->add_option("--seed", o.seed, "shorthand for --set seed=N");
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig c;
  for (const auto& f : o.configs) apply_config_file(c, f);
  for (const auto& s : o.sets) apply_assignment(c, s);
  if (o.seed) apply_setting(c, "seed", std::to_string(*o.seed));
  apply_seed_env(c);
  return c;
}

// Writes to `path`, or stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cli", "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ParameterError("cli", "write failed for '" + path + "'");
}

OnManifoldDataset study_dataset(const std::string& file, const std::string& kind, const RunConfig& c) {
  if (!file.empty() && !kind.empty()) throw UsageError("give either --data or --dataset, not both");
  if (!file.empty()) return load_dataset(file);
  if (kind.empty()) throw UsageError("one of --data or --dataset is required");
  return generate_dataset(kind, c.n, c.train.seed);
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  std::istringstream in(s);
  for (std::string tok; std::getline(in, tok, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw UsageError(std::string(what) + ": expected comma-separated numbers, got '" + s + "'");
    }
  }
  return out;
}

PlanningProblem scenario_problem(const RunConfig& c) {
  if (c.scenario != "hourglass") throw UsageError("unknown scenario '" + c.scenario + "' (hourglass)");
  ManifoldPtr sphere;
  if (c.sphere_model == "analytic") sphere = std::make_shared<SphereManifold>();
  else sphere = std::make_shared<LearnedManifold>(load_model(c.sphere_model));
  PlanningProblem p = hourglass_problem(sphere, c.train.seed);
  p.rrt = c.rrt;
  p.on_manifold_tol = c.on_manifold_tol;
  p.reach_tol = c.reach_tol;
  p.projection = c.eval.projection;
  return p;
}

std::string study_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream os;
  write_study_csv(os, rows);
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn implicit equality-constraint manifolds from on-manifold data, and plan on them."};
  app.footer("\n" + registry_help() + "\nExit codes: 0 success, 1 domain error, 2 usage error.");
  app.require_subcommand(1);

  // gen-data
  CommonOptions gen_o;
  std::string gen_kind, gen_out;
  std::optional<long> gen_n;
  double gen_noise = 0.0;
  auto* gen = app.add_subcommand("gen-data", "generate an on-manifold dataset");
  gen->add_option("kind", gen_kind, "sphere | circle3d | plane | orient")->required();
  gen->add_option("--n", gen_n, "number of points (config key n)");
  gen->add_option("--noise", gen_noise, "Gaussian noise sigma added after generation");
  gen->add_option("--out", gen_out, "dataset file")->required();
  add_common(gen, gen_o);

  // train
  CommonOptions train_o;
  std::string train_data, train_out, train_loss;
  auto* tr = app.add_subcommand("train", "train an implicit manifold model");
  tr->add_option("--data", train_data, "dataset file")->required();
  tr->add_option("--out", train_out, "model file")->required();
  tr->add_option("--loss-out", train_loss, "per-epoch loss CSV");
  add_common(tr, train_o);

  // eval
  CommonOptions eval_o;
  std::string eval_model, eval_gt, eval_data, eval_out;
  auto* ev = app.add_subcommand("eval", "success rate P and residuals mu of a model");
  ev->add_option("--model", eval_model, "model file")->required();
  ev->add_option("--gt", eval_gt, "ground truth: sphere | circle3d | plane | orient")->required();
  ev->add_option("--data", eval_data, "training data, for mu_train");
  ev->add_option("--out", eval_out, "CSV file (stdout if omitted)");
  add_common(ev, eval_o);

  // studies
  CommonOptions study_o;
  std::string study_data, study_kind, study_out, ablate_rows;
  auto add_study = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--data", study_data, "dataset file");
    s->add_option("--dataset", study_kind, "generate this dataset kind with n and seed instead");
    s->add_option("--out", study_out, "CSV file (stdout if omitted)");
    add_common(s, study_o);
    return s;
  };
  auto* ablate = add_study("ablate", "ablation table over the training components");
  ablate->add_option("--rows", ablate_rows, "comma-separated row indices (default: all)");
  auto* level = add_study("level-study", "success rate per augmentation level count (study_levels)");
  auto* noise = add_study("noise-study", "success rate when training on noisy data (noise_sigmas)");

  // osa-check
  CommonOptions osa_o;
  std::string osa_data, osa_out;
  auto* osa = app.add_subcommand("osa-check", "per-edge losses of orthogonal subspace alignment");
  osa->add_option("--data", osa_data, "dataset file")->required();
  osa->add_option("--out", osa_out, "CSV file (stdout if omitted)");
  add_common(osa, osa_o);

  // plan
  CommonOptions plan_o;
  std::string plan_scenario, plan_out;
  auto* plan = app.add_subcommand("plan", "sequential motion planning over a manifold scenario");
  plan->add_option("scenario", plan_scenario, "scenario file in the config format")->required();
  plan->add_option("--out", plan_out, "path CSV (stdout if omitted)");
  add_common(plan, plan_o);

  // plot-slice
  CommonOptions plot_o;
  std::string plot_model, plot_out, plot_data, plot_axes = "0,1", plot_anchor;
  double plot_range = 1.5;
  auto* plot = app.add_subcommand("plot-slice", "SVG level-set contours of a model on a 2D slice");
  plot->add_option("--model", plot_model, "model file")->required();
  plot->add_option("--out", plot_out, "SVG file")->required();
  plot->add_option("--data", plot_data, "dataset to overlay");
  plot->add_option("--axes", plot_axes, "the two plotted coordinates, 0-based (default 0,1)");
  plot->add_option("--anchor", plot_anchor, "values of all coordinates; the plotted ones are ignored (default 0)");
  plot->add_option("--range", plot_range, "half-width of the plotted square");
  add_common(plot, plot_o);

  // config
  CommonOptions show_o;
  auto* show = app.add_subcommand("config", "print the effective configuration");
  add_common(show, show_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) {
      RunConfig c = resolve(gen_o);
      if (gen_n) c.n = *gen_n;
      OnManifoldDataset ds = generate_dataset(gen_kind, c.n, c.train.seed);
      if (gen_noise > 0.0) ds = add_noise(ds, gen_noise, c.train.seed);
      save_dataset(gen_out, ds);
      std::fprintf(stderr, "wrote %ld points (d=%d, l=%d) to %s\n", static_cast<long>(ds.size()), ds.dim(),
                   ds.true_codim, gen_out.c_str());
    } else if (*tr) {
      const RunConfig c = resolve(train_o);
      const OnManifoldDataset ds = load_dataset(train_data);
      const TrainResult r = train(ds, c.train);
      save_model(train_out, r.model);
      if (!train_loss.empty()) {
        std::ostringstream os;
        os << "epoch,loss\n";
        char buf[64];
        for (std::size_t e = 0; e < r.loss_history.size(); ++e) {
          std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e + 1, r.loss_history[e]);
          os << buf;
        }
        emit(train_loss, os.str());
      }
      std::fprintf(stderr, "codim %d, epsilon %.4g, %zu augmented points, loss %.4g -> %.4g\n", r.codim, r.epsilon,
                   r.num_augmented, r.loss_history.empty() ? 0.0 : r.loss_history.front(),
                   r.loss_history.empty() ? 0.0 : r.loss_history.back());
    } else if (*ev) {
      const RunConfig c = resolve(eval_o);
      const GroundTruth gt = parse_ground_truth(eval_gt);
      const LearnedManifold model(load_model(eval_model));
      std::ostringstream os;
      os << "gt,P,mu_train_mean,mu_train_std,mu_test_mean,mu_test_std,n_samples,threshold,seed\n";
      char buf[512];
      if (!eval_data.empty()) {
        OnManifoldDataset ds = load_dataset(eval_data);
        ds.ground_truth = gt;
        const EvalReport r = evaluate(model, ds, c.eval);
        std::snprintf(buf, sizeof buf, "%s,%.4f,%.6g,%.6g,%.6g,%.6g,%ld,%.6g,%llu\n", to_string(gt).c_str(), r.P,
                      r.mu_train.mean, r.mu_train.std, r.mu_test.mean, r.mu_test.std, static_cast<long>(r.n_samples),
                      r.threshold, static_cast<unsigned long long>(r.seed));
      } else {
        const SampleBox box = c.eval.box ? *c.eval.box : default_sample_box(gt, model.ambient_dim());
        const PointMatrix proj = project_points(model, sample_uniform(box, c.eval.n_samples, c.eval.seed), c.eval.projection);
        const MeanStd mu = metric_mu(proj, gt);
        const double p = metric_P(model, gt, model.ambient_dim(), c.eval);
        std::snprintf(buf, sizeof buf, "%s,%.4f,,,%.6g,%.6g,%ld,%.6g,%llu\n", to_string(gt).c_str(), p, mu.mean, mu.std,
                      static_cast<long>(c.eval.n_samples), c.eval.threshold,
                      static_cast<unsigned long long>(c.eval.seed));
      }
      os << buf;
      emit(eval_out, os.str());
    } else if (*ablate || *level || *noise) {
      const RunConfig c = resolve(study_o);
      const OnManifoldDataset ds = study_dataset(study_data, study_kind, c);
      std::vector<StudyRow> rows;
      if (*ablate) {
        std::vector<std::size_t> which;
        if (!ablate_rows.empty()) {
          for (double v : parse_doubles(ablate_rows, "--rows")) {
            if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)) || v >= ablation_row_names().size())
              throw UsageError("--rows: indices must be integers in [0, " +
                               std::to_string(ablation_row_names().size() - 1) + "]");
            which.push_back(static_cast<std::size_t>(v));
          }
        }
        rows = run_ablation(ds, c.train, c.repeats, c.eval, which);
      } else if (*level) {
        rows = run_level_study(ds, c.study_levels, c.train, c.repeats, c.eval);
      } else {
        rows = run_noise_study(ds, c.noise_sigmas, c.train, c.repeats, c.eval);
      }
      emit(study_out, study_csv(rows));
    } else if (*osa) {
      const RunConfig c = resolve(osa_o);
      const OnManifoldDataset ds = load_dataset(osa_data);
      const PreparedData prep = [&] {
        TrainConfig t = c.train;
        t.disable_augmentation = true;
        t.disable_osa = true;
        return prepare_training_data(ds, t);
      }();
      OsaOptions oo = c.train.osa;
      oo.seed = c.train.seed;
      const OsaResult res = osa_align(ds.points, prep.normals, oo);
      std::ostringstream os;
      os << "edge_a,edge_c,chosen_orientation,loss\n";
      char buf[128];
      for (const auto& [a, p] : res.graph.edges()) {
        const auto o = pair_orientation(res.flipped[a], res.flipped[p]);
        std::snprintf(buf, sizeof buf, "%ld,%ld,%s,%.6g\n", static_cast<long>(a), static_cast<long>(p),
                      to_string(o).c_str(), res.chosen_loss[a]);
        os << buf;
      }
      emit(osa_out, os.str());
    } else if (*plan) {
      RunConfig c = resolve(plan_o);
      apply_config_file(c, plan_scenario);
      for (const auto& s : plan_o.sets) apply_assignment(c, s);  // flags win over the scenario file
      if (plan_o.seed) apply_setting(c, "seed", std::to_string(*plan_o.seed));
      const PlanningProblem p = scenario_problem(c);
      const PlannedPath path = sequential_plan(p);
      const PathReport rep = validate_path(path, p);
      std::ostringstream os;
      write_path_csv(os, path);
      emit(plan_out, os.str());
      std::size_t waypoints = 0;
      for (const auto& s : path.stages) waypoints += s.size();
      std::fprintf(stderr, "%s: %zu stages, %zu waypoints, cost %.4f, %ld nodes explored, path %s\n",
                   c.scenario.c_str(), path.stages.size(), waypoints, path.total_cost, path.nodes_explored,
                   rep.valid ? "valid" : "INVALID");
      for (const auto& issue : rep.issues) std::fprintf(stderr, "  %s\n", issue.c_str());
      if (!rep.valid) return 1;
    } else if (*plot) {
      resolve(plot_o);
      const LearnedManifold model(load_model(plot_model));
      SliceSpec spec;
      const auto axes = parse_doubles(plot_axes, "--axes");
      if (axes.size() != 2) throw UsageError("--axes expects two coordinate indices");
      spec.axis_u = static_cast<int>(axes[0]);
      spec.axis_v = static_cast<int>(axes[1]);
      spec.anchor = Eigen::VectorXd::Zero(model.ambient_dim());
      if (!plot_anchor.empty()) {
        const auto a = parse_doubles(plot_anchor, "--anchor");
        if (static_cast<int>(a.size()) != model.ambient_dim())
          throw UsageError("--anchor expects " + std::to_string(model.ambient_dim()) + " values");
        for (int i = 0; i < model.ambient_dim(); ++i) spec.anchor(i) = a[static_cast<std::size_t>(i)];
      }
      spec.range = plot_range;
      const PointMatrix pts = plot_data.empty() ? PointMatrix() : load_dataset(plot_data).points;
      emit(plot_out, plot_slice_svg(model, spec, pts));
    } else if (*show) {
      std::cout << format_config(resolve(show_o));
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: [cli] %s\n", e.what());
    return 1;
  }
  return 0;
}
