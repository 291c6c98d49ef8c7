// lasn: train and evaluate Nystrom-linearized L2-loss kernel SVMs with a
// semismooth Newton solver, plus desk-scale diagnostics for the equivalence
// and approximation-error guarantees.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lasn/lasn.hpp"

using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitDimension = 3;
constexpr int kExitScaleGuard = 4;
constexpr int kExitSolver = 5;

struct CommonOpts {
  std::string data, test, model, out, json_path;
  int k = 0;  // 0: round(sqrt(n))
  double C = 10.0;
  std::string kernel = "rbf";
  double gamma = 0.0;  // 0: heuristic
  std::string rbf_conv = "divide";
  std::uint64_t seed = 0;
  double split = 0.0;  // 0: no split
  int max_iter = 200;
  double tol = 1e-6;
  int repeats = 3;
  std::vector<int> bench_ks;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const std::string& canonical) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

std::string canonical_config(const std::string& command, const CommonOpts& o) {
  std::ostringstream ss;
  ss << command << "|data=" << o.data << "|test=" << o.test << "|model=" << o.model
     << "|k=" << o.k << "|C=" << o.C << "|kernel=" << o.kernel << "|gamma=" << o.gamma
     << "|conv=" << o.rbf_conv << "|seed=" << o.seed << "|split=" << o.split
     << "|max_iter=" << o.max_iter << "|tol=" << o.tol << "|repeats=" << o.repeats;
  return ss.str();
}

lasn::Dataset load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open file: " + path);
  return lasn::parse_libsvm(in);
}

lasn::KernelSpec make_kernel_spec(const CommonOpts& o) {
  lasn::KernelSpec spec;
  if (o.kernel == "rbf") spec.kind = lasn::KernelKind::rbf;
  else if (o.kernel == "poly") spec.kind = lasn::KernelKind::polynomial;
  else if (o.kernel == "sigmoid") spec.kind = lasn::KernelKind::sigmoid;
  else if (o.kernel == "linear") spec.kind = lasn::KernelKind::linear;
  else throw std::invalid_argument("unknown kernel: " + o.kernel);
  if (o.gamma > 0.0) spec.gamma = o.gamma;
  spec.rbf_convention =
      o.rbf_conv == "multiply" ? lasn::RbfConvention::multiply : lasn::RbfConvention::divide;
  return spec;
}

int default_k(std::size_t n) {
  return std::max(1, static_cast<int>(std::llround(std::sqrt(static_cast<double>(n)))));
}

int cmd_train(const CommonOpts& opts) {
  const std::string hash = config_hash(canonical_config("train", opts));

  lasn::Dataset data = lasn::normalize_labels(load_file(opts.data));
  if (opts.split > 0.0) data = lasn::split_dataset(data, {opts.split}).first;

  lasn::TrainOptions train_opts;
  train_opts.C = opts.C;
  train_opts.k = opts.k > 0 ? opts.k : default_k(data.n_samples());
  train_opts.seed = opts.seed;
  train_opts.kernel = make_kernel_spec(opts);
  train_opts.auto_gamma = opts.gamma <= 0.0;
  train_opts.solver.max_newton_iters = opts.max_iter;
  train_opts.solver.delta = opts.tol;

  lasn::TrainTimings timings;
  auto [model, report] = lasn::train(data, train_opts, &timings);

  const std::string out_path = opts.out.empty() ? opts.data + ".model" : opts.out;
  const std::string log_path = opts.json_path.empty() ? out_path + ".log.jsonl" : opts.json_path;

  std::ofstream log(log_path);
  if (!log) throw std::ios_base::failure("cannot open file: " + log_path);
  auto base = [&](const char* record) {
    json j;
    j["record"] = record;
    j["seed"] = opts.seed;
    j["config_hash"] = hash;
    return j;
  };
  {
    json j = base("config");
    j["command"] = "train";
    j["data"] = opts.data;
    j["n"] = data.n_samples();
    j["p"] = data.n_features;
    j["k"] = train_opts.k;
    j["C"] = opts.C;
    j["kernel"] = opts.kernel;
    j["gamma"] = model.kernel.gamma;
    j["gamma_source"] = model.gamma_source;
    log << j.dump() << '\n';
  }
  {
    json j = base("timings");
    j["kmeans_s"] = timings.kmeans;
    j["gram_s"] = timings.gram;
    j["eig_s"] = timings.eig;
    j["product_s"] = timings.product;
    j["solve_s"] = timings.solve;
    log << j.dump() << '\n';
  }
  for (std::size_t i = 0; i < report.iterations.size(); ++i) {
    const lasn::NewtonIterRecord& rec = report.iterations[i];
    json j = base("iteration");
    j["iter"] = i;
    j["grad_norm"] = rec.grad_norm;
    j["active"] = rec.active_set_size;
    j["cg_iters"] = rec.cg_iters;
    j["cg_residual"] = rec.cg_residual;
    j["cg_bound"] = rec.cg_bound;
    j["alpha"] = rec.step_size;
    j["f"] = rec.objective;
    log << j.dump() << '\n';
  }
  {
    json j = base("summary");
    j["converged"] = report.converged;
    j["newton_iters"] = report.newton_iters;
    j["final_grad_norm"] = report.final_grad_norm;
    log << j.dump() << '\n';
  }

  if (!report.converged) {
    std::cerr << "solver did not converge within " << train_opts.solver.max_newton_iters
              << " Newton iterations (final ||grad|| = " << report.final_grad_norm << ")\n";
    return kExitSolver;
  }

  std::ofstream out(out_path);
  if (!out) throw std::ios_base::failure("cannot open file: " + out_path);
  lasn::save(model, out);

  std::cout << "trained k=" << train_opts.k << " C=" << opts.C << " gamma=" << model.kernel.gamma
            << " (" << model.gamma_source << ") newton_iters=" << report.newton_iters
            << " final_grad_norm=" << report.final_grad_norm << '\n'
            << "model written to " << out_path << '\n';
  return kExitOk;
}

lasn::LasnModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open file: " + path);
  return lasn::load(in);
}

lasn::Dataset load_test_set(const CommonOpts& opts) {
  lasn::Dataset test = lasn::normalize_labels(load_file(opts.test));
  if (opts.split > 0.0) test = lasn::split_dataset(test, {opts.split}).second;
  return test;
}

int cmd_predict(const CommonOpts& opts, bool with_accuracy) {
  lasn::LasnModel model = load_model_file(opts.model);
  lasn::Dataset test = load_test_set(opts);
  if (test.n_features > model.n_features)
    throw lasn::DimensionError("test feature dimension " + std::to_string(test.n_features) +
                               " exceeds model dimension " + std::to_string(model.n_features));

  lasn::Prediction pred = lasn::predict(model, test);

  if (!opts.out.empty()) {
    std::ofstream out(opts.out);
    if (!out) throw std::ios_base::failure("cannot open file: " + opts.out);
    for (double l : pred.labels) out << (l > 0 ? "1" : "-1") << '\n';
  } else if (!with_accuracy) {
    for (double l : pred.labels) std::cout << (l > 0 ? "1" : "-1") << '\n';
  }

  if (with_accuracy) {
    const double acc = lasn::accuracy(pred.labels, test.labels);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "accuracy %.4f", acc);
    std::cout << buf << '\n';
    if (!opts.json_path.empty()) {
      std::ofstream jout(opts.json_path);
      if (!jout) throw std::ios_base::failure("cannot open file: " + opts.json_path);
      json j;
      j["seed"] = opts.seed;
      j["config_hash"] = config_hash(canonical_config("eval", opts));
      j["accuracy"] = acc;
      j["n_test"] = test.n_samples();
      jout << j.dump() << '\n';
    }
  }
  return kExitOk;
}

int cmd_diagnose(const CommonOpts& opts) {
  const std::string hash = config_hash(canonical_config("diagnose", opts));

  lasn::Dataset all = lasn::normalize_labels(load_file(opts.data));
  lasn::Dataset train, test;
  if (!opts.test.empty()) {
    train = all;
    test = lasn::normalize_labels(load_file(opts.test));
  } else {
    const double frac = opts.split > 0.0 ? opts.split : 0.6;
    std::tie(train, test) = lasn::split_dataset(all, {frac});
  }

  const std::size_t n = train.n_samples();
  const std::size_t m = test.n_samples();
  if (n + m > 500 || n > 2000) {
    std::cerr << "diagnose is desk-scale only: requires n + m <= 500 (equivalence) and n <= 2000 "
                 "(bounds); got n = "
              << n << ", m = " << m << '\n';
    return kExitScaleGuard;
  }

  lasn::KernelSpec spec = make_kernel_spec(opts);
  if (opts.gamma <= 0.0 && spec.kind == lasn::KernelKind::rbf)
    spec.gamma = lasn::gamma_heuristic(train);
  const int k = opts.k > 0 ? opts.k : default_k(n);

  lasn::EquivalenceReport eq = lasn::check_equivalence(train, test, spec, opts.C);
  lasn::BoundExperiment bounds = lasn::run_bound_experiment(train, spec, opts.C, k, opts.seed);

  json j;
  j["seed"] = opts.seed;
  j["config_hash"] = hash;
  j["equivalence_labels_match"] = eq.labels_match;
  j["prop_wf_holds"] = bounds.prop_wf_holds;
  j["theorem3_consistent"] = bounds.theorem3_consistent;
  j["equivalence"] = {
      {"primal_objective", eq.primal_objective},
      {"dual_objective", eq.dual_objective},
      {"objective_rel_gap", eq.objective_rel_gap},
      {"w_inf_diff", eq.w_inf_diff},
      {"kkt_residual", eq.kkt},
      {"label_mismatches", eq.label_mismatches},
      {"alt_decomposition_labels_match", eq.alt_decomposition_labels_match},
  };
  j["bound_inputs"] = {
      {"k", bounds.inputs.k},
      {"C0", bounds.inputs.C0},
      {"xi_f", bounds.inputs.xi_f},
      {"xi_2", bounds.inputs.xi_2},
      {"rho", bounds.inputs.rho},
      {"G", bounds.inputs.G},
      {"exact_eigenvalues_top", std::vector<double>(
                                    bounds.inputs.exact_eigenvalues.begin(),
                                    bounds.inputs.exact_eigenvalues.begin() +
                                        std::min<std::size_t>(
                                            bounds.inputs.exact_eigenvalues.size(), 10))},
      {"approx_eigenvalues", bounds.inputs.approx_eigenvalues},
  };
  j["bound_report"] = {
      {"e_f", bounds.report.e_f},
      {"e_2", bounds.report.e_2},
      {"tr_A", bounds.report.tr_A},
      {"lemma_ff", bounds.report.lemma_ff},
      {"prop_wf", bounds.report.prop_wf},
      {"theorem3", bounds.report.theorem3},
      {"measured_gap", bounds.report.measured_gap},
      {"w_diff_sq", bounds.report.w_diff_sq},
  };

  // +inf is not representable in JSON; emit as the string "inf".
  auto sanitize = [](json& node, auto&& self) -> void {
    if (node.is_number_float()) {
      const double v = node.get<double>();
      if (std::isinf(v)) node = v > 0 ? "inf" : "-inf";
    } else if (node.is_object() || node.is_array()) {
      for (auto& child : node) self(child, self);
    }
  };
  sanitize(j, sanitize);

  const std::string text = j.dump(2) + "\n";
  if (!opts.json_path.empty()) {
    std::ofstream out(opts.json_path);
    if (!out) throw std::ios_base::failure("cannot open file: " + opts.json_path);
    out << text;
  } else {
    std::cout << text;
  }
  return kExitOk;
}

int cmd_bench(const CommonOpts& opts) {
  const std::string hash = config_hash(canonical_config("bench", opts));

  lasn::Dataset data;
  if (!opts.data.empty()) {
    data = lasn::normalize_labels(load_file(opts.data));
  } else {
    data = lasn::make_blobs(3000, 100, opts.seed);
  }
  std::vector<int> ks = opts.bench_ks.empty() ? std::vector<int>{50, 100, 200, 400} : opts.bench_ks;
  for (int k : ks)
    if (k < 1 || k > static_cast<int>(data.n_samples()))
      throw std::invalid_argument("bench: k out of range for this dataset");

  const std::vector<lasn::StageTiming> stages =
      lasn::bench_pipeline(data, ks, opts.repeats, opts.C, opts.seed);

  std::vector<double> kd, gram_t, eig_t, product_t;
  std::printf("mean(std) seconds over %d repeats\n", opts.repeats);
  std::printf("%8s %20s %20s %20s %20s %20s\n", "k", "kmeans", "gram", "eig", "product", "solve");
  for (const auto& s : stages) {
    auto cell = [](const lasn::StageStats& st) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f(%.4f)", st.mean, st.stddev);
      return std::string(buf);
    };
    std::printf("%8d %20s %20s %20s %20s %20s\n", s.k, cell(s.kmeans).c_str(), cell(s.gram).c_str(),
                cell(s.eig).c_str(), cell(s.product).c_str(), cell(s.solve).c_str());
    kd.push_back(static_cast<double>(s.k));
    gram_t.push_back(s.gram.min);
    eig_t.push_back(s.eig.min);
    product_t.push_back(s.product.min);
  }
  const double slope_gram = lasn::loglog_slope(kd, gram_t);
  const double slope_eig = lasn::loglog_slope(kd, eig_t);
  const double slope_product = lasn::loglog_slope(kd, product_t);
  std::printf("log-log slopes vs k: gram %.2f (expect ~1), eig %.2f (expect ~3), product %.2f "
              "(expect ~2)\n",
              slope_gram, slope_eig, slope_product);

  const std::vector<int> active_sizes{500, 1000, 2000, 4000};
  const auto hess = lasn::bench_hessian_scaling(4000, 200, active_sizes, 20, opts.seed);
  std::vector<double> sizes, times;
  for (const auto& pt : hess) {
    sizes.push_back(static_cast<double>(pt.active_size));
    times.push_back(pt.seconds);
  }
  std::printf("hessian_apply |I| scaling slope %.2f (expect ~1)\n",
              lasn::loglog_slope(sizes, times));

  if (!opts.json_path.empty()) {
    json j;
    j["seed"] = opts.seed;
    j["config_hash"] = hash;
    j["repeats"] = opts.repeats;
    j["stages"] = json::array();
    auto stage_json = [](const lasn::StageStats& st) {
      return json{{"mean_s", st.mean}, {"std_s", st.stddev}, {"min_s", st.min}};
    };
    for (const auto& s : stages)
      j["stages"].push_back({{"k", s.k},
                             {"kmeans", stage_json(s.kmeans)},
                             {"gram", stage_json(s.gram)},
                             {"eig", stage_json(s.eig)},
                             {"product", stage_json(s.product)},
                             {"solve", stage_json(s.solve)}});
    j["slopes"] = {{"gram", slope_gram}, {"eig", slope_eig}, {"product", slope_product}};
    j["hessian_scaling"] = json::array();
    for (const auto& pt : hess)
      j["hessian_scaling"].push_back({{"active", pt.active_size}, {"seconds", pt.seconds}});
    std::ofstream out(opts.json_path);
    if (!out) throw std::ios_base::failure("cannot open file: " + opts.json_path);
    out << j.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LASN: Nystrom-linearized L2-loss kernel SVM with a semismooth Newton solver"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub, bool with_kernel) {
    sub->add_option("--seed", opts.seed, "random seed (all randomness flows from it)");
    sub->add_option("--split", opts.split, "train fraction in (0,1] applied to the input file");
    sub->add_option("--json", opts.json_path, "machine-readable output path");
    if (with_kernel) {
      sub->add_option("--k", opts.k, "landmark count (default: round(sqrt(n)))");
      sub->add_option("--C", opts.C, "cost parameter");
      sub->add_option("--kernel", opts.kernel, "rbf|poly|sigmoid|linear")
          ->check(CLI::IsMember({"rbf", "poly", "sigmoid", "linear"}));
      sub->add_option("--gamma", opts.gamma, "rbf width (omit for the heuristic)");
      sub->add_option("--rbf-conv", opts.rbf_conv, "divide|multiply")
          ->check(CLI::IsMember({"divide", "multiply"}));
    }
  };

  CLI::App* train = app.add_subcommand("train", "train a model and write it to --out");
  train->add_option("--data", opts.data, "training data (LIBSVM format)")->required();
  train->add_option("--out", opts.out, "model output path (default: <data>.model)");
  train->add_option("--max-iter", opts.max_iter, "Newton iteration cap");
  train->add_option("--tol", opts.tol, "gradient-norm stopping tolerance");
  add_common(train, true);

  CLI::App* predict = app.add_subcommand("predict", "write one predicted label per line");
  predict->add_option("--model", opts.model, "model file")->required();
  predict->add_option("--test", opts.test, "test data (LIBSVM format)")->required();
  predict->add_option("--out", opts.out, "labels output path (default: stdout)");
  add_common(predict, false);

  CLI::App* eval = app.add_subcommand("eval", "predict and print accuracy");
  eval->add_option("--model", opts.model, "model file")->required();
  eval->add_option("--test", opts.test, "test data (LIBSVM format)")->required();
  eval->add_option("--out", opts.out, "labels output path (optional)");
  add_common(eval, false);

  CLI::App* diagnose =
      app.add_subcommand("diagnose", "run the equivalence and bound checks (desk scale)");
  diagnose->add_option("--data", opts.data, "data file (LIBSVM format)")->required();
  diagnose->add_option("--test", opts.test, "separate test file (default: split --data)");
  add_common(diagnose, true);

  CLI::App* bench = app.add_subcommand("bench", "time the training stages across k");
  bench->add_option("--data", opts.data, "data file (default: fixed synthetic blobs)");
  bench->add_option("--repeats", opts.repeats, "repetitions per measurement");
  bench->add_option("--k", opts.bench_ks, "landmark counts to time (repeatable)");
  add_common(bench, false);
  bench->add_option("--C", opts.C, "cost parameter");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(opts);
    if (predict->parsed()) return cmd_predict(opts, false);
    if (eval->parsed()) return cmd_predict(opts, true);
    if (diagnose->parsed()) return cmd_diagnose(opts);
    if (bench->parsed()) return cmd_bench(opts);
  } catch (const lasn::DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDimension;
  } catch (const lasn::SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const lasn::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const lasn::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
