#include "disvm/cli.hpp"

#include "disvm/baselines.hpp"
#include "disvm/bench.hpp"
#include "disvm/csv_io.hpp"
#include "disvm/disvm.hpp"
#include "disvm/error.hpp"
#include "disvm/synth.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

namespace disvm::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string canonical(const std::map<std::string, std::string>& config) {
  std::string out;
  for (const auto& [k, v] : config) out += k + "=" + v + "\n";
  return out;
}

std::map<std::string, std::string> parse_config(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    auto strip = [](std::string s) {
      const auto x = s.find_first_not_of(" \t\r");
      if (x == std::string::npos) return std::string();
      const auto y = s.find_last_not_of(" \t\r");
      return s.substr(x, y - x + 1);
    };
    std::string key = strip(line.substr(0, eq));
    if (key.empty()) throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
    out[key] = strip(line.substr(eq + 1));
  }
  return out;
}

std::string mean_pm_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f±%.1f", 100.0 * mean, 100.0 * std);
  return buf;
}

namespace {

struct Key {
  std::string name;
  std::string fallback;
  std::string help;
};

const std::vector<Key>& common_keys() {
  static const std::vector<Key> keys = {
      {"seed", "7", "random seed"},
  };
  return keys;
}

const std::vector<Key>& synth_keys() {
  static const std::vector<Key> keys = {
      {"d", "50", "feature dimension"},
      {"experiments", "2", "number of experiments (datasets)"},
      {"subjects_per_experiment", "4", "subjects per experiment"},
      {"samples_per_subject_per_class", "20", "samples per subject and class"},
      {"class_signal_strength", format_double(SynthConfig{}.class_signal_strength), "class signal"},
      {"subject_shift_strength", "5", "norm of subject offsets"},
      {"experiment_shift_strength", format_double(SynthConfig{}.experiment_shift_strength),
       "experiment rotation strength"},
      {"noise_std", "0.3", "noise standard deviation"},
  };
  return keys;
}

const std::vector<Key>& data_keys() {
  static const std::vector<Key> keys = {
      {"data", "", "comma-separated CSV files"},
      {"groups", "", "accession groups, e.g. A=g1;B=g1"},
  };
  return keys;
}

const std::vector<Key>& model_keys() {
  static const std::vector<Key> keys = {
      {"method", "disvm", "disvm, svm, pca-t, pca-st, mida or smida"},
      {"kernel", "linear", "linear, rbf or poly"},
      {"gamma", "1", "rbf width"},
      {"degree", "2", "polynomial degree"},
      {"coef", "1", "polynomial offset"},
      {"c", "1", "misclassification cost C"},
      {"lambda", "1", "domain-independence weight"},
      {"tol", "1e-6", "solver tolerance"},
      {"subspace_dim", "20", "subspace dimension for projection methods"},
      {"mu_var", "1", "variance weight for mida/smida"},
      {"mu_y", "1", "label-dependence weight for smida"},
  };
  return keys;
}

const std::vector<Key>& protocol_keys() {
  static const std::vector<Key> keys = {
      {"repeats", "10", "outer repetitions"},
      {"folds", "5", "outer folds"},
      {"inner_splits", "20", "inner random splits"},
      {"validation_fraction", "0.2", "inner validation fraction"},
      {"transductive", "true", "keep test folds as unlabeled training samples"},
  };
  return keys;
}

std::vector<Key> keys_for(const std::string& cmd) {
  std::vector<Key> keys = common_keys();
  auto add = [&](const std::vector<Key>& more) { keys.insert(keys.end(), more.begin(), more.end()); };
  if (cmd == "synth") {
    add(synth_keys());
    return keys;
  }
  add(data_keys());
  add(model_keys());
  if (cmd == "fit") return keys;
  add(protocol_keys());
  if (cmd == "eval") keys.push_back({"task", "", "task such as A->B"});
  if (cmd == "bench") {
    keys.push_back({"tasks", "pairs", "pairs, loo, or a list such as A->B,B->A"});
    keys.push_back({"methods", "svm,disvm", "comma-separated methods"});
  }
  if (cmd == "sweep") {
    keys.push_back({"task", "", "task such as A->B"});
    keys.push_back({"param", "lambda", "c or lambda"});
    keys.push_back({"grid", "", "comma-separated values (default: the standard grid)"});
  }
  return keys;
}

std::string dashed(std::string s) {
  for (char& ch : s) {
    if (ch == '_') ch = '-';
  }
  return s;
}

// Typed access to the resolved configuration.
class Config {
 public:
  explicit Config(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw InvalidArgument("missing setting '" + key + "'");
    return it->second;
  }
  double num(const std::string& key) const {
    const std::string& s = str(key);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
      throw InvalidArgument("setting '" + key + "' = '" + s + "' is not a number");
    }
    return v;
  }
  long integer(const std::string& key) const {
    const std::string& s = str(key);
    long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
      throw InvalidArgument("setting '" + key + "' = '" + s + "' is not an integer");
    }
    return v;
  }
  std::uint64_t seed() const {
    const std::string& s = str("seed");
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
      throw InvalidArgument("seed '" + s + "' is not a non-negative integer");
    }
    return v;
  }
  bool flag(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw InvalidArgument("setting '" + key + "' = '" + s + "' is not a boolean");
  }
  const std::map<std::string, std::string>& all() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = cur.find_last_not_of(" \t");
    out.push_back(cur.substr(b, e - b + 1));
  }
  return out;
}

struct Run {
  std::string command;
  Config config;
  fs::path out_dir;
  std::string hash_hex;

  std::string stamp() const {
    return "seed=" + config.str("seed") + " config_hash=" + hash_hex;
  }
};

KernelSpec kernel_from(const Config& c) {
  KernelSpec k;
  k.family = parse_kernel_family(c.str("kernel"));
  k.gamma = c.num("gamma");
  k.degree = static_cast<int>(c.integer("degree"));
  k.coef = c.num("coef");
  k.validate();
  return k;
}

AccessionGroups groups_from(const Config& c) {
  AccessionGroups g;
  for (const auto& item : split_list(c.str("groups"), ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw InvalidArgument("groups entry '" + item + "' must be EXPERIMENT=GROUP");
    }
    g[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return g;
}

Protocol protocol_from(const Config& c) {
  Protocol p;
  p.outer_repeats = static_cast<int>(c.integer("repeats"));
  p.outer_folds = static_cast<int>(c.integer("folds"));
  p.inner_splits = static_cast<int>(c.integer("inner_splits"));
  p.inner_validation_fraction = c.num("validation_fraction");
  p.transductive = c.flag("transductive");
  p.seed = c.seed();
  p.validate();
  return p;
}

// All files concatenated, then one named dataset per experiment id.
NamedDatasets load_named(const Config& c, Dataset* combined = nullptr) {
  const auto files = split_list(c.str("data"), ',');
  if (files.empty()) throw InvalidArgument("no input data: pass --data FILE[,FILE...]");
  std::vector<Dataset> parts;
  for (const auto& f : files) parts.push_back(read_dataset(f));
  std::vector<const Dataset*> ptrs;
  for (const auto& p : parts) {
    if (p.dim() != parts.front().dim()) throw DataError("input files differ in feature count");
    ptrs.push_back(&p);
  }
  Dataset all = concat(ptrs);
  NamedDatasets named;
  std::map<std::string, std::vector<std::size_t>> members;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto [it, fresh] = members.try_emplace(all.experiment_id[i]);
    if (fresh) order.push_back(all.experiment_id[i]);
    it->second.push_back(i);
  }
  for (const auto& name : order) named.emplace_back(name, subset(all, members[name]));
  if (combined) *combined = std::move(all);
  return named;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

std::string fmt(double v) { return format_double(v); }

std::string file_stem(const std::string& task) {
  std::string s;
  for (std::size_t i = 0; i < task.size(); ++i) {
    if (task.compare(i, 2, "->") == 0) {
      s += "_to_";
      ++i;
    } else if (task[i] == '&') {
      s += '+';
    } else if (std::isalnum(static_cast<unsigned char>(task[i])) || task[i] == '-' ||
               task[i] == '_') {
      s += task[i];
    } else {
      s += '_';
    }
  }
  return s;
}

// -- synth --------------------------------------------------------------------

int cmd_synth(const Run& run, std::ostream& out) {
  const Config& c = run.config;
  SynthConfig cfg;
  cfg.d = c.integer("d");
  cfg.experiments = static_cast<int>(c.integer("experiments"));
  cfg.subjects_per_experiment = static_cast<int>(c.integer("subjects_per_experiment"));
  cfg.samples_per_subject_per_class = static_cast<int>(c.integer("samples_per_subject_per_class"));
  cfg.class_signal_strength = c.num("class_signal_strength");
  cfg.subject_shift_strength = c.num("subject_shift_strength");
  cfg.experiment_shift_strength = c.num("experiment_shift_strength");
  cfg.noise_std = c.num("noise_std");
  cfg.seed = c.seed();
  const NamedDatasets sets = generate_synthetic(cfg);

  std::ostringstream manifest;
  manifest << "# " << run.stamp() << "\n";
  for (const auto& [name, ds] : sets) {
    std::ostringstream body;
    format_dataset(ds, body, {run.stamp()});
    const fs::path file = run.out_dir / (name + ".csv");
    write_text(file, body.str());
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a(body.str())));
    manifest << name << ".csv = " << hex << "\n";
    out << "wrote " << file.string() << " (" << ds.size() << " samples, fnv1a " << hex << ")\n";
  }
  write_text(run.out_dir / "manifest.txt", manifest.str());
  return ok;
}

// -- fit ----------------------------------------------------------------------

struct FitOutcome {
  Vector decisions;  // one per sample of the combined dataset
  std::vector<std::pair<std::string, std::string>> report;
};

void add_diag(FitOutcome& o, const Diagnostics& d) {
  o.report.emplace_back("objective", fmt(d.objective));
  o.report.emplace_back("penalty", fmt(d.penalty));
  o.report.emplace_back("hinge", fmt(d.hinge));
  o.report.emplace_back("kkt_stationarity", fmt(d.kkt.stationarity));
  o.report.emplace_back("kkt_primal_feasibility", fmt(d.kkt.primal_feasibility));
  o.report.emplace_back("kkt_complementarity", fmt(d.kkt.complementarity));
  o.report.emplace_back("iterations", std::to_string(d.iterations));
  o.report.emplace_back("converged", d.converged ? "true" : "false");
}

FitOutcome fit_any(const Config& c, const Dataset& raw) {
  const MethodKind kind = parse_method(c.str("method"));
  const KernelSpec kernel = kernel_from(c);
  const double cost = c.num("c");
  const double tol = c.num("tol");
  const Dataset ds = mask_test_labels(raw);
  validate(ds, false);
  FitOutcome o;

  if (kind == MethodKind::disvm) {
    FitOptions fo;
    fo.tol = tol;
    fo.groups = groups_from(c);
    const DisvmModel m = fit(ds, kernel, cost, c.num("lambda"), fo);
    o.decisions = decision_values(m, ds.features);
    add_diag(o, m.diagnostics);
    return o;
  }

  // Samples whose labels train the classifier and samples the projection sees.
  std::vector<std::size_t> train;
  std::vector<std::size_t> fit_set;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const bool target = ds.role[i] != Role::source;
    if (kind == MethodKind::pca_t && !target) continue;
    fit_set.push_back(i);
    if (is_labeled(ds.labels[i])) train.push_back(i);
  }
  if (fit_set.empty()) throw DataError("no samples available for this method");
  const Dataset tr = subset(ds, train);
  SvmOptions so;
  so.tol = tol;

  if (kind == MethodKind::svm) {
    const SvmModel m = fit_svm(tr.features, tr.labels, kernel, cost, so);
    o.decisions = decision_values(m, ds.features);
    add_diag(o, m.diagnostics);
    return o;
  }

  const Dataset fs_ds = subset(ds, fit_set);
  const auto h = static_cast<Eigen::Index>(c.integer("subspace_dim"));
  ProjectionModel proj;
  if (kind == MethodKind::pca_t || kind == MethodKind::pca_st) {
    proj = fit_pca(fs_ds.features, std::min({h, fs_ds.dim(), static_cast<Eigen::Index>(fs_ds.size())}));
  } else {
    const DomainMatrix dm = encode_domains(fs_ds, groups_from(c));
    const Eigen::Index hh = std::min(h, static_cast<Eigen::Index>(fs_ds.size()));
    if (kind == MethodKind::mida) {
      proj = fit_mida(fs_ds.features, dm, hh, c.num("mu_var"), kernel);
    } else {
      proj = fit_smida(fs_ds.features, dm, recode_labels(fs_ds), hh, c.num("mu_var"),
                       c.num("mu_y"), kernel);
    }
  }
  const double scale =
      proj.kind == ProjectionKind::pca ? 1.0 : feature_scale(transform(proj, fs_ds.features));
  const Matrix z_all = transform(proj, ds.features) / scale;
  const Matrix z_train = transform(proj, tr.features) / scale;
  const SvmModel m = fit_svm(z_train, tr.labels, KernelSpec::linear(), cost, so);
  o.decisions = decision_values(m, z_all);
  o.report.emplace_back("subspace_dimension", std::to_string(proj.h()));
  o.report.emplace_back("leading_eigenvalue", fmt(proj.eigenvalues(0)));
  add_diag(o, m.diagnostics);
  return o;
}

int cmd_fit(const Run& run, std::ostream& out) {
  const Config& c = run.config;
  Dataset all;
  load_named(c, &all);
  const FitOutcome o = fit_any(c, all);

  long train_ok = 0, train_n = 0, test_ok = 0, test_n = 0;
  std::ostringstream dec;
  dec << "# " << run.stamp() << "\n";
  dec << "sample_id,role,decision,prediction\n";
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double v = o.decisions(static_cast<Eigen::Index>(i));
    const Label p = sign_label(v);
    dec << all.sample_id[i] << ',' << to_string(all.role[i]) << ',' << fmt(v) << ','
        << (p == Label::positive ? "1" : "-1") << "\n";
    if (!is_labeled(all.labels[i])) continue;
    if (all.role[i] == Role::target_test) {
      ++test_n;
      test_ok += p == all.labels[i];
    } else {
      ++train_n;
      train_ok += p == all.labels[i];
    }
  }
  write_text(run.out_dir / "decisions.csv", dec.str());

  std::ostringstream rep;
  rep << "# " << run.stamp() << "\n";
  rep << "seed = " << c.str("seed") << "\nconfig_hash = " << run.hash_hex << "\n";
  rep << "method = " << c.str("method") << "\nkernel = " << c.str("kernel") << "\n";
  rep << "samples = " << all.size() << "\n";
  for (const auto& [k, v] : o.report) rep << k << " = " << v << "\n";
  if (train_n) rep << "train_accuracy = " << fmt(double(train_ok) / double(train_n)) << "\n";
  if (test_n) rep << "test_accuracy = " << fmt(double(test_ok) / double(test_n)) << "\n";
  write_text(run.out_dir / "fit.txt", rep.str());
  out << rep.str();
  return ok;
}

// -- eval / bench / sweep -------------------------------------------------------

MethodOptions method_options(const Config& c) {
  MethodOptions mo;
  mo.tol = c.num("tol");
  mo.mu_var = c.num("mu_var");
  mo.mu_y = c.num("mu_y");
  return mo;
}

std::string cv_table(const CvReport& r, const Method& m, const std::string& stamp) {
  std::ostringstream s;
  s << "# " << stamp << "\n";
  s << "repeat,fold,correct,total,accuracy,hyperparams\n";
  for (const auto& sp : r.splits) {
    s << sp.repeat << ',' << sp.fold << ',' << sp.correct << ',' << sp.total << ','
      << fmt(sp.accuracy()) << ',' << m.describe(sp.chosen) << "\n";
  }
  return s.str();
}

int cmd_eval(const Run& run, std::ostream& out) {
  const Config& c = run.config;
  const NamedDatasets named = load_named(c);
  const auto tasks = make_tasks(named, c.str("task"));
  if (tasks.empty()) throw InvalidArgument("eval needs --task, e.g. A->B");
  const Protocol protocol = protocol_from(c);
  const auto method = make_method(parse_method(c.str("method")), kernel_from(c), method_options(c));
  std::ostringstream summary;
  summary << "# " << run.stamp() << "\n";
  summary << "seed = " << c.str("seed") << "\nconfig_hash = " << run.hash_hex << "\n";
  for (const auto& t : tasks) {
    TaskData data = prepare_task(t, named, groups_from(c));
    const CvReport r = cross_validate(data, *method, protocol);
    write_text(run.out_dir / ("cv_" + file_stem(t.name) + ".csv"), cv_table(r, *method, run.stamp()));
    summary << "task = " << t.name << "\nmethod = " << r.method << "\nmean = " << fmt(r.mean)
            << "\nstd = " << fmt(r.std) << "\nsplits = " << r.splits.size()
            << "\nleak_events = " << r.leak_events << "\n";
    out << t.name << " " << r.method << " " << mean_pm_std(r.mean, r.std) << "\n";
  }
  write_text(run.out_dir / "eval.txt", summary.str());
  return ok;
}

std::vector<TransferTask> bench_tasks(const NamedDatasets& named, const std::string& spec) {
  if (spec == "pairs") return make_tasks(named, TaskLayout::all_pairs);
  if (spec == "loo") return make_tasks(named, TaskLayout::leave_one_out);
  return make_tasks(named, spec);
}

int cmd_bench(const Run& run, std::ostream& out) {
  const Config& c = run.config;
  const NamedDatasets named = load_named(c);
  const auto tasks = bench_tasks(named, c.str("tasks"));
  if (tasks.empty()) throw InvalidArgument("bench needs at least two datasets or a task list");
  const auto method_names = split_list(c.str("methods"), ',');
  if (method_names.empty()) throw InvalidArgument("bench needs at least one method");
  const Protocol protocol = protocol_from(c);
  const KernelSpec kernel = kernel_from(c);

  std::vector<TaskData> data;
  for (const auto& t : tasks) data.push_back(prepare_task(t, named, groups_from(c)));

  std::ostringstream table, detail;
  table << "# " << run.stamp() << "\nmethod";
  for (const auto& t : tasks) table << ',' << t.name;
  table << "\n";
  detail << "# " << run.stamp() << "\nmethod,task,mean,std,splits,leak_events\n";
  for (const auto& mname : method_names) {
    const auto method = make_method(parse_method(mname), kernel, method_options(c));
    table << method->name();
    for (auto& d : data) {
      const CvReport r = cross_validate(d, *method, protocol);
      table << ',' << mean_pm_std(r.mean, r.std);
      detail << method->name() << ',' << d.name << ',' << fmt(r.mean) << ',' << fmt(r.std) << ','
             << r.splits.size() << ',' << r.leak_events << "\n";
      write_text(run.out_dir / ("cv_" + method->name() + "_" + file_stem(d.name) + ".csv"),
                 cv_table(r, *method, run.stamp()));
    }
    table << "\n";
  }
  write_text(run.out_dir / "results.csv", table.str());
  write_text(run.out_dir / "results_detail.csv", detail.str());
  out << table.str();
  return ok;
}

int cmd_sweep(const Run& run, std::ostream& out) {
  const Config& c = run.config;
  const NamedDatasets named = load_named(c);
  const auto tasks = make_tasks(named, c.str("task"));
  if (tasks.size() != 1) throw InvalidArgument("sweep needs exactly one --task, e.g. A->B");
  const std::string& p = c.str("param");
  SweepParam param;
  if (p == "c" || p == "C") {
    param = SweepParam::c;
  } else if (p == "lambda") {
    param = SweepParam::lambda;
  } else {
    throw InvalidArgument("--param must be c or lambda");
  }
  std::vector<double> grid = default_sweep_grid(param);
  if (!c.str("grid").empty()) {
    grid.clear();
    for (const auto& v : split_list(c.str("grid"), ',')) grid.push_back(parse_double(v, "grid"));
  }
  TaskData data = prepare_task(tasks.front(), named, groups_from(c));
  const auto curve =
      sensitivity_sweep(data, param, grid, kernel_from(c), protocol_from(c), c.num("tol"));
  std::ostringstream s;
  s << "# " << run.stamp() << "\n";
  s << (param == SweepParam::c ? "c" : "lambda") << ",mean_accuracy,std\n";
  for (const auto& pt : curve) s << fmt(pt.value) << ',' << fmt(pt.mean) << ',' << fmt(pt.std) << "\n";
  write_text(run.out_dir / ("sweep_" + std::string(param == SweepParam::c ? "c" : "lambda") + ".csv"),
             s.str());
  out << s.str();
  return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Domain-independent SVM toolkit"};
  app.require_subcommand(1);
  const std::vector<std::string> commands = {"synth", "fit", "eval", "bench", "sweep"};
  const std::map<std::string, std::string> about = {
      {"synth", "generate synthetic multi-domain datasets"},
      {"fit", "train one model on CSV data and report diagnostics"},
      {"eval", "cross-validate one method on transfer tasks"},
      {"bench", "run methods over a task suite and tabulate mean±std"},
      {"sweep", "sensitivity of DI-SVM accuracy to C or lambda"},
  };

  std::map<std::string, std::map<std::string, std::vector<std::string>>> given;
  std::map<std::string, std::string> config_path;
  std::map<std::string, std::string> out_path;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd, about.at(cmd));
    sub->add_option("--config", config_path[cmd], "key = value settings file");
    sub->add_option("--out", out_path[cmd], "output directory")->default_val(".");
    for (const Key& k : keys_for(cmd)) {
      sub->add_option("--" + dashed(k.name), given[cmd][k.name],
                      k.help + (k.fallback.empty() ? "" : " [" + k.fallback + "]"));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }

  std::string cmd;
  for (const auto& name : commands) {
    if (app.got_subcommand(name)) cmd = name;
  }

  try {
    const auto keys = keys_for(cmd);
    std::map<std::string, std::string> resolved;
    for (const Key& k : keys) resolved[k.name] = k.fallback;
    if (!config_path[cmd].empty()) {
      std::ifstream in(config_path[cmd]);
      if (!in) throw InvalidArgument("cannot read config file " + config_path[cmd]);
      std::stringstream buf;
      buf << in.rdbuf();
      for (const auto& [k, v] : parse_config(buf.str())) {
        if (!resolved.count(k)) {
          throw InvalidArgument("config file: unknown setting '" + k + "' for " + cmd);
        }
        resolved[k] = v;
      }
    }
    for (const auto& [k, values] : given[cmd]) {
      if (values.empty()) continue;
      resolved[k] = values.back();
      if (k == "data" && values.size() > 1) {
        std::string joined;
        for (const auto& v : values) joined += (joined.empty() ? "" : ",") + v;
        resolved[k] = joined;
      }
    }

    const std::string text = canonical(resolved);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
    Run r{cmd, Config(resolved), fs::path(out_path[cmd]), hex};
    std::error_code ec;
    fs::create_directories(r.out_dir, ec);
    if (ec) throw DataError("cannot create output directory " + r.out_dir.string());
    write_text(r.out_dir / "config.resolved",
               "# command=" + cmd + " " + r.stamp() + "\n" + text);

    if (cmd == "synth") return cmd_synth(r, out);
    if (cmd == "fit") return cmd_fit(r, out);
    if (cmd == "eval") return cmd_eval(r, out);
    if (cmd == "bench") return cmd_bench(r, out);
    return cmd_sweep(r, out);
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return solver;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return data;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return data;
  }
}

}  // namespace disvm::cli
