#include "disvm/bench.hpp"

#include "disvm/baselines.hpp"
#include "disvm/disvm.hpp"
#include "disvm/error.hpp"
#include "disvm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace disvm {

// ---------------------------------------------------------------------------
// Tasks

std::vector<TransferTask> make_tasks(const NamedDatasets& datasets, TaskLayout layout) {
  std::vector<TransferTask> tasks;
  const std::size_t n = datasets.size();
  if (n < 2) return tasks;
  if (layout == TaskLayout::all_pairs) {
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = 0; t < n; ++t) {
        if (s == t) continue;
        tasks.push_back({datasets[s].first + "->" + datasets[t].first, {datasets[s].first},
                         datasets[t].first});
      }
    }
    return tasks;
  }
  for (std::size_t t = 0; t < n; ++t) {
    TransferTask task;
    task.target = datasets[t].first;
    for (std::size_t s = 0; s < n; ++s) {
      if (s != t) task.sources.push_back(datasets[s].first);
    }
    std::string joined;
    for (const auto& s : task.sources) joined += (joined.empty() ? "" : "&") + s;
    task.name = joined + "->" + task.target;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_on(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + sep.size();
  }
}

const Dataset& find_dataset(const NamedDatasets& datasets, const std::string& name) {
  for (const auto& [n, ds] : datasets) {
    if (n == name) return ds;
  }
  throw InvalidArgument("unknown dataset '" + name + "'");
}

}  // namespace

std::vector<TransferTask> make_tasks(const NamedDatasets& datasets, std::string_view description) {
  std::vector<TransferTask> tasks;
  for (const std::string& item : split_on(description, ",")) {
    if (item.empty()) continue;
    const auto sides = split_on(item, "->");
    if (sides.size() != 2 || sides[0].empty() || sides[1].empty()) {
      throw InvalidArgument("task '" + item + "' must look like SOURCE->TARGET or S1&S2->TARGET");
    }
    TransferTask task;
    task.target = sides[1];
    find_dataset(datasets, task.target);
    for (const std::string& s : split_on(sides[0], "&")) {
      find_dataset(datasets, s);
      if (s == task.target) throw InvalidArgument("task '" + item + "': source equals target");
      if (std::find(task.sources.begin(), task.sources.end(), s) != task.sources.end()) {
        throw InvalidArgument("task '" + item + "': source '" + s + "' listed twice");
      }
      task.sources.push_back(s);
    }
    task.name = item;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

void LabelVault::seal(std::span<const std::size_t> hidden) {
  hidden_.assign(truth_.size(), 0);
  for (std::size_t i : hidden) {
    if (i >= truth_.size()) throw InvalidArgument("vault: hidden index out of range");
    hidden_[i] = 1;
  }
  sealed_ = true;
}

void LabelVault::unseal() {
  sealed_ = false;
  hidden_.clear();
}

bool LabelVault::hidden(std::size_t i) const { return sealed_ && i < hidden_.size() && hidden_[i]; }

Label LabelVault::read(std::size_t i) {
  if (i >= truth_.size()) throw InvalidArgument("vault: index out of range");
  if (hidden(i)) ++leaks_;
  return truth_[i];
}

TaskData prepare_task(const TransferTask& task, const NamedDatasets& datasets,
                      const AccessionGroups& groups) {
  if (task.sources.empty()) throw InvalidArgument("task '" + task.name + "' has no source");
  Dataset target = find_dataset(datasets, task.target);
  validate(target);
  std::vector<Label> truth = target.labels;
  for (Label l : truth) {
    if (l == Label::unlabeled) {
      throw DataError("target '" + task.target + "' must be fully labeled for evaluation");
    }
  }
  std::fill(target.labels.begin(), target.labels.end(), Label::unlabeled);
  std::fill(target.role.begin(), target.role.end(), Role::target_labeled);

  std::vector<Dataset> sources;
  for (const auto& name : task.sources) {
    if (name == task.target) throw InvalidArgument("task '" + task.name + "': source = target");
    Dataset s = find_dataset(datasets, name);
    if (s.dim() != target.dim()) {
      throw DataError("task '" + task.name + "': dataset '" + name + "' has " +
                      std::to_string(s.dim()) + " features, target has " +
                      std::to_string(target.dim()));
    }
    std::fill(s.role.begin(), s.role.end(), Role::source);
    validate(s, false);
    sources.push_back(std::move(s));
  }

  std::vector<const Dataset*> parts{&target};
  for (const auto& s : sources) parts.push_back(&s);

  TaskData data;
  data.name = task.name;
  data.pool = concat(parts);
  data.n_target = target.size();
  data.vault = LabelVault(std::move(truth));
  data.domains = encode_domains(data.pool, groups);
  return data;
}

// ---------------------------------------------------------------------------
// Hyper-parameters and methods

bool tie_before(const Hyperparams& a, const Hyperparams& b) {
  return std::tie(a.c, a.lambda, a.gamma, a.h) < std::tie(b.c, b.lambda, b.gamma, b.h);
}

std::string Method::describe(const Hyperparams& hp) const {
  std::ostringstream s;
  s << "C=" << hp.c;
  return s.str();
}

std::string to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::disvm: return "disvm";
    case MethodKind::svm: return "svm";
    case MethodKind::pca_t: return "pca-t";
    case MethodKind::pca_st: return "pca-st";
    case MethodKind::mida: return "mida";
    case MethodKind::smida: return "smida";
  }
  return "?";
}

MethodKind parse_method(std::string_view name) {
  for (MethodKind k : {MethodKind::disvm, MethodKind::svm, MethodKind::pca_t, MethodKind::pca_st,
                       MethodKind::mida, MethodKind::smida}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown method '" + std::string(name) +
                        "' (expected disvm, svm, pca-t, pca-st, mida or smida)");
}

namespace {

using Index = Eigen::Index;

std::vector<Index> labeled_members(std::span<const Label> labels, std::span<const char> members,
                                   std::size_t limit) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < std::min(limit, labels.size()); ++i) {
    if (labels[i] != Label::unlabeled && (members.empty() || members[i])) {
      out.push_back(static_cast<Index>(i));
    }
  }
  return out;
}

Vector signed_labels(std::span<const Label> labels) { return recode_labels(labels); }

std::vector<Index> as_index(std::span<const std::size_t> idx) {
  return {idx.begin(), idx.end()};
}

// Dual SVM over a precomputed operator restricted to the labeled members;
// returns decisions at the query rows of the same operator.
Vector dual_decisions(const Matrix& op, const Vector& y, const std::vector<Index>& lab, double c,
                      double tol, std::span<const std::size_t> query) {
  qp::BoxOptions bo;
  bo.tol = tol;
  const DualFit fit = solve_dual(op, y, lab, c, bo);
  if (!fit.box.converged) {
    throw NotConverged("dual solver stopped at projected gradient " +
                       std::to_string(fit.box.violation) + " (C=" + std::to_string(c) + ")");
  }
  Vector g(static_cast<Index>(lab.size()));
  for (std::size_t j = 0; j < lab.size(); ++j) g(static_cast<Index>(j)) = fit.gamma(lab[j]);
  Vector out(static_cast<Index>(query.size()));
  for (std::size_t q = 0; q < query.size(); ++q) {
    double v = 0.0;
    for (std::size_t j = 0; j < lab.size(); ++j) {
      v += op(static_cast<Index>(query[q]), lab[j]) * g(static_cast<Index>(j));
    }
    out(static_cast<Index>(q)) = v;
  }
  return out;
}

void check_two_classes(const Vector& y, const std::vector<Index>& lab) {
  bool pos = false;
  bool neg = false;
  for (Index i : lab) (y(i) > 0 ? pos : neg) = true;
  if (!pos || !neg) throw DataError("training pool needs labeled samples of both classes");
}

KernelSpec with_gamma(const KernelSpec& base, double gamma) {
  KernelSpec k = base;
  if (k.family == KernelFamily::rbf) k.gamma = gamma;
  return k;
}

std::vector<double> gamma_grid(const KernelSpec& kernel, const Grids& grids) {
  if (kernel.family == KernelFamily::rbf) return grids.gamma;
  return {kernel.gamma};
}

// Full-pool Gram matrices keyed by the rbf width.
class GramCache {
 public:
  GramCache(const Matrix& x, KernelSpec base) : x_(x), base_(base) {}
  const Matrix& get(double gamma) {
    const double key = base_.family == KernelFamily::rbf ? gamma : 0.0;
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, gram(x_, with_gamma(base_, gamma))).first;
    return it->second;
  }

 private:
  const Matrix& x_;
  KernelSpec base_;
  std::map<double, Matrix> cache_;
};

std::vector<Index> member_list(std::span<const char> members, std::size_t n) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (members.empty() || members[i]) out.push_back(static_cast<Index>(i));
  }
  return out;
}

// -- DI-SVM ------------------------------------------------------------------

class DisvmSession : public Session {
 public:
  DisvmSession(const TaskData& task, KernelSpec kernel, double tol)
      : task_(task), kernel_(kernel), tol_(tol), grams_(task.pool.features, kernel) {}

  Vector decisions(const Hyperparams& hp, std::span<const Label> labels,
                   std::span<const char> members, std::span<const std::size_t> query) override {
    const Vector y = signed_labels(labels);
    const auto lab = labeled_members(labels, members, labels.size());
    check_two_classes(y, lab);
    const Matrix& k = grams_.get(hp.gamma);
    if (members.empty()) {
      return dual_decisions(op(hp, k).matrix(), y, lab, hp.c, tol_, query);
    }
    // Inductive: the operator lives on the member samples only.
    const auto mem = member_list(members, labels.size());
    const Matrix km = k(mem, mem);
    const Matrix am = task_.domains.a(Eigen::all, mem);
    const MarginOperator local(km, am, hp.lambda);
    Vector ym(static_cast<Index>(mem.size()));
    std::vector<Index> labm;
    for (std::size_t j = 0; j < mem.size(); ++j) {
      ym(static_cast<Index>(j)) = y(mem[j]);
      if (y(mem[j]) != 0.0) labm.push_back(static_cast<Index>(j));
    }
    qp::BoxOptions bo;
    bo.tol = tol_;
    const DualFit fit = solve_dual(local.matrix(), ym, labm, hp.c, bo);
    if (!fit.box.converged) throw NotConverged("dual solver did not converge");
    const Vector beta = local.beta(fit.gamma);
    const auto q = as_index(query);
    return k(q, mem) * beta;
  }

 private:
  const MarginOperator& op(const Hyperparams& hp, const Matrix& k) {
    const auto key = std::make_pair(kernel_.family == KernelFamily::rbf ? hp.gamma : 0.0, hp.lambda);
    auto it = ops_.find(key);
    if (it == ops_.end()) {
      it = ops_.emplace(key, std::make_unique<MarginOperator>(k, task_.domains.a, hp.lambda)).first;
    }
    return *it->second;
  }

  const TaskData& task_;
  KernelSpec kernel_;
  double tol_;
  GramCache grams_;
  std::map<std::pair<double, double>, std::unique_ptr<MarginOperator>> ops_;
};

class DisvmMethod : public Method {
 public:
  DisvmMethod(KernelSpec kernel, MethodOptions opts) : kernel_(kernel), opts_(std::move(opts)) {}
  std::string name() const override { return "disvm"; }

  std::vector<Stage> plan(const TaskData&) const override {
    const Grids g = opts_.grids;
    const KernelSpec k = kernel_;
    // Stage one: lambda fixed at 1, search C (and the rbf width).
    Stage first = [g, k](const Hyperparams&) {
      std::vector<Hyperparams> out;
      for (double gm : gamma_grid(k, g)) {
        for (double c : g.c) out.push_back({c, 1.0, gm, 0});
      }
      return out;
    };
    // Stage two: keep the best C, search lambda.
    Stage second = [g](const Hyperparams& best) {
      std::vector<Hyperparams> out;
      for (double l : g.lambda) out.push_back({best.c, l, best.gamma, 0});
      return out;
    };
    return {first, second};
  }

  std::unique_ptr<Session> open(const TaskData& task) const override {
    return std::make_unique<DisvmSession>(task, kernel_, opts_.tol);
  }

  std::string describe(const Hyperparams& hp) const override {
    std::ostringstream s;
    s << "C=" << hp.c << ";lambda=" << hp.lambda;
    if (kernel_.family == KernelFamily::rbf) s << ";gamma=" << hp.gamma;
    return s.str();
  }

 private:
  KernelSpec kernel_;
  MethodOptions opts_;
};

// -- plain SVM ----------------------------------------------------------------

class SvmSession : public Session {
 public:
  SvmSession(const TaskData& task, KernelSpec kernel, double tol)
      : tol_(tol), grams_(task.pool.features, kernel) {}

  Vector decisions(const Hyperparams& hp, std::span<const Label> labels,
                   std::span<const char> members, std::span<const std::size_t> query) override {
    const Vector y = signed_labels(labels);
    const auto lab = labeled_members(labels, members, labels.size());
    check_two_classes(y, lab);
    return dual_decisions(grams_.get(hp.gamma), y, lab, hp.c, tol_, query);
  }

 private:
  double tol_;
  GramCache grams_;
};

class SvmMethod : public Method {
 public:
  SvmMethod(KernelSpec kernel, MethodOptions opts) : kernel_(kernel), opts_(std::move(opts)) {}
  std::string name() const override { return "svm"; }

  std::vector<Stage> plan(const TaskData&) const override {
    const Grids g = opts_.grids;
    const KernelSpec k = kernel_;
    return {[g, k](const Hyperparams&) {
      std::vector<Hyperparams> out;
      for (double gm : gamma_grid(k, g)) {
        for (double c : g.c) out.push_back({c, 0.0, gm, 0});
      }
      return out;
    }};
  }

  std::unique_ptr<Session> open(const TaskData& task) const override {
    return std::make_unique<SvmSession>(task, kernel_, opts_.tol);
  }

  std::string describe(const Hyperparams& hp) const override {
    std::ostringstream s;
    s << "C=" << hp.c;
    if (kernel_.family == KernelFamily::rbf) s << ";gamma=" << hp.gamma;
    return s.str();
  }

 private:
  KernelSpec kernel_;
  MethodOptions opts_;
};

// -- projections followed by a linear SVM --------------------------------------

class ProjectionSession : public Session {
 public:
  ProjectionSession(const TaskData& task, MethodKind kind, KernelSpec kernel,
                    const MethodOptions& opts, Index h_max)
      : task_(task), kind_(kind), kernel_(kernel), opts_(opts), h_max_(h_max) {}

  Vector decisions(const Hyperparams& hp, std::span<const Label> labels,
                   std::span<const char> members, std::span<const std::size_t> query) override {
    const std::size_t n = labels.size();
    // Samples the projection is fitted on, and samples whose labels train the SVM.
    const bool target_only = kind_ == MethodKind::pca_t;
    std::vector<char> fit_mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      fit_mask[i] = (members.empty() || members[i]) && (!target_only || i < task_.n_target);
    }
    const Vector y = signed_labels(labels);
    const auto lab = labeled_members(labels, fit_mask, n);
    check_two_classes(y, lab);

    const Matrix& g = linear_gram(hp, labels, fit_mask);
    return dual_decisions(g, y, lab, hp.c, opts_.tol, query);
  }

 private:
  struct Key {
    double gamma;
    std::vector<char> mask;
    std::vector<Label> labels;  // smida only
    bool operator==(const Key&) const = default;
  };

  const Matrix& linear_gram(const Hyperparams& hp, std::span<const Label> labels,
                            const std::vector<char>& fit_mask) {
    Key key{kernel_.family == KernelFamily::rbf ? hp.gamma : 0.0, fit_mask, {}};
    if (kind_ == MethodKind::smida) key.labels.assign(labels.begin(), labels.end());
    if (!(have_ && key == key_)) {
      key_ = std::move(key);
      have_ = true;
      features_ = project(hp.gamma, labels, fit_mask);
      grams_.clear();
    }
    const Index h = std::min<Index>(hp.h, features_.rows());
    auto it = grams_.find(h);
    if (it == grams_.end()) {
      const Matrix z = features_.topRows(h);
      it = grams_.emplace(h, z.transpose() * z).first;
    }
    return it->second;
  }

  // h_max leading projected coordinates of every pool sample.
  Matrix project(double gamma, std::span<const Label> labels, const std::vector<char>& fit_mask) {
    const auto fit_idx = member_list(fit_mask, fit_mask.size());
    const Matrix x = task_.pool.features(Eigen::all, fit_idx);
    if (kind_ == MethodKind::pca_t || kind_ == MethodKind::pca_st) {
      const Index h = std::min({h_max_, x.rows(), x.cols()});
      return transform(fit_pca(x, h), task_.pool.features);
    }
    const KernelSpec spec = with_gamma(kernel_, gamma);
    DomainMatrix dm;
    dm.a = task_.domains.a(Eigen::all, fit_idx);
    dm.experiments = task_.domains.experiments(fit_idx, Eigen::all);
    dm.subjects = task_.domains.subjects(fit_idx, Eigen::all);
    const Index h = std::min(h_max_, x.cols());
    ProjectionModel model;
    if (kind_ == MethodKind::mida) {
      model = fit_mida(x, dm, h, opts_.mu_var, spec);
    } else {
      std::vector<Label> sub(fit_idx.size());
      for (std::size_t j = 0; j < fit_idx.size(); ++j) {
        sub[j] = labels[static_cast<std::size_t>(fit_idx[j])];
      }
      model = fit_smida(x, dm, recode_labels(sub), h, opts_.mu_var, opts_.mu_y, spec);
    }
    Matrix z = transform(model, task_.pool.features);
    z /= feature_scale(z(Eigen::all, fit_idx));
    return z;
  }

  const TaskData& task_;
  MethodKind kind_;
  KernelSpec kernel_;
  MethodOptions opts_;
  Index h_max_;
  bool have_ = false;
  Key key_;
  Matrix features_;
  std::map<Index, Matrix> grams_;
};

class ProjectionMethod : public Method {
 public:
  ProjectionMethod(MethodKind kind, KernelSpec kernel, MethodOptions opts)
      : kind_(kind), kernel_(kernel), opts_(std::move(opts)) {}
  std::string name() const override { return to_string(kind_); }

  std::vector<Stage> plan(const TaskData& task) const override {
    const Grids g = opts_.grids;
    const KernelSpec k = kernel_;
    const std::vector<Index> hs = clipped_h(task);
    const bool pca = kind_ == MethodKind::pca_t || kind_ == MethodKind::pca_st;
    return {[g, k, hs, pca](const Hyperparams&) {
      std::vector<Hyperparams> out;
      const std::vector<double> gammas = pca ? std::vector<double>{k.gamma} : gamma_grid(k, g);
      for (double gm : gammas) {
        for (Index h : hs) {
          for (double c : g.c) out.push_back({c, 0.0, gm, h});
        }
      }
      return out;
    }};
  }

  std::unique_ptr<Session> open(const TaskData& task) const override {
    const auto hs = clipped_h(task);
    return std::make_unique<ProjectionSession>(task, kind_, kernel_, opts_,
                                               *std::max_element(hs.begin(), hs.end()));
  }

  std::string describe(const Hyperparams& hp) const override {
    std::ostringstream s;
    s << "h=" << hp.h << ";C=" << hp.c;
    if (kind_ != MethodKind::pca_t && kind_ != MethodKind::pca_st &&
        kernel_.family == KernelFamily::rbf) {
      s << ";gamma=" << hp.gamma;
    }
    return s.str();
  }

 private:
  // Subspace sizes clipped to what the fitted sample set supports, deduplicated.
  std::vector<Index> clipped_h(const TaskData& task) const {
    const Index n_fit = static_cast<Index>(kind_ == MethodKind::pca_t ? task.n_target
                                                                      : task.size());
    Index limit = n_fit;
    if (kind_ == MethodKind::pca_t || kind_ == MethodKind::pca_st) {
      limit = std::min(limit, task.pool.dim());
    }
    std::set<Index> hs;
    for (Index h : opts_.grids.h) hs.insert(std::clamp<Index>(h, 1, limit));
    if (hs.empty()) throw InvalidArgument("empty subspace grid");
    return {hs.begin(), hs.end()};
  }

  MethodKind kind_;
  KernelSpec kernel_;
  MethodOptions opts_;
};

}  // namespace

std::unique_ptr<Method> make_method(MethodKind kind, const KernelSpec& kernel,
                                    const MethodOptions& opts) {
  kernel.validate();
  if (opts.grids.c.empty() || opts.grids.lambda.empty() ||
      (kernel.family == KernelFamily::rbf && opts.grids.gamma.empty())) {
    throw InvalidArgument("hyper-parameter grids must be non-empty");
  }
  switch (kind) {
    case MethodKind::disvm: return std::make_unique<DisvmMethod>(kernel, opts);
    case MethodKind::svm: return std::make_unique<SvmMethod>(kernel, opts);
    default: return std::make_unique<ProjectionMethod>(kind, kernel, opts);
  }
}

// ---------------------------------------------------------------------------
// Protocol

void Protocol::validate() const {
  if (outer_repeats < 1) throw InvalidArgument("protocol: outer_repeats must be >= 1");
  if (outer_folds < 2) throw InvalidArgument("protocol: outer_folds must be >= 2");
  if (inner_splits < 1) throw InvalidArgument("protocol: inner_splits must be >= 1");
  if (!(inner_validation_fraction > 0.0 && inner_validation_fraction < 1.0)) {
    throw InvalidArgument("protocol: inner_validation_fraction must lie in (0, 1)");
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finaliser over the combined words
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

std::vector<int> stratified_folds(std::span<const Label> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("folds must be >= 2");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::unlabeled) throw DataError("fold assignment needs labeled samples");
    (labels[i] == Label::positive ? pos : neg).push_back(i);
  }
  if (pos.size() < static_cast<std::size_t>(folds) || neg.size() < static_cast<std::size_t>(folds)) {
    throw DataError("each class needs at least " + std::to_string(folds) +
                    " samples for stratified folds");
  }
  Rng rng(seed);
  std::vector<int> fold(labels.size(), -1);
  std::size_t next = 0;
  for (auto* cls : {&pos, &neg}) {
    rng.shuffle(*cls);
    for (std::size_t i : *cls) fold[i] = static_cast<int>(next++ % static_cast<std::size_t>(folds));
  }
  return fold;
}

namespace {

// Checks every training request for hidden labels before it reaches the method.
class GuardedSession : public Session {
 public:
  GuardedSession(Session& inner, LabelVault& vault) : inner_(inner), vault_(vault) {}

  Vector decisions(const Hyperparams& hp, std::span<const Label> labels,
                   std::span<const char> members, std::span<const std::size_t> query) override {
    for (std::size_t i = 0; i < vault_.size() && i < labels.size(); ++i) {
      if (vault_.hidden(i) && labels[i] != Label::unlabeled) vault_.report_leak();
    }
    return inner_.decisions(hp, labels, members, query);
  }

 private:
  Session& inner_;
  LabelVault& vault_;
};

struct InnerSplit {
  std::vector<std::size_t> validation;
};

std::vector<InnerSplit> inner_splits(std::span<const Label> labels, std::size_t n_target,
                                     const Protocol& protocol, std::uint64_t seed) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < n_target; ++i) {
    if (labels[i] == Label::positive) pos.push_back(i);
    if (labels[i] == Label::negative) neg.push_back(i);
  }
  std::vector<InnerSplit> out;
  for (int s = 0; s < protocol.inner_splits; ++s) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    InnerSplit split;
    for (auto* cls : {&pos, &neg}) {
      std::vector<std::size_t> v = *cls;
      const auto take = static_cast<std::size_t>(
          std::lround(protocol.inner_validation_fraction * static_cast<double>(v.size())));
      const std::size_t k = std::max<std::size_t>(take, 1);
      if (v.size() < 2 || k >= v.size()) {
        throw DataError("degenerate validation split: a class has too few labeled target samples");
      }
      rng.shuffle(v);
      split.validation.insert(split.validation.end(), v.begin(), v.begin() + static_cast<long>(k));
    }
    std::sort(split.validation.begin(), split.validation.end());
    out.push_back(std::move(split));
  }
  return out;
}

long count_correct(const Vector& decisions, std::span<const std::size_t> idx,
                   const std::function<Label(std::size_t)>& truth) {
  long correct = 0;
  for (std::size_t q = 0; q < idx.size(); ++q) {
    if (sign_label(decisions(static_cast<Eigen::Index>(q))) == truth(idx[q])) ++correct;
  }
  return correct;
}

// One pass over repeats x folds of the target; `choose` picks the
// hyper-parameters for a split given its training labels.
using Chooser = std::function<Hyperparams(Session&, std::span<const Label>,
                                          std::span<const char>, std::uint64_t)>;

CvReport run_cv(TaskData& task, Session& raw, const Protocol& protocol, const Chooser& choose) {
  protocol.validate();
  GuardedSession session(raw, task.vault);
  const std::size_t nt = task.n_target;
  const std::size_t n = task.size();

  std::vector<Label> truth(nt);
  for (std::size_t i = 0; i < nt; ++i) truth[i] = task.vault.read(i);

  CvReport report;
  report.task = task.name;
  const long leaks_before = task.vault.leaks();
  for (int r = 0; r < protocol.outer_repeats; ++r) {
    const auto fold = stratified_folds(truth, protocol.outer_folds,
                                       mix_seed(protocol.seed, 1, static_cast<std::uint64_t>(r)));
    for (int f = 0; f < protocol.outer_folds; ++f) {
      std::vector<std::size_t> test;
      for (std::size_t i = 0; i < nt; ++i) {
        if (fold[i] == f) test.push_back(i);
      }
      task.vault.seal(test);
      std::vector<Label> labels = task.pool.labels;
      for (std::size_t i = 0; i < nt; ++i) {
        labels[i] = fold[i] == f ? Label::unlabeled : task.vault.read(i);
      }
      std::vector<char> members;
      if (!protocol.transductive) {
        members.assign(n, 1);
        for (std::size_t i : test) members[i] = 0;
      }
      const std::uint64_t split_seed =
          mix_seed(protocol.seed, 2, static_cast<std::uint64_t>(r * 1000 + f));
      SplitResult res;
      res.repeat = r;
      res.fold = f;
      res.chosen = choose(session, labels, members, split_seed);
      const Vector dec = session.decisions(res.chosen, labels, members, test);
      task.vault.unseal();
      res.correct = count_correct(dec, test, [&](std::size_t i) { return task.vault.read(i); });
      res.total = static_cast<long>(test.size());
      report.accuracies.push_back(res.accuracy());
      report.splits.push_back(res);
    }
  }
  std::tie(report.mean, report.std) = mean_std(report.accuracies);
  report.leak_events = task.vault.leaks() - leaks_before;
  return report;
}

}  // namespace

Hyperparams grid_search(Session& session, const Method& method, const TaskData& task,
                        std::span<const Label> labels, std::span<const char> members,
                        const Protocol& protocol, std::uint64_t seed) {
  protocol.validate();
  const auto splits = inner_splits(labels, task.n_target, protocol, seed);
  const auto stages = method.plan(task);
  if (stages.empty()) throw InvalidArgument("method has no search plan");

  Hyperparams best;
  for (const Stage& stage : stages) {
    const std::vector<Hyperparams> cands = stage(best);
    if (cands.empty()) throw InvalidArgument("empty hyper-parameter grid");
    std::vector<long> correct(cands.size(), 0);
    for (const InnerSplit& split : splits) {
      std::vector<Label> inner = {labels.begin(), labels.end()};
      std::vector<char> inner_members = {members.begin(), members.end()};
      for (std::size_t i : split.validation) {
        inner[i] = Label::unlabeled;
        if (!inner_members.empty()) inner_members[i] = 0;
      }
      // Candidates inner, splits outer, so label-dependent caches are reused.
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const Vector dec = session.decisions(cands[c], inner, inner_members, split.validation);
        correct[c] += count_correct(dec, split.validation,
                                    [&](std::size_t i) { return labels[i]; });
      }
    }
    // Every candidate sees the same validation samples, so counts compare exactly.
    std::size_t arg = 0;
    for (std::size_t c = 1; c < cands.size(); ++c) {
      if (correct[c] > correct[arg] ||
          (correct[c] == correct[arg] && tie_before(cands[c], cands[arg]))) {
        arg = c;
      }
    }
    best = cands[arg];
  }
  return best;
}

CvReport cross_validate(TaskData& task, const Method& method, const Protocol& protocol) {
  auto session = method.open(task);
  CvReport report = run_cv(task, *session, protocol,
                           [&](Session& s, std::span<const Label> labels,
                               std::span<const char> members, std::uint64_t seed) {
                             return grid_search(s, method, task, labels, members, protocol, seed);
                           });
  report.method = method.name();
  return report;
}

std::vector<double> default_sweep_grid(SweepParam param) {
  if (param == SweepParam::lambda) return {0.0, 0.01, 0.1, 1.0, 10.0, 100.0};
  return Grids{}.c;
}

std::vector<SweepPoint> sensitivity_sweep(TaskData& task, SweepParam param,
                                          std::span<const double> grid, const KernelSpec& kernel,
                                          const Protocol& protocol, double tol) {
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  MethodOptions opts;
  opts.tol = tol;
  const auto method = make_method(MethodKind::disvm, kernel, opts);
  auto session = method->open(task);
  std::vector<SweepPoint> curve;
  for (double v : grid) {
    Hyperparams hp;
    hp.gamma = kernel.gamma;
    if (param == SweepParam::c) {
      hp.c = v;
      hp.lambda = 1.0;
    } else {
      hp.c = 1.0;
      hp.lambda = v;
    }
    const CvReport r = run_cv(task, *session, protocol,
                              [hp](Session&, std::span<const Label>, std::span<const char>,
                                   std::uint64_t) { return hp; });
    curve.push_back({v, r.mean, r.std});
  }
  return curve;
}

}  // namespace disvm
