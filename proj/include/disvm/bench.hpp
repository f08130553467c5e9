#pragma once

#include "disvm/dataset.hpp"
#include "disvm/domain.hpp"
#include "disvm/kernel.hpp"
#include "disvm/synth.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace disvm {

// ---------------------------------------------------------------------------
// Tasks

struct TransferTask {
  std::string name;  // "A->B", "B&C->A"
  std::vector<std::string> sources;
  std::string target;
};

enum class TaskLayout {
  all_pairs,        // every ordered (source, target) pair
  leave_one_out,    // each dataset as target, all others pooled as source
};

std::vector<TransferTask> make_tasks(const NamedDatasets& datasets, TaskLayout layout);
/// Explicit list such as "A->B,B&C->A". Throws InvalidArgument for unknown
/// names or a target that is also a source.
std::vector<TransferTask> make_tasks(const NamedDatasets& datasets, std::string_view description);

/// Holds the ground-truth target labels away from training code. Reads of a
/// hidden index while sealed are counted as leaks.
class LabelVault {
 public:
  LabelVault() = default;
  explicit LabelVault(std::vector<Label> truth) : truth_(std::move(truth)) {}

  void seal(std::span<const std::size_t> hidden);
  void unseal();
  bool sealed() const { return sealed_; }
  bool hidden(std::size_t i) const;

  Label read(std::size_t i);
  std::size_t size() const { return truth_.size(); }
  long leaks() const { return leaks_; }
  /// Called by the harness when it finds a hidden label in a training pool.
  void report_leak() { ++leaks_; }

 private:
  std::vector<Label> truth_;
  std::vector<char> hidden_;
  bool sealed_ = false;
  long leaks_ = 0;
};

/// All samples of a task in one pool: target samples first (labels withheld in
/// the vault), then source samples (labeled).
struct TaskData {
  std::string name;
  Dataset pool;
  std::size_t n_target = 0;
  LabelVault vault;  // indexed by target position 0..n_target-1
  DomainMatrix domains;

  std::size_t size() const { return pool.size(); }
};

TaskData prepare_task(const TransferTask& task, const NamedDatasets& datasets,
                      const AccessionGroups& groups = {});

// ---------------------------------------------------------------------------
// Methods

struct Hyperparams {
  double c = 1.0;
  double lambda = 1.0;
  double gamma = 1.0;
  Eigen::Index h = 0;

  bool operator==(const Hyperparams&) const = default;
};

/// Strict order used to break ties: smaller C, then smaller lambda, then
/// smaller gamma, then smaller h.
bool tie_before(const Hyperparams& a, const Hyperparams& b);

/// A trained-on-demand view of one task. `labels` covers every pool sample
/// (unlabeled where hidden); `members` marks the samples that may enter
/// training at all (empty = every pool sample, the transductive setting).
class Session {
 public:
  virtual ~Session() = default;
  virtual Vector decisions(const Hyperparams& hp, std::span<const Label> labels,
                           std::span<const char> members,
                           std::span<const std::size_t> query) = 0;
};

/// A search stage maps the best point so far to the candidates to try.
using Stage = std::function<std::vector<Hyperparams>(const Hyperparams& best)>;

class Method {
 public:
  virtual ~Method() = default;
  virtual std::string name() const = 0;
  virtual std::vector<Stage> plan(const TaskData& task) const = 0;
  virtual std::unique_ptr<Session> open(const TaskData& task) const = 0;
  /// Hyper-parameters that matter for this method, e.g. "C=1;lambda=0.1".
  virtual std::string describe(const Hyperparams& hp) const;
};

struct Grids {
  std::vector<double> c = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
  std::vector<double> lambda = {0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> gamma = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2};
  std::vector<Eigen::Index> h = {20, 40, 50, 60, 80, 100};
};

enum class MethodKind { disvm, svm, pca_t, pca_st, mida, smida };

std::string to_string(MethodKind kind);
MethodKind parse_method(std::string_view name);

struct MethodOptions {
  double tol = 1e-6;
  double mu_var = 1.0;
  double mu_y = 1.0;
  Grids grids;
};

std::unique_ptr<Method> make_method(MethodKind kind, const KernelSpec& kernel,
                                    const MethodOptions& opts = {});

// ---------------------------------------------------------------------------
// Protocol

struct Protocol {
  int outer_repeats = 10;
  int outer_folds = 5;
  int inner_splits = 20;
  double inner_validation_fraction = 0.2;
  std::uint64_t seed = 0;
  /// Target test folds stay in the training pool as unlabeled samples.
  bool transductive = true;

  void validate() const;
};

struct SplitResult {
  int repeat = 0;
  int fold = 0;
  long correct = 0;
  long total = 0;
  Hyperparams chosen;

  double accuracy() const { return static_cast<double>(correct) / static_cast<double>(total); }
};

struct CvReport {
  std::string task;
  std::string method;
  std::vector<SplitResult> splits;
  std::vector<double> accuracies;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  long leak_events = 0;
};

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_std(std::span<const double> values);

/// Stratified fold assignment over the target labels: fold index per sample.
std::vector<int> stratified_folds(std::span<const Label> labels, int folds, std::uint64_t seed);

/// Hyper-parameters with the best mean validation accuracy over the inner
/// splits of the labeled target samples of `labels`.
Hyperparams grid_search(Session& session, const Method& method, const TaskData& task,
                        std::span<const Label> labels, std::span<const char> members,
                        const Protocol& protocol, std::uint64_t seed);

CvReport cross_validate(TaskData& task, const Method& method, const Protocol& protocol);

struct SweepPoint {
  double value = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

enum class SweepParam { c, lambda };

/// DI-SVM accuracy along one hyper-parameter with the other fixed (lambda = 1
/// for the C sweep, C = 1 for the lambda sweep), cross-validated per point.
std::vector<SweepPoint> sensitivity_sweep(TaskData& task, SweepParam param,
                                          std::span<const double> grid, const KernelSpec& kernel,
                                          const Protocol& protocol, double tol = 1e-6);

std::vector<double> default_sweep_grid(SweepParam param);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace disvm
