#pragma once

#include "disvm/dataset.hpp"

#include <random>
#include <string>
#include <vector>

namespace testing {

// Small labeled dataset: columns drawn around +-centre, ids given per sample.
inline disvm::Dataset make_dataset(const disvm::Matrix& x, const std::vector<int>& labels,
                                   const std::vector<std::string>& experiments,
                                   const std::vector<std::string>& subjects) {
  disvm::Dataset ds;
  ds.features = x;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ds.labels.push_back(labels[i] > 0   ? disvm::Label::positive
                        : labels[i] < 0 ? disvm::Label::negative
                                        : disvm::Label::unlabeled);
    ds.sample_id.push_back("s" + std::to_string(i));
    ds.experiment_id.push_back(experiments[i]);
    ds.subject_id.push_back(subjects[i]);
    ds.role.push_back(labels[i] == 0 ? disvm::Role::target_test : disvm::Role::source);
  }
  return ds;
}

// Two noisy classes along a random direction, split over `domains` domains
// with distinct offsets. Some samples left unlabeled when `unlabeled` > 0.
inline disvm::Dataset random_problem(std::mt19937_64& rng, int n, int d, int domains,
                                     double separation, int unlabeled = 0) {
  std::normal_distribution<double> nd(0.0, 1.0);
  disvm::Matrix offsets(d, domains);
  for (int j = 0; j < domains; ++j)
    for (int i = 0; i < d; ++i) offsets(i, j) = 1.5 * nd(rng);
  disvm::Vector u(d);
  for (int i = 0; i < d; ++i) u(i) = nd(rng);
  u.normalize();
  disvm::Matrix x(d, n);
  std::vector<int> labels;
  std::vector<std::string> exps, subs;
  for (int i = 0; i < n; ++i) {
    const int y = i % 2 == 0 ? 1 : -1;
    const int dom = (i / 2) % domains;
    for (int k = 0; k < d; ++k) x(k, i) = separation * y * u(k) + offsets(k, dom) + nd(rng);
    labels.push_back(i >= n - unlabeled ? 0 : y);
    exps.push_back("e" + std::to_string(dom % 2));
    subs.push_back("p" + std::to_string(dom));
  }
  return make_dataset(x, labels, exps, subs);
}

}  // namespace testing
