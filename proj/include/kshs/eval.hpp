#pragma once

#include "kshs/frechet.hpp"
#include "kshs/metric.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace kshs {

/// Descriptors with one class label each. Classes are ordered by first
/// appearance; that order is also the tie-break order for NCC.
class LabeledDescriptorSet {
public:
    LabeledDescriptorSet(std::vector<KernelSubspace> descriptors, std::vector<std::string> labels,
                         std::vector<std::string> ids = {});

    std::size_t size() const { return descriptors_.size(); }
    const std::vector<KernelSubspace>& descriptors() const { return descriptors_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<std::string>& classes() const { return classes_; }
    /// Class position of descriptor i.
    std::size_t class_of(std::size_t i) const { return class_of_[i]; }
    /// Member indices of class c, ascending.
    const std::vector<std::size_t>& members(std::size_t c) const { return members_[c]; }

private:
    std::vector<KernelSubspace> descriptors_;
    std::vector<std::string> labels_;
    std::vector<std::string> ids_;
    std::vector<std::string> classes_;
    std::vector<std::size_t> class_of_;
    std::vector<std::vector<std::size_t>> members_;
};

enum class EvalMode { OneNN, NCC };

struct Prediction {
    std::string id;
    std::string truth;
    std::string predicted;
    double distance = 0.0;
};

struct EvalReport {
    EvalMode mode = EvalMode::OneNN;
    double accuracy = 0.0;
    std::vector<std::string> classes;
    std::vector<double> per_class_accuracy;
    /// confusion[true][predicted]
    std::vector<std::vector<long>> confusion;
    std::vector<Prediction> predictions;
    /// Echo of the evaluation settings as key/value text.
    std::vector<std::pair<std::string, std::string>> config;
};

/// Instrumentation for leave-one-out hygiene checks. `on_pool` receives the
/// held-out index and the descriptor indices that fed a neighbour search or
/// a class mean used to classify it. It may be called from worker threads.
struct LooObserver {
    std::function<void(std::size_t held_out, std::span<const std::size_t> pool)> on_pool;
};

/// Leave-one-out 1-NN under the nuclear distance; ties go to the lower index.
EvalReport one_nn_loo(const LabeledDescriptorSet& set, const LooObserver& observer = {});
/// Same, reusing a precomputed distance matrix over `set`.
EvalReport one_nn_loo(const LabeledDescriptorSet& set, const DistanceMatrix& distances,
                      const LooObserver& observer = {});

/// Leave-one-out nearest class center with Fréchet means. The held-out
/// item's own class mean is recomputed without it; other class means are
/// computed once from all their members.
EvalReport ncc_loo(const LabeledDescriptorSet& set, const FrechetOptions& options = {},
                   const LooObserver& observer = {});

std::string to_string(EvalMode mode);

} // namespace kshs
