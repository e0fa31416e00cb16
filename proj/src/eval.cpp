#include "kshs/eval.hpp"

#include "kshs/error.hpp"
#include "kshs/parallel.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace kshs {

LabeledDescriptorSet::LabeledDescriptorSet(std::vector<KernelSubspace> descriptors, std::vector<std::string> labels,
                                           std::vector<std::string> ids)
    : descriptors_(std::move(descriptors)), labels_(std::move(labels)), ids_(std::move(ids)) {
    if (labels_.size() != descriptors_.size()) throw DimensionError("one label per descriptor is required");
    if (ids_.empty()) {
        for (std::size_t i = 0; i < descriptors_.size(); ++i) ids_.push_back(std::to_string(i));
    }
    if (ids_.size() != descriptors_.size()) throw DimensionError("one id per descriptor is required");
    for (const auto& d : descriptors_) {
        if (d.fingerprint != descriptors_.front().fingerprint) {
            throw FingerprintMismatch("descriptor set mixes calibrations");
        }
    }
    class_of_.resize(descriptors_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        auto it = std::find(classes_.begin(), classes_.end(), labels_[i]);
        if (it == classes_.end()) {
            classes_.push_back(labels_[i]);
            members_.emplace_back();
            it = classes_.end() - 1;
        }
        const auto c = static_cast<std::size_t>(it - classes_.begin());
        class_of_[i] = c;
        members_[c].push_back(i);
    }
}

namespace {

EvalReport make_report(const LabeledDescriptorSet& set, EvalMode mode, const std::vector<std::size_t>& predicted,
                       const std::vector<double>& distances) {
    EvalReport r;
    r.mode = mode;
    r.classes = set.classes();
    const std::size_t K = r.classes.size();
    r.confusion.assign(K, std::vector<long>(K, 0));
    long correct = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const std::size_t truth = set.class_of(i);
        ++r.confusion[truth][predicted[i]];
        if (truth == predicted[i]) ++correct;
        r.predictions.push_back({set.ids()[i], set.labels()[i], r.classes[predicted[i]], distances[i]});
    }
    r.accuracy = set.size() ? static_cast<double>(correct) / static_cast<double>(set.size()) : 0.0;
    for (std::size_t c = 0; c < K; ++c) {
        long row = 0;
        for (long v : r.confusion[c]) row += v;
        r.per_class_accuracy.push_back(row ? static_cast<double>(r.confusion[c][c]) / static_cast<double>(row) : 0.0);
    }
    return r;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::string to_string(EvalMode mode) { return mode == EvalMode::OneNN ? "1nn" : "ncc"; }

EvalReport one_nn_loo(const LabeledDescriptorSet& set, const LooObserver& observer) {
    if (set.size() < 2) throw InvalidArgument("leave-one-out 1-NN needs at least two descriptors");
    return one_nn_loo(set, pairwise_distances(set.descriptors(), set.ids(), set.labels()), observer);
}

EvalReport one_nn_loo(const LabeledDescriptorSet& set, const DistanceMatrix& distances, const LooObserver& observer) {
    if (set.size() < 2) throw InvalidArgument("leave-one-out 1-NN needs at least two descriptors");
    if (distances.size() != static_cast<Eigen::Index>(set.size())) {
        throw DimensionError("distance matrix does not match the descriptor set");
    }
    std::vector<std::size_t> predicted(set.size());
    std::vector<double> best_distance(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        std::vector<std::size_t> pool;
        for (std::size_t j = 0; j < set.size(); ++j) {
            if (j != i) pool.push_back(j);
        }
        if (observer.on_pool) observer.on_pool(i, pool);
        std::size_t best = pool.front();
        for (std::size_t j : pool) {
            if (distances.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <
                distances.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best))) {
                best = j;
            }
        }
        predicted[i] = set.class_of(best);
        best_distance[i] = distances.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best));
    }
    EvalReport r = make_report(set, EvalMode::OneNN, predicted, best_distance);
    r.config = {{"mode", "1nn"}, {"protocol", "leave-one-out"}, {"distance", "nuclear"}};
    return r;
}

EvalReport ncc_loo(const LabeledDescriptorSet& set, const FrechetOptions& options, const LooObserver& observer) {
    const std::size_t K = set.classes().size();
    for (std::size_t c = 0; c < K; ++c) {
        if (set.members(c).size() < 2) {
            throw InvalidArgument("class '" + set.classes()[c] + "' has a single member; NCC leave-one-out needs two");
        }
    }

    auto gather = [&](std::span<const std::size_t> indices) {
        std::vector<KernelSubspace> out;
        out.reserve(indices.size());
        for (std::size_t i : indices) out.push_back(set.descriptors()[i]);
        return out;
    };

    std::vector<KernelSubspace> class_means(K);
    parallel_for(K, [&](std::size_t c) {
        class_means[c] = frechet_mean(gather(set.members(c)), options).mean;
    });

    std::vector<std::size_t> predicted(set.size());
    std::vector<double> best_distance(set.size());
    parallel_for(set.size(), [&](std::size_t i) {
        const std::size_t own = set.class_of(i);
        std::vector<std::size_t> pool;
        for (std::size_t j : set.members(own)) {
            if (j != i) pool.push_back(j);
        }
        if (observer.on_pool) {
            observer.on_pool(i, pool);
            for (std::size_t c = 0; c < K; ++c) {
                if (c != own) observer.on_pool(i, set.members(c));
            }
        }
        const KernelSubspace own_mean = frechet_mean(gather(pool), options).mean;
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < K; ++c) {
            const double d = nuclear_distance(c == own ? own_mean : class_means[c], set.descriptors()[i]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        predicted[i] = best;
        best_distance[i] = best_d;
    });

    EvalReport r = make_report(set, EvalMode::NCC, predicted, best_distance);
    r.config = {{"mode", "ncc"},
                {"protocol", "leave-one-out"},
                {"distance", "nuclear"},
                {"support_mean", std::to_string(options.support)},
                {"seed", std::to_string(options.seed)},
                {"max_iter", std::to_string(options.max_iter)},
                {"tol", format_double(options.tol)}};
    return r;
}

} // namespace kshs
