#include "core/data.hpp"

#include <algorithm>
#include <array>

#include "core/rng.hpp"

namespace raptor {

EmbeddingDataset::EmbeddingDataset(Matrix features, std::vector<int> labels,
                                   std::optional<std::uint32_t> layer_id)
    : features_(std::move(features)), labels_(std::move(labels)), layer_id_(layer_id) {
    require(static_cast<std::size_t>(features_.rows()) == labels_.size(),
            ErrorCode::DimensionMismatch, "feature rows and label count differ");
    require(features_.cols() >= 1, ErrorCode::InvalidArgument, "dataset needs p >= 1");
    require(labels_.size() >= 2, ErrorCode::InvalidArgument, "dataset needs n >= 2");
    require(features_.allFinite(), ErrorCode::InvalidArgument, "non-finite feature entry");
    for (int y : labels_)
        require(y == 0 || y == 1, ErrorCode::InvalidArgument, "labels must be 0 or 1");
}

Vector EmbeddingDataset::signed_labels() const { return to_signed(labels_); }

EmbeddingDataset EmbeddingDataset::subset(std::span<const std::size_t> idx) const {
    return EmbeddingDataset(select_rows(features_, idx), select(labels_, idx), layer_id_);
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        require(idx[i] < static_cast<std::size_t>(m.rows()), ErrorCode::InvalidArgument,
                "row index out of range");
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
    }
    return out;
}

std::vector<int> select(const std::vector<int>& labels, std::span<const std::size_t> idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) {
        require(i < labels.size(), ErrorCode::InvalidArgument, "label index out of range");
        out.push_back(labels[i]);
    }
    return out;
}

Vector to_signed(std::span<const int> labels) {
    Vector y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i)
        y[static_cast<Eigen::Index>(i)] = labels[i] == 1 ? 1.0 : -1.0;
    return y;
}

bool has_both_classes(std::span<const int> labels) {
    bool zero = false, one = false;
    for (int y : labels) (y == 1 ? one : zero) = true;
    return zero && one;
}

namespace {

SplitIndices split_impl(std::span<const int> labels, double test_frac, double val_frac,
                        std::uint64_t seed) {
    std::array<IndexSet, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] == 0 || labels[i] == 1, ErrorCode::InvalidArgument,
                "labels must be 0 or 1");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    const std::size_t n_parts = test_frac > 0.0 ? 3 : 2;
    for (const auto& members : by_class) {
        if (!members.empty() && members.size() < n_parts)
            throw Error(ErrorCode::InsufficientClassCount,
                        "a class has " + std::to_string(members.size()) +
                            " examples; need at least " + std::to_string(n_parts));
    }

    Rng rng(seed);
    SplitIndices out;
    for (auto& members : by_class) {
        if (members.empty()) continue;
        rng.shuffle(std::span<std::size_t>(members));
        const auto count = static_cast<long>(members.size());
        // At least one example per class in every requested part, and at
        // least one left for training.
        long n_test = test_frac > 0.0 ? std::max(1L, round_half_up(count * test_frac)) : 0L;
        long n_val = std::max(1L, round_half_up(count * val_frac));
        while (n_test + n_val > count - 1) {
            if (n_val > 1) --n_val;
            else --n_test;
        }
        auto it = members.begin();
        out.test.insert(out.test.end(), it, it + n_test);
        it += n_test;
        out.val.insert(out.val.end(), it, it + n_val);
        it += n_val;
        out.train.insert(out.train.end(), it, members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

}  // namespace

SplitIndices stratified_split(std::span<const int> labels, double test_frac, double val_frac,
                              std::uint64_t seed) {
    require(test_frac > 0.0 && test_frac < 1.0 && val_frac > 0.0 && val_frac < 1.0,
            ErrorCode::InvalidArgument, "split fractions must lie in (0,1)");
    require(test_frac + val_frac < 1.0, ErrorCode::InvalidArgument,
            "test_frac + val_frac must be < 1");
    return split_impl(labels, test_frac, val_frac, seed);
}

SplitIndices stratified_train_val_split(std::span<const int> labels, double val_frac,
                                        std::uint64_t seed) {
    require(val_frac > 0.0 && val_frac < 1.0, ErrorCode::InvalidArgument,
            "val_frac must lie in (0,1)");
    return split_impl(labels, 0.0, val_frac, seed);
}

Standardizer fit_standardizer(const Matrix& features, std::span<const std::size_t> train_idx) {
    require(!train_idx.empty(), ErrorCode::InvalidArgument, "empty training index set");
    const auto p = features.cols();
    Standardizer out{Vector::Zero(p), Vector::Zero(p)};
    for (auto i : train_idx) {
        require(i < static_cast<std::size_t>(features.rows()), ErrorCode::InvalidArgument,
                "training index out of range");
        out.mu += features.row(static_cast<Eigen::Index>(i)).transpose();
    }
    const double n = static_cast<double>(train_idx.size());
    out.mu /= n;
    for (auto i : train_idx)
        out.s += (features.row(static_cast<Eigen::Index>(i)).transpose() - out.mu)
                     .cwiseAbs2();
    out.s = (out.s / n).cwiseSqrt();
    for (Eigen::Index j = 0; j < p; ++j)
        if (out.s[j] == 0.0) out.s[j] = 1.0;
    return out;
}

Matrix apply_standardizer(const Standardizer& std, const Matrix& features) {
    require(static_cast<std::size_t>(features.cols()) == std.dim(),
            ErrorCode::DimensionMismatch, "standardizer dimension mismatch");
    Matrix out = features.rowwise() - std.mu.transpose();
    out.array().rowwise() /= std.s.transpose().array();
    return out;
}

Matrix invert_standardizer(const Standardizer& std, const Matrix& standardized) {
    require(static_cast<std::size_t>(standardized.cols()) == std.dim(),
            ErrorCode::DimensionMismatch, "standardizer dimension mismatch");
    Matrix out = standardized.array().rowwise() * std.s.transpose().array();
    out.rowwise() += std.mu.transpose();
    return out;
}

EmbeddingDataset sample_from_teacher(const Vector& direction, double kappa, std::size_t n,
                                     std::uint64_t seed) {
    const auto p = direction.size();
    require(p >= 1, ErrorCode::InvalidArgument, "teacher dimension must be >= 1");
    require(kappa >= 0.0 && std::isfinite(kappa), ErrorCode::InvalidArgument,
            "kappa must be finite and non-negative");
    const Vector beta = kappa * std::sqrt(static_cast<double>(p)) * direction;
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));

    Rng rng(seed);
    Matrix x(static_cast<Eigen::Index>(n), p);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(static_cast<Eigen::Index>(i));
        for (Eigen::Index j = 0; j < p; ++j) row[j] = scale * rng.normal();
        const double score = row.dot(beta);
        labels[i] = rng.uniform() < sigmoid(score) ? 1 : 0;
    }
    return EmbeddingDataset(std::move(x), std::move(labels));
}

TeacherSample generate_teacher_student(const TeacherConfig& cfg) {
    require(cfg.p >= 1 && cfg.n >= 1, ErrorCode::InvalidArgument, "teacher config needs p, n >= 1");
    Rng teacher_rng(derive_seed(cfg.seed, 0));
    Vector v(static_cast<Eigen::Index>(cfg.p));
    do {
        for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = teacher_rng.normal();
    } while (v.norm() == 0.0);
    v /= v.norm();
    auto data = sample_from_teacher(v, cfg.kappa, cfg.n, derive_seed(cfg.seed, 1));
    return TeacherSample{std::move(data), std::move(v)};
}

}  // namespace raptor
