#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/common.hpp"

namespace raptor {

using IndexSet = std::vector<std::size_t>;

/// n x p layer representations with binary labels. Immutable after
/// construction; the constructor enforces shape, finiteness and label range.
class EmbeddingDataset {
public:
    EmbeddingDataset(Matrix features, std::vector<int> labels,
                     std::optional<std::uint32_t> layer_id = std::nullopt);

    const Matrix& features() const noexcept { return features_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    std::optional<std::uint32_t> layer_id() const noexcept { return layer_id_; }

    std::size_t rows() const noexcept { return labels_.size(); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(features_.cols()); }

    /// Labels mapped to {-1, +1}.
    Vector signed_labels() const;

    EmbeddingDataset subset(std::span<const std::size_t> idx) const;

private:
    Matrix features_;
    std::vector<int> labels_;
    std::optional<std::uint32_t> layer_id_;
};

struct SplitIndices {
    IndexSet train;
    IndexSet val;
    IndexSet test;
};

/// Per-coordinate training statistics; every entry of `s` is positive.
struct Standardizer {
    Vector mu;
    Vector s;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(mu.size()); }
};

struct TeacherConfig {
    std::size_t p = 0;
    std::size_t n = 0;
    double kappa = 0.0;
    std::uint64_t seed = 0;

    double delta() const { return static_cast<double>(n) / static_cast<double>(p); }
};

struct TeacherSample {
    EmbeddingDataset data;
    Vector direction;  ///< unit teacher direction v = beta* / |beta*|
};

Matrix select_rows(const Matrix& m, std::span<const std::size_t> idx);
std::vector<int> select(const std::vector<int>& labels, std::span<const std::size_t> idx);
Vector to_signed(std::span<const int> labels);
bool has_both_classes(std::span<const int> labels);

/// Stratified train/val/test split. Each present class contributes
/// round_half_up(count * frac) examples to test, then to val, the rest to
/// train; a class with fewer than three examples is rejected.
SplitIndices stratified_split(std::span<const int> labels, double test_frac, double val_frac,
                              std::uint64_t seed);

/// Two-way variant used by the ablation re-splits (test set left empty).
SplitIndices stratified_train_val_split(std::span<const int> labels, double val_frac,
                                        std::uint64_t seed);

Standardizer fit_standardizer(const Matrix& features, std::span<const std::size_t> train_idx);
Matrix apply_standardizer(const Standardizer& std, const Matrix& features);
Matrix invert_standardizer(const Standardizer& std, const Matrix& standardized);

/// Gaussian teacher-student data: rows ~ N(0, I_p / p), P(y = 1 | x) =
/// sigmoid(x . beta*) with |beta*|^2 = p kappa^2.
TeacherSample generate_teacher_student(const TeacherConfig& cfg);

/// Fresh draws from an existing teacher (same direction and kappa).
EmbeddingDataset sample_from_teacher(const Vector& direction, double kappa, std::size_t n,
                                     std::uint64_t seed);

}  // namespace raptor
