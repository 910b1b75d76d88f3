#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/data.hpp"
#include "core/probe.hpp"
#include "core/robustness.hpp"
#include "core/steering.hpp"
#include "core/theory.hpp"

namespace raptor::io {

namespace fs = std::filesystem;

inline constexpr char kEmbeddingMagic[8] = {'R', 'P', 'T', 'E', 'M', 'B', '0', '1'};

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double x);
double parse_double(const std::string& text);

using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(const fs::path& path);
void write_key_values(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& kv);

/// Manifest sidecar of an embedding file, stored at `<matrix path>.manifest`.
struct EmbeddingManifest {
    std::vector<int> labels;
    std::optional<std::uint32_t> layer_id;
    std::string generator;
    std::optional<std::uint64_t> seed;
    std::optional<double> kappa;
};

fs::path manifest_path(const fs::path& matrix_path);
fs::path teacher_path(const fs::path& matrix_path);

void write_matrix(const fs::path& path, const Matrix& m);
Matrix read_matrix(const fs::path& path);

void write_manifest(const fs::path& path, const EmbeddingManifest& manifest);
EmbeddingManifest read_manifest(const fs::path& path);

/// Writes the matrix file and its manifest.
void write_embeddings(const fs::path& path, const EmbeddingDataset& data,
                      EmbeddingManifest manifest = {});
EmbeddingDataset read_embeddings(const fs::path& path, EmbeddingManifest* manifest = nullptr);

void write_vector(const fs::path& path, const Vector& v);
Vector read_vector(const fs::path& path);

struct ProbeRecord {
    ProbeModel model;
    std::optional<std::uint32_t> layer_id;
    std::optional<double> test_accuracy;
};

void write_probe(const fs::path& path, const ProbeRecord& rec);
ProbeRecord read_probe(const fs::path& path);

void write_fixed_point(const fs::path& path, const FixedPointSolution& sol);
FixedPointSolution read_fixed_point(const fs::path& path);

struct RobustnessRow {
    std::uint32_t layer_id = 0;
    double robustness = 0.0;
    std::vector<double> lambdas;
};

void write_robustness_csv(const fs::path& path, const std::vector<RobustnessRow>& rows,
                          const AblationConfig& cfg);

void write_steering_report(const fs::path& path, const SteeringReport& report,
                           const SteeringConfig& cfg);
void write_steering_csv(const fs::path& path, const std::vector<SteeringOutcome>& outcomes);

}  // namespace raptor::io
