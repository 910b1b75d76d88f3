#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "core/io.hpp"
#include "core/sweep.hpp"
#include "test_support.hpp"

using namespace raptor;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("raptor_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                 "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Io, DoubleRoundTrip) {
    for (double x : {0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) {
        EXPECT_EQ(io::parse_double(io::format_double(x)), x);
    }
    EXPECT_TRUE(std::isnan(io::parse_double("nan")));
    EXPECT_EQ(io::parse_double("inf"), std::numeric_limits<double>::infinity());
    EXPECT_RAPTOR_ERROR(io::parse_double("1.0x"), ErrorCode::Format);
    EXPECT_RAPTOR_ERROR(io::parse_double(""), ErrorCode::Format);
}

TEST(Io, EmbeddingsRoundTrip) {
    TempDir dir;
    const TeacherSample s = generate_teacher_student({7, 30, 1.5, 3});
    const EmbeddingDataset d(s.data.features(), s.data.labels(), 12u);
    io::EmbeddingManifest m;
    m.layer_id = 12u;
    m.generator = "teacher";
    m.seed = 3;
    m.kappa = 1.5;
    io::write_embeddings(dir / "e.bin", d, m);
    io::EmbeddingManifest back;
    const EmbeddingDataset r = io::read_embeddings(dir / "e.bin", &back);
    EXPECT_EQ(r.features(), d.features());
    EXPECT_EQ(r.labels(), d.labels());
    EXPECT_EQ(r.layer_id(), std::optional<std::uint32_t>(12u));
    EXPECT_EQ(back.generator, "teacher");
    EXPECT_EQ(back.seed, std::optional<std::uint64_t>(3));
    EXPECT_EQ(back.kappa, std::optional<double>(1.5));
}

TEST(Io, MatrixFormatErrors) {
    TempDir dir;
    {
        std::ofstream out(dir / "bad.bin", std::ios::binary);
        out << "NOTMAGIC";
    }
    EXPECT_RAPTOR_ERROR(io::read_matrix(dir / "bad.bin"), ErrorCode::Format);
    io::write_matrix(dir / "m.bin", Matrix::Ones(3, 2));
    fs::resize_file(dir / "m.bin", fs::file_size(dir / "m.bin") - 4);
    EXPECT_RAPTOR_ERROR(io::read_matrix(dir / "m.bin"), ErrorCode::Format);
    io::write_matrix(dir / "m2.bin", Matrix::Ones(3, 2));
    {
        std::ofstream out(dir / "m2.bin", std::ios::binary | std::ios::app);
        out << "x";
    }
    EXPECT_RAPTOR_ERROR(io::read_matrix(dir / "m2.bin"), ErrorCode::Format);
    EXPECT_RAPTOR_ERROR(io::read_matrix(dir / "missing.bin"), ErrorCode::Io);
}

TEST(Io, ManifestLabelCountMustMatch) {
    TempDir dir;
    io::write_matrix(dir / "m.bin", Matrix::Ones(3, 2));
    io::EmbeddingManifest m;
    m.labels = {0, 1};
    io::write_manifest(io::manifest_path(dir / "m.bin"), m);
    EXPECT_RAPTOR_ERROR(io::read_embeddings(dir / "m.bin"), ErrorCode::DimensionMismatch);
}

TEST(Io, ProbeRoundTrip) {
    TempDir dir;
    const ProbeModel model((Vector(3) << 1, -2, 0.5).finished(), 0.25,
                           (Vector(3) << 0.5, -2, 0.1).finished(), -1.0 / 3.0, 0.0705);
    io::write_probe(dir / "p.txt", {model, 4u, 0.8125});
    const io::ProbeRecord r = io::read_probe(dir / "p.txt");
    EXPECT_EQ(r.model.w_std(), model.w_std());
    EXPECT_EQ(r.model.omega(), model.omega());
    EXPECT_EQ(r.model.b_orig(), model.b_orig());
    EXPECT_EQ(r.model.b_std(), model.b_std());
    EXPECT_EQ(r.model.lambda(), model.lambda());
    EXPECT_EQ(r.layer_id, std::optional<std::uint32_t>(4u));
    EXPECT_EQ(r.test_accuracy, std::optional<double>(0.8125));

    io::write_probe(dir / "q.txt", {model, std::nullopt, std::nullopt});
    const io::ProbeRecord q = io::read_probe(dir / "q.txt");
    EXPECT_FALSE(q.layer_id.has_value());
    EXPECT_FALSE(q.test_accuracy.has_value());
}

TEST(Io, FixedPointRoundTrip) {
    TempDir dir;
    FixedPointOptions opts;
    opts.explore_all = false;
    const FixedPointSolution sol = solve_fixed_point({2.0, 0.1, 1.0}, opts);
    io::write_fixed_point(dir / "fp.txt", sol);
    const FixedPointSolution back = io::read_fixed_point(dir / "fp.txt");
    EXPECT_EQ(back.alpha_bar, sol.alpha_bar);
    EXPECT_EQ(back.sigma_bar, sol.sigma_bar);
    EXPECT_EQ(back.gamma_bar, sol.gamma_bar);
    EXPECT_EQ(back.residuals, sol.residuals);
    EXPECT_EQ(back.params.kappa, 1.0);
    const auto kv = io::read_key_values(dir / "fp.txt");
    EXPECT_EQ(io::parse_double(kv.at("acc_pred")), asymptotic_accuracy(sol));
    EXPECT_TRUE(kv.count("stability"));
}

TEST(Io, RobustnessCsv) {
    TempDir dir;
    AblationConfig cfg;
    cfg.k_runs = 2;
    cfg.seed = 5;
    io::write_robustness_csv(dir / "r.csv", {{0, 0.9, {0.1, 0.2}}, {3, 0.5, {1.0, 1.0}}}, cfg);
    std::istringstream lines(slurp(dir / "r.csv"));
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line.rfind("# k_runs=2", 0), 0u);
    std::getline(lines, line);
    EXPECT_EQ(line, "layer_id,robustness,n_runs,drop_frac,lambda_per_run");
    int rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    EXPECT_EQ(rows, 2);
}

TEST(Io, SweepCsvMarksMissingValues) {
    TempDir dir;
    SweepResult res;
    SweepRow row;
    row.params = {1.0, 1.0, 1.0};
    row.error = "failed";
    res.rows.push_back(row);
    res.summary.failed_rows = 1;
    write_sweep_csv(dir / "s.csv", res);
    const std::string text = slurp(dir / "s.csv");
    EXPECT_NE(text.find("NA"), std::string::npos);
    EXPECT_EQ(text.find("nan"), std::string::npos);
}

TEST(Io, VectorRoundTrip) {
    TempDir dir;
    const Vector v = (Vector(4) << 1e-17, -3, 0.1, 7).finished();
    io::write_vector(dir / "v.txt", v);
    EXPECT_EQ(io::read_vector(dir / "v.txt"), v);
}
