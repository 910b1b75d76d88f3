#include "core/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace raptor::io {

namespace {

[[noreturn]] void io_fail(const fs::path& path, const std::string& what) {
    throw Error(ErrorCode::Io, what + ": " + path.string());
}

[[noreturn]] void format_fail(const fs::path& path, const std::string& what) {
    throw Error(ErrorCode::Format, what + " in " + path.string());
}

std::uint32_t to_le32(std::uint32_t x) {
    if constexpr (std::endian::native == std::endian::little) return x;
    return ((x & 0xffu) << 24) | ((x & 0xff00u) << 8) | ((x >> 8) & 0xff00u) | (x >> 24);
}

std::uint64_t to_le64(std::uint64_t x) {
    if constexpr (std::endian::native == std::endian::little) return x;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((x >> (8 * i)) & 0xffu);
    return r;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) io_fail(path, "cannot open for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) io_fail(path, "write failed");
}

std::string join_doubles(const Vector& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    if (s.empty()) return parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return parts;
}

Vector parse_doubles(const std::string& s) {
    const auto parts = split(s, ',');
    Vector v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(parts[i]);
    return v;
}

template <typename T>
T parse_integer(const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw Error(ErrorCode::Format, "not an integer: '" + text + "'");
    return value;
}

const std::string& need(const KeyValues& kv, const std::string& key, const fs::path& path) {
    const auto it = kv.find(key);
    if (it == kv.end()) format_fail(path, "missing key '" + key + "'");
    return it->second;
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& text) {
    if (text == "nan" || text == "NaN" || text == "-nan") return std::nan("");
    if (text == "inf") return HUGE_VAL;
    if (text == "-inf") return -HUGE_VAL;
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw Error(ErrorCode::Format, "not a number: '" + text + "'");
    return value;
}

KeyValues read_key_values(const fs::path& path) {
    std::ifstream in(path);
    if (!in) io_fail(path, "cannot open for reading");
    KeyValues kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) format_fail(path, "line without '=': '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    if (in.bad()) io_fail(path, "read failed");
    return kv;
}

void write_key_values(const fs::path& path,
                      const std::vector<std::pair<std::string, std::string>>& kv) {
    auto out = open_out(path);
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    finish(out, path);
}

fs::path manifest_path(const fs::path& matrix_path) {
    return fs::path(matrix_path.string() + ".manifest");
}

fs::path teacher_path(const fs::path& matrix_path) {
    return fs::path(matrix_path.string() + ".teacher");
}

void write_matrix(const fs::path& path, const Matrix& m) {
    require(m.rows() <= 0xffffffffLL && m.cols() <= 0xffffffffLL, ErrorCode::InvalidArgument,
            "matrix too large for the embedding format");
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write(kEmbeddingMagic, sizeof kEmbeddingMagic);
    const std::uint32_t dims[2] = {to_le32(static_cast<std::uint32_t>(m.rows())),
                                   to_le32(static_cast<std::uint32_t>(m.cols()))};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    std::vector<std::uint64_t> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row[static_cast<std::size_t>(j)] = to_le64(std::bit_cast<std::uint64_t>(m(i, j)));
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(std::uint64_t)));
    }
    finish(out, path);
}

Matrix read_matrix(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "cannot open for reading");
    char magic[8];
    std::uint32_t dims[2];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kEmbeddingMagic, sizeof magic) != 0)
        format_fail(path, "bad magic");
    if (!in.read(reinterpret_cast<char*>(dims), sizeof dims)) format_fail(path, "truncated header");
    const std::size_t n = to_le32(dims[0]);
    const std::size_t p = to_le32(dims[1]);
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    std::vector<std::uint64_t> row(p);
    for (std::size_t i = 0; i < n; ++i) {
        if (!in.read(reinterpret_cast<char*>(row.data()),
                     static_cast<std::streamsize>(p * sizeof(std::uint64_t))))
            format_fail(path, "truncated matrix data");
        for (std::size_t j = 0; j < p; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::bit_cast<double>(to_le64(row[j]));
    }
    if (in.peek() != std::char_traits<char>::eof()) format_fail(path, "trailing bytes");
    return m;
}

void write_manifest(const fs::path& path, const EmbeddingManifest& manifest) {
    std::string labels;
    for (std::size_t i = 0; i < manifest.labels.size(); ++i) {
        if (i) labels += ',';
        labels += std::to_string(manifest.labels[i]);
    }
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("labels", labels);
    if (manifest.layer_id) kv.emplace_back("layer_id", std::to_string(*manifest.layer_id));
    kv.emplace_back("generator", manifest.generator);
    if (manifest.seed) kv.emplace_back("seed", std::to_string(*manifest.seed));
    if (manifest.kappa) kv.emplace_back("kappa", format_double(*manifest.kappa));
    write_key_values(path, kv);
}

EmbeddingManifest read_manifest(const fs::path& path) {
    const KeyValues kv = read_key_values(path);
    EmbeddingManifest m;
    for (const auto& tok : split(need(kv, "labels", path), ','))
        m.labels.push_back(parse_integer<int>(tok));
    if (auto it = kv.find("layer_id"); it != kv.end())
        m.layer_id = parse_integer<std::uint32_t>(it->second);
    if (auto it = kv.find("generator"); it != kv.end()) m.generator = it->second;
    if (auto it = kv.find("seed"); it != kv.end()) m.seed = parse_integer<std::uint64_t>(it->second);
    if (auto it = kv.find("kappa"); it != kv.end()) m.kappa = parse_double(it->second);
    return m;
}

void write_embeddings(const fs::path& path, const EmbeddingDataset& data,
                      EmbeddingManifest manifest) {
    manifest.labels = data.labels();
    if (!manifest.layer_id) manifest.layer_id = data.layer_id();
    write_matrix(path, data.features());
    write_manifest(manifest_path(path), manifest);
}

EmbeddingDataset read_embeddings(const fs::path& path, EmbeddingManifest* manifest) {
    Matrix x = read_matrix(path);
    EmbeddingManifest m = read_manifest(manifest_path(path));
    if (static_cast<Eigen::Index>(m.labels.size()) != x.rows())
        throw Error(ErrorCode::DimensionMismatch,
                    "manifest label count does not match matrix rows: " + path.string());
    EmbeddingDataset data(std::move(x), m.labels, m.layer_id);
    if (manifest) *manifest = std::move(m);
    return data;
}

void write_vector(const fs::path& path, const Vector& v) {
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
    finish(out, path);
}

Vector read_vector(const fs::path& path) {
    std::ifstream in(path);
    if (!in) io_fail(path, "cannot open for reading");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        values.push_back(parse_double(line));
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_probe(const fs::path& path, const ProbeRecord& rec) {
    const ProbeModel& m = rec.model;
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("p", std::to_string(m.dim()));
    kv.emplace_back("lambda", format_double(m.lambda()));
    kv.emplace_back("b_std", format_double(m.b_std()));
    kv.emplace_back("b_orig", format_double(m.b_orig()));
    kv.emplace_back("w_std", join_doubles(m.w_std()));
    kv.emplace_back("omega", join_doubles(m.omega()));
    if (rec.layer_id) kv.emplace_back("layer_id", std::to_string(*rec.layer_id));
    if (rec.test_accuracy) kv.emplace_back("test_accuracy", format_double(*rec.test_accuracy));
    write_key_values(path, kv);
}

ProbeRecord read_probe(const fs::path& path) {
    const KeyValues kv = read_key_values(path);
    const auto p = parse_integer<std::size_t>(need(kv, "p", path));
    Vector w_std = parse_doubles(need(kv, "w_std", path));
    Vector omega = parse_doubles(need(kv, "omega", path));
    if (static_cast<std::size_t>(w_std.size()) != p || static_cast<std::size_t>(omega.size()) != p)
        format_fail(path, "weight vector length differs from p");
    ProbeRecord rec{ProbeModel(std::move(w_std), parse_double(need(kv, "b_std", path)),
                               std::move(omega), parse_double(need(kv, "b_orig", path)),
                               parse_double(need(kv, "lambda", path))),
                    std::nullopt, std::nullopt};
    if (auto it = kv.find("layer_id"); it != kv.end())
        rec.layer_id = parse_integer<std::uint32_t>(it->second);
    if (auto it = kv.find("test_accuracy"); it != kv.end())
        rec.test_accuracy = parse_double(it->second);
    return rec;
}

void write_fixed_point(const fs::path& path, const FixedPointSolution& sol) {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("delta", format_double(sol.params.delta));
    kv.emplace_back("lambda", format_double(sol.params.lambda));
    kv.emplace_back("kappa", format_double(sol.params.kappa));
    kv.emplace_back("alpha_bar", format_double(sol.alpha_bar));
    kv.emplace_back("sigma_bar", format_double(sol.sigma_bar));
    kv.emplace_back("gamma_bar", format_double(sol.gamma_bar));
    for (int i = 0; i < 3; ++i)
        kv.emplace_back("residual_" + std::to_string(i + 1), format_double(sol.residuals[i]));
    kv.emplace_back("residual_max", format_double(sol.residual_max()));
    kv.emplace_back("quad_nodes", std::to_string(sol.quad_nodes));
    kv.emplace_back("acc_pred", format_double(asymptotic_accuracy(sol)));
    kv.emplace_back("bayes_ceiling", format_double(bayes_ceiling(sol.params.kappa)));
    const StabilityPrediction st = stability_prediction(sol);
    kv.emplace_back("stability", format_double(st.stability));
    kv.emplace_back("alignment", format_double(st.alignment));
    kv.emplace_back("n_solutions", std::to_string(1 + sol.alternatives.size()));
    for (std::size_t i = 0; i < sol.alternatives.size(); ++i) {
        const auto& a = sol.alternatives[i];
        kv.emplace_back("alternative_" + std::to_string(i + 1),
                        format_double(a[0]) + ',' + format_double(a[1]) + ',' + format_double(a[2]));
    }
    write_key_values(path, kv);
}

FixedPointSolution read_fixed_point(const fs::path& path) {
    const KeyValues kv = read_key_values(path);
    const auto num = [&](const std::string& key) { return parse_double(need(kv, key, path)); };
    FixedPointSolution sol;
    sol.params = RegimeParams{num("delta"), num("lambda"), num("kappa")};
    sol.alpha_bar = num("alpha_bar");
    sol.sigma_bar = num("sigma_bar");
    sol.gamma_bar = num("gamma_bar");
    for (int i = 0; i < 3; ++i) sol.residuals[i] = num("residual_" + std::to_string(i + 1));
    sol.quad_nodes = parse_integer<std::size_t>(need(kv, "quad_nodes", path));
    for (std::size_t i = 1;; ++i) {
        const auto it = kv.find("alternative_" + std::to_string(i));
        if (it == kv.end()) break;
        const Vector a = parse_doubles(it->second);
        if (a.size() != 3) format_fail(path, "alternative solution must have three entries");
        sol.alternatives.push_back({a[0], a[1], a[2]});
    }
    return sol;
}

void write_robustness_csv(const fs::path& path, const std::vector<RobustnessRow>& rows,
                          const AblationConfig& cfg) {
    auto out = open_out(path);
    out << "# k_runs=" << cfg.k_runs << " drop_frac=" << format_double(cfg.drop_frac)
        << " val_frac=" << format_double(cfg.val_frac) << " seed=" << cfg.seed << '\n';
    out << "layer_id,robustness,n_runs,drop_frac,lambda_per_run\n";
    for (const auto& r : rows) {
        out << r.layer_id << ',' << format_double(r.robustness) << ',' << r.lambdas.size() << ','
            << format_double(cfg.drop_frac) << ',';
        for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
            if (i) out << ';';
            out << format_double(r.lambdas[i]);
        }
        out << '\n';
    }
    finish(out, path);
}

void write_steering_report(const fs::path& path, const SteeringReport& report,
                           const SteeringConfig& cfg) {
    std::string layers;
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        if (i) layers += ',';
        layers += std::to_string(cfg.layers[i]);
    }
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("mode", cfg.mode == SteerMode::Towards ? "towards" : "away");
    kv.emplace_back("target_prob", format_double(cfg.target_prob));
    kv.emplace_back("tau", cfg.reliability_threshold ? format_double(*cfg.reliability_threshold)
                                                     : std::string("none"));
    kv.emplace_back("layers", layers);
    kv.emplace_back("evaluated", std::to_string(report.evaluated));
    kv.emplace_back("skipped", std::to_string(report.skipped));
    kv.emplace_back("success_rate", format_double(report.success_rate));
    kv.emplace_back("intervention_rate", format_double(report.intervention_rate));
    kv.emplace_back("alpha_median", format_double(report.alpha_median));
    kv.emplace_back("alpha_p90", format_double(report.alpha_p90));
    kv.emplace_back("alpha_max", format_double(report.alpha_max));
    write_key_values(path, kv);
}

void write_steering_csv(const fs::path& path, const std::vector<SteeringOutcome>& outcomes) {
    auto out = open_out(path);
    out << "layer_id,alpha,intervened,pre_prob,post_prob,skipped_reason\n";
    for (const auto& o : outcomes) {
        out << o.layer_id << ',' << format_double(o.alpha) << ',' << (o.intervened ? 1 : 0) << ','
            << format_double(o.pre_prob) << ',' << format_double(o.post_prob) << ','
            << (o.skipped_reason ? skip_reason_name(*o.skipped_reason) : "") << '\n';
    }
    finish(out, path);
}

}  // namespace raptor::io
