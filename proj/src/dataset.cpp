#include "idfd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "idfd/binary_io.hpp"
#include "idfd/errors.hpp"
#include "idfd/format.hpp"
#include "idfd/linalg.hpp"

namespace idfd {

std::size_t Dataset::label_count() const {
    if (!labels) return 0;
    return std::set<long long>(labels->begin(), labels->end()).size();
}

Matrix Dataset::features() const {
    if (!is_image) return samples;
    Matrix out = samples;
    for (double& x : out.data()) x /= 255.0;
    return out;
}

void validate(const Dataset& ds) {
    if (ds.samples.cols() != ds.shape.size()) {
        throw DimensionMismatch("dataset sample width differs from its declared shape");
    }
    if (ds.labels && ds.labels->size() != ds.size()) {
        throw DimensionMismatch("dataset has " + std::to_string(ds.labels->size()) +
                                " labels for " + std::to_string(ds.size()) + " samples");
    }
    if (ds.is_image) {
        for (double x : ds.samples.data()) {
            if (!(x >= 0.0 && x <= 255.0) || x != std::floor(x)) {
                throw DomainError("image pixel values must be integers in [0, 255]");
            }
        }
    }
}

namespace {

double min_pairwise_angle(const Matrix& dirs) {
    double worst = std::numbers::pi;
    for (std::size_t i = 0; i < dirs.rows(); ++i) {
        for (std::size_t j = i + 1; j < dirs.rows(); ++j) {
            const double c = std::clamp(dot(dirs.row(i), dirs.row(j)), -1.0, 1.0);
            worst = std::min(worst, std::acos(c));
        }
    }
    return worst;
}

std::vector<double> random_unit(std::size_t dim, SeededRng& rng) {
    std::vector<double> v(dim);
    double n = 0.0;
    do {
        for (double& x : v) x = rng.normal();
        n = norm(v);
    } while (n < 1e-12);
    for (double& x : v) x /= n;
    return v;
}

/// Haar-ish random orthogonal matrix by Gram-Schmidt on Gaussian rows.
Matrix random_rotation(std::size_t dim, SeededRng& rng) {
    Matrix q(dim, dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (;;) {
            std::vector<double> v = random_unit(dim, rng);
            for (std::size_t p = 0; p < r; ++p) {
                const double proj = dot(v, q.row(p));
                for (std::size_t c = 0; c < dim; ++c) v[c] -= proj * q(p, c);
            }
            const double n = norm(v);
            if (n < 1e-6) continue;
            for (std::size_t c = 0; c < dim; ++c) q(r, c) = v[c] / n;
            break;
        }
    }
    return q;
}

/// Largest achievable minimum angle where it is known in closed form; negative
/// when unknown.
double max_separation(std::size_t k, std::size_t dim) {
    if (k <= 1) return std::numbers::pi;
    if (dim == 1) return k == 2 ? std::numbers::pi : 0.0;
    if (dim == 2) return 2.0 * std::numbers::pi / static_cast<double>(k);
    if (dim + 1 >= k) return std::acos(-1.0 / static_cast<double>(k - 1));
    return -1.0;
}

/// Configuration attaining max_separation, before rotation.
Matrix extremal_directions(std::size_t k, std::size_t dim) {
    Matrix dirs(k, dim);
    if (dim == 1) {
        for (std::size_t i = 0; i < k; ++i) dirs(i, 0) = i % 2 == 0 ? 1.0 : -1.0;
        return dirs;
    }
    if (dim == 2) {
        for (std::size_t i = 0; i < k; ++i) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
            dirs(i, 0) = std::cos(a);
            dirs(i, 1) = std::sin(a);
        }
        return dirs;
    }
    // Regular simplex: centred basis vectors of R^k expressed in the Helmert
    // basis of the sum-zero subspace, which has k - 1 <= dim coordinates.
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t h = 1; h < k; ++h) {
            const double hd = static_cast<double>(h);
            const double scale = 1.0 / std::sqrt(hd * (hd + 1.0));
            double coord = 0.0;
            if (i < h) coord = scale;
            else if (i == h) coord = -hd * scale;
            dirs(i, h - 1) = coord;
        }
    }
    return l2_normalize_rows(dirs);
}

}  // namespace

Matrix separated_directions(std::size_t k, std::size_t dim, double separation, SeededRng& rng) {
    if (k == 0 || dim == 0) {
        throw DomainError("separated_directions: k and dim must be positive");
    }
    if (!(separation >= 0.0)) {
        throw DomainError("separated_directions: separation must be non-negative");
    }
    constexpr double kSlack = 1e-9;
    const double best = max_separation(k, dim);
    if (best >= 0.0 && separation > best + kSlack) {
        throw InfeasibleSeparation("cannot place " + std::to_string(k) + " directions in " +
                                   std::to_string(dim) + " dimensions at angle " +
                                   std::to_string(separation));
    }

    Matrix dirs(k, dim);
    const double max_cos = std::cos(separation);
    constexpr int kAttempts = 200;
    constexpr int kCandidates = 500;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        std::size_t placed = 0;
        for (; placed < k; ++placed) {
            bool ok = false;
            for (int c = 0; c < kCandidates && !ok; ++c) {
                const auto v = random_unit(dim, rng);
                ok = true;
                for (std::size_t p = 0; p < placed && ok; ++p) {
                    ok = dot(v, dirs.row(p)) <= max_cos;
                }
                if (ok) std::copy(v.begin(), v.end(), dirs.row(placed).begin());
            }
            if (!ok) break;
        }
        if (placed == k) return dirs;
    }

    if (best < 0.0) {
        throw InfeasibleSeparation("no configuration of " + std::to_string(k) +
                                   " directions found at angle " + std::to_string(separation));
    }
    const Matrix rotated = matmul(extremal_directions(k, dim), random_rotation(dim, rng));
    dirs = l2_normalize_rows(rotated);
    if (min_pairwise_angle(dirs) < separation - kSlack) {
        throw InfeasibleSeparation("extremal configuration misses the requested angle");
    }
    return dirs;
}

Dataset gen_sphere_mixture(const SphereMixtureSpec& spec, SeededRng& rng) {
    if (spec.k == 0 || spec.n < spec.k) {
        throw DomainError("gen_sphere_mixture: needs 1 <= k <= n");
    }
    if (!(spec.noise >= 0.0)) {
        throw DomainError("gen_sphere_mixture: noise must be non-negative");
    }
    const Matrix dirs = separated_directions(spec.k, spec.dim, spec.separation, rng);
    Dataset ds;
    ds.samples = Matrix(spec.n, spec.dim);
    ds.shape = {1, spec.dim, 1};
    ds.labels = std::vector<long long>(spec.n);
    ds.name = "sphere_mixture";
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t c = i % spec.k;
        (*ds.labels)[i] = static_cast<long long>(c);
        auto row = ds.samples.row(i);
        for (std::size_t j = 0; j < spec.dim; ++j) {
            const double z = rng.normal();
            row[j] = dirs(c, j) + spec.noise * z;
        }
    }
    return ds;
}

DatasetFormat parse_dataset_format(std::string_view text) {
    if (text == "csv") return DatasetFormat::Csv;
    if (text == "csv-labeled" || text == "csv_labeled") return DatasetFormat::CsvLabeled;
    if (text == "image" || text == "idfd") return DatasetFormat::Image;
    throw ConfigError("unknown dataset format '" + std::string(text) + "'");
}

std::string_view to_string(DatasetFormat f) noexcept {
    switch (f) {
        case DatasetFormat::Csv: return "csv";
        case DatasetFormat::CsvLabeled: return "csv-labeled";
        case DatasetFormat::Image: return "image";
    }
    return "?";
}

namespace {

constexpr char kImageMagic[4] = {'I', 'D', 'F', 'D'};
constexpr std::uint16_t kImageVersion = 1;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

Dataset load_csv(const std::filesystem::path& path, bool labeled) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::vector<double> values;
    std::vector<long long> labels;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::vector<std::string_view> cells;
        std::size_t start = 0;
        for (;;) {
            const auto comma = t.find(',', start);
            cells.push_back(trim(t.substr(start, comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        const std::size_t features = labeled ? cells.size() - 1 : cells.size();
        if (features == 0) {
            throw DimensionMismatch(path.string() + ":" + std::to_string(lineno) + ": no feature columns");
        }
        if (rows == 0) {
            width = features;
        } else if (features != width) {
            throw DimensionMismatch(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                    std::to_string(width) + " features, found " +
                                    std::to_string(features));
        }
        for (std::size_t c = 0; c < features; ++c) values.push_back(parse_double(cells[c]));
        if (labeled) labels.push_back(parse_integer(cells.back()));
        ++rows;
    }
    if (rows == 0) {
        throw EmptyInput(path.string() + " contains no samples");
    }
    Dataset ds;
    ds.samples = Matrix(rows, width, std::move(values));
    ds.shape = {1, width, 1};
    if (labeled) ds.labels = std::move(labels);
    return ds;
}

void save_csv(const std::filesystem::path& path, const Dataset& ds, bool labeled) {
    if (labeled && !ds.labels) {
        throw ConfigError("cannot write labeled CSV for an unlabeled dataset");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const auto row = ds.samples.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_double(row[c]);
        }
        if (labeled) out << ',' << (*ds.labels)[r];
        out << '\n';
    }
}

Dataset load_image(const std::filesystem::path& path) {
    const auto bytes = binary::read_file(path);
    binary::Reader r(bytes);
    if (bytes.size() < sizeof kImageMagic ||
        std::memcmp(bytes.data(), kImageMagic, sizeof kImageMagic) != 0) {
        throw BadMagic(path.string() + " does not start with the IDFD magic");
    }
    r.get_bytes(sizeof kImageMagic);
    const auto version = r.get<std::uint16_t>();
    if (version != kImageVersion) {
        throw BadMagic(path.string() + ": unsupported container version " + std::to_string(version));
    }
    const std::size_t n = r.get<std::uint32_t>();
    const std::size_t h = r.get<std::uint16_t>();
    const std::size_t w = r.get<std::uint16_t>();
    const std::size_t c = r.get<std::uint8_t>();
    const std::size_t pixels = h * w * c;
    if (n == 0 || pixels == 0) {
        throw DimensionMismatch(path.string() + ": empty image container");
    }
    if (r.remaining() < n * pixels) {
        throw TruncatedFile(path.string() + ": pixel payload holds " + std::to_string(r.remaining()) +
                            " bytes, header declares " + std::to_string(n * pixels));
    }
    const auto payload = r.get_bytes(n * pixels);
    Dataset ds;
    ds.samples = Matrix(n, pixels);
    for (std::size_t i = 0; i < payload.size(); ++i) ds.samples.data()[i] = payload[i];
    ds.shape = {h, w, c};
    ds.is_image = true;
    if (r.remaining() == n) {
        const auto raw = r.get_bytes(n);
        ds.labels = std::vector<long long>(raw.begin(), raw.end());
    } else if (r.remaining() != 0) {
        throw DimensionMismatch(path.string() + ": " + std::to_string(r.remaining()) +
                                " trailing bytes; expected 0 or " + std::to_string(n) + " labels");
    }
    return ds;
}

void save_image(const std::filesystem::path& path, const Dataset& ds) {
    if (!ds.is_image) {
        throw ConfigError("image container needs an image dataset");
    }
    validate(ds);
    if (ds.shape.height > 0xffff || ds.shape.width > 0xffff || ds.shape.channels > 0xff ||
        ds.size() > 0xffffffffULL) {
        throw DimensionMismatch("dataset too large for the image container");
    }
    binary::Writer w;
    w.put_tag(kImageMagic, sizeof kImageMagic);
    w.put<std::uint16_t>(kImageVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.size()));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(ds.shape.height));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(ds.shape.width));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(ds.shape.channels));
    for (double x : ds.samples.data()) w.put<std::uint8_t>(static_cast<std::uint8_t>(x));
    if (ds.labels) {
        for (long long l : *ds.labels) {
            if (l < 0 || l > 255) throw DomainError("image container labels must fit in a byte");
            w.put<std::uint8_t>(static_cast<std::uint8_t>(l));
        }
    }
    binary::write_file(path, w.bytes());
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    Dataset ds;
    switch (format) {
        case DatasetFormat::Csv: ds = load_csv(path, false); break;
        case DatasetFormat::CsvLabeled: ds = load_csv(path, true); break;
        case DatasetFormat::Image: ds = load_image(path); break;
    }
    ds.name = path.stem().string();
    ds.source = path;
    validate(ds);
    return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds, DatasetFormat format) {
    switch (format) {
        case DatasetFormat::Csv: save_csv(path, ds, false); break;
        case DatasetFormat::CsvLabeled: save_csv(path, ds, true); break;
        case DatasetFormat::Image: save_image(path, ds); break;
    }
}

}  // namespace idfd
