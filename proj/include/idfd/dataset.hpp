#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idfd/augment.hpp"
#include "idfd/matrix.hpp"
#include "idfd/rng.hpp"

namespace idfd {

/// n samples, either feature vectors (shape {1, p, 1}) or 8-bit images
/// (values 0..255 stored as doubles), with optional ground-truth labels.
struct Dataset {
    Matrix samples;
    SampleShape shape;
    bool is_image = false;
    std::optional<std::vector<long long>> labels;
    std::string name;
    std::filesystem::path source;

    std::size_t size() const noexcept { return samples.rows(); }
    /// Number of distinct labels; 0 when unlabeled.
    std::size_t label_count() const;
    /// Encoder input: images are scaled to [0, 1], vectors pass through.
    Matrix features() const;

    /// Compares content only; name and source are bookkeeping.
    bool operator==(const Dataset& o) const {
        return samples == o.samples && shape == o.shape && is_image == o.is_image &&
               labels == o.labels;
    }
};

/// Throws DimensionMismatch / DomainError when the invariants fail.
void validate(const Dataset& ds);

struct SphereMixtureSpec {
    std::size_t k = 4;
    std::size_t n = 400;
    std::size_t dim = 32;
    /// Minimum pairwise angle between cluster directions, radians.
    double separation = 1.0;
    /// Standard deviation of the isotropic noise added to each sample.
    double noise = 0.0;
};

/// k unit directions with pairwise angle >= separation; sample i belongs to
/// cluster i % k and equals its direction plus N(0, noise^2 I).
/// Throws InfeasibleSeparation when no such directions can be found.
Dataset gen_sphere_mixture(const SphereMixtureSpec& spec, SeededRng& rng);

/// Cluster directions alone (k x dim, unit rows), as used by gen_sphere_mixture.
Matrix separated_directions(std::size_t k, std::size_t dim, double separation, SeededRng& rng);

enum class DatasetFormat { Csv, CsvLabeled, Image };

DatasetFormat parse_dataset_format(std::string_view text);
std::string_view to_string(DatasetFormat f) noexcept;

/// Csv: one sample per line, comma separated. CsvLabeled: the last column is
/// an integer label. Image: the binary container
///   "IDFD" | version u16 | n u32 | h u16 | w u16 | c u8 | n*h*w*c bytes | [n label bytes]
/// with little-endian integers and HWC pixel order.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
void save_dataset(const std::filesystem::path& path, const Dataset& ds, DatasetFormat format);

}  // namespace idfd
