#pragma once

// File formats: JSON count files, CSV element estimates and layer reports,
// and the published-value fixtures under data/.

#include "layerq/qkd.hpp"
#include "layerq/tomography.hpp"
#include "layerq/witness.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace layerq::io {

/// Written into every output; timestamp is omitted when empty.
struct RunMetadata {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> timestamp;
};

/// UTC time as ISO-8601.
std::string utc_timestamp();

/// Accepts a bare array of {setting, outcome, counts} or an object whose
/// "records" member is such an array. Counts must be non-negative integers.
std::vector<tomography::CountRecord> parse_counts(const std::string& json_text);
std::vector<tomography::CountRecord> read_counts(const std::filesystem::path& path);

/// Object form: {"seed", "timestamp", "records": [...]}.
std::string format_counts(const std::vector<tomography::CountRecord>& records, const RunMetadata& meta);
void write_counts(const std::filesystem::path& path, const std::vector<tomography::CountRecord>& records,
                  const RunMetadata& meta);

/// Columns label,value,std_dev preceded by '#' metadata lines.
std::string format_estimates_csv(const witness::ElementTable& elements, const RunMetadata& meta);

struct ElementFixture {
    witness::ElementTable elements;
    double fidelity = 0.0;        // published value
    double fidelity_std = 0.0;
};
ElementFixture read_element_fixture(const std::filesystem::path& path);

struct PublishedSubspace {
    std::string ket_a;
    std::string ket_b;
    double value;
    double std_dev;
};
std::vector<PublishedSubspace> read_subspace_fixture(const std::filesystem::path& path);

struct PublishedLayer {
    qkd::QberReport report;
    double printed_rate;
};
/// Rows in layer order; pairwise entries are (A,B) and (A,C).
std::vector<PublishedLayer> read_qber_fixture(const std::filesystem::path& path);

struct LayerRow {
    qkd::QberReport report;
    qkd::LayerKeyReport rate;
};
/// subspace,qber_z,qber_x,qber_z_ab,qber_z_ac,key_per_round_mean,key_per_round_pessimistic;
/// pairwise cells are empty for two-party layers.
std::string format_qkd_csv(const std::vector<LayerRow>& rows, const RunMetadata& meta);

/// Writes text, creating parent directories; throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace layerq::io
