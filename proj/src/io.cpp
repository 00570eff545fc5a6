#include "layerq/io.hpp"

#include "layerq/error.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace layerq::io {

namespace {

using nlohmann::json;

std::string number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string metadata_lines(const RunMetadata& meta) {
    std::string out;
    if (meta.seed) out += "# seed=" + std::to_string(*meta.seed) + "\n";
    if (meta.timestamp) out += "# timestamp=" + *meta.timestamp + "\n";
    return out;
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(what + ": " + e.what());
    }
}

qkd::Measured measured(const json& pair, const std::string& what) {
    if (!pair.is_array() || pair.size() != 2) throw IoError(what + " must be a [value, std_dev] pair");
    return {pair[0].get<double>(), pair[1].get<double>()};
}

} // namespace

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<tomography::CountRecord> parse_counts(const std::string& json_text) {
    const json doc = parse_json(json_text, "count file");
    const json* records = &doc;
    if (doc.is_object()) {
        if (!doc.contains("records")) throw IoError("count file object has no \"records\" array");
        records = &doc.at("records");
    }
    if (!records->is_array()) throw IoError("count file must hold an array of records");
    std::vector<tomography::CountRecord> out;
    for (const auto& r : *records) {
        if (!r.is_object() || !r.contains("setting") || !r.contains("outcome") || !r.contains("counts"))
            throw IoError("count record needs setting, outcome and counts");
        const auto& c = r.at("counts");
        if (!c.is_number_integer() && !c.is_number_unsigned())
            throw IoError("counts must be an integer in record " + r.dump());
        const auto v = c.get<long long>();
        if (v < 0) throw IoError("counts must be non-negative in record " + r.dump());
        out.push_back({r.at("setting").get<std::string>(), r.at("outcome").get<std::string>(),
                       static_cast<double>(v)});
    }
    return out;
}

std::vector<tomography::CountRecord> read_counts(const std::filesystem::path& path) {
    return parse_counts(read_text(path));
}

std::string format_counts(const std::vector<tomography::CountRecord>& records, const RunMetadata& meta) {
    json doc = json::object();
    if (meta.seed) doc["seed"] = *meta.seed;
    if (meta.timestamp) doc["timestamp"] = *meta.timestamp;
    json arr = json::array();
    for (const auto& r : records) {
        json rec = {{"setting", r.setting}, {"outcome", r.outcome}};
        if (r.counts == std::floor(r.counts))
            rec["counts"] = static_cast<long long>(r.counts);
        else
            rec["counts"] = r.counts;
        arr.push_back(std::move(rec));
    }
    doc["records"] = std::move(arr);
    return doc.dump(1) + "\n";
}

void write_counts(const std::filesystem::path& path, const std::vector<tomography::CountRecord>& records,
                  const RunMetadata& meta) {
    write_text(path, format_counts(records, meta));
}

std::string format_estimates_csv(const witness::ElementTable& elements, const RunMetadata& meta) {
    std::string out = metadata_lines(meta);
    out += "label,value,std_dev\n";
    for (const auto& e : elements.entries())
        out += e.label() + "," + number(e.value) + "," + number(e.std_dev) + "\n";
    return out;
}

ElementFixture read_element_fixture(const std::filesystem::path& path) {
    const json doc = parse_json(read_text(path), path.string());
    ElementFixture out;
    try {
        out.fidelity = doc.at("fidelity").at("value").get<double>();
        out.fidelity_std = doc.at("fidelity").at("std_dev").get<double>();
        for (const auto& [ket, pair] : doc.at("diagonal").items()) {
            const auto m = measured(pair, "diagonal " + ket);
            out.elements.set({ket, ket, m.value, m.std_dev, false});
        }
        for (const auto& e : doc.at("offdiagonal"))
            out.elements.set({e.at("bra").get<std::string>(), e.at("ket").get<std::string>(),
                              e.at("value").get<double>(), e.at("std_dev").get<double>(), false});
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return out;
}

std::vector<PublishedSubspace> read_subspace_fixture(const std::filesystem::path& path) {
    const json doc = parse_json(read_text(path), path.string());
    std::vector<PublishedSubspace> out;
    try {
        for (const auto& s : doc.at("subspaces"))
            out.push_back({s.at("ket_a").get<std::string>(), s.at("ket_b").get<std::string>(),
                           s.at("value").get<double>(), s.at("std_dev").get<double>()});
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return out;
}

std::vector<PublishedLayer> read_qber_fixture(const std::filesystem::path& path) {
    const json doc = parse_json(read_text(path), path.string());
    std::vector<PublishedLayer> out;
    try {
        const auto& rows = doc.at("layers");
        for (const auto& row : rows) {
            const auto subspace = row.at("subspace").get<std::string>();
            const qkd::LayerSpec* spec = nullptr;
            for (const auto& l : qkd::layers())
                if (l.subspace() == subspace) spec = &l;
            if (!spec) throw IoError(path.string() + ": unknown layer subspace " + subspace);
            PublishedLayer pl;
            pl.report.layer = spec->id;
            pl.report.qber_z = measured(row.at("qber_z"), subspace + " qber_z");
            pl.report.qber_x = measured(row.at("qber_x"), subspace + " qber_x");
            if (!row.at("qber_z_ab").is_null())
                pl.report.pairwise.push_back({0, 1, measured(row.at("qber_z_ab"), subspace + " qber_z_ab")});
            if (!row.at("qber_z_ac").is_null())
                pl.report.pairwise.push_back({0, 2, measured(row.at("qber_z_ac"), subspace + " qber_z_ac")});
            pl.printed_rate = row.at("key_per_round").get<double>();
            out.push_back(std::move(pl));
        }
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return out;
}

std::string format_qkd_csv(const std::vector<LayerRow>& rows, const RunMetadata& meta) {
    std::string out = metadata_lines(meta);
    out += "subspace,qber_z,qber_x,qber_z_ab,qber_z_ac,key_per_round_mean,key_per_round_pessimistic\n";
    for (const auto& [report, rate] : rows) {
        const auto ab = report.pair(0, 1);
        const auto ac = report.pair(0, 2);
        out += qkd::layer(report.layer).subspace() + "," + number(report.qber_z.value) + "," +
               number(report.qber_x.value) + "," + (ab ? number(ab->value) : "") + "," +
               (ac ? number(ac->value) : "") + "," + number(rate.rate_mean) + "," +
               number(rate.rate_pessimistic) + "\n";
    }
    return out;
}

} // namespace layerq::io
