#include "ctrp/io.hpp"

#include <openssl/sha.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ctrp/errors.hpp"

namespace ctrp {

nlohmann::json tensor_to_json(const DenseTensor& t) {
    return nlohmann::json{{"shape", t.shape()}, {"data", t.values()}};
}

DenseTensor tensor_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
        throw config_error("tensor literal: expected an object with \"shape\" and \"data\"");
    return DenseTensor(j.at("shape").get<std::vector<int>>(), j.at("data").get<std::vector<double>>());
}

DenseTensor load_tensor_json(const std::string& path) {
    return tensor_from_json(load_json(path));
}

void save_tensor_json(const DenseTensor& t, const std::string& path) {
    save_json(tensor_to_json(t), path);
}

std::string sha1_hex(std::string_view data) {
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
    static const char* hex = "0123456789abcdef";
    std::string out(2 * SHA_DIGEST_LENGTH, '0');
    for (int i = 0; i < SHA_DIGEST_LENGTH; ++i) {
        out[2 * i] = hex[digest[i] >> 4];
        out[2 * i + 1] = hex[digest[i] & 0x0f];
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void append_doubles(std::string& out, const double* data, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) {
        out += format_double(data[i]);
        out += ',';
    }
}

}  // namespace

std::string spec_content_hash(const GtrpSpec& spec) {
    std::string payload;
    for (const auto& h : spec.mode_matrices) append_doubles(payload, h.data(), h.size());
    if (spec.tensor_block) append_doubles(payload, spec.tensor_block->data(), spec.tensor_block->size());
    return sha1_hex(payload);
}

nlohmann::json spec_to_json(const GtrpSpec& spec) {
    std::vector<int> preserve_1based;
    for (int m : spec.preserve_modes) preserve_1based.push_back(m + 1);
    return nlohmann::json{{"input_shape", spec.input_shape},
                          {"output_shape", spec.output_shape()},
                          {"mode_wise_count", spec.mode_wise_count()},
                          {"psi", spec.psi},
                          {"seed", spec.seed},
                          {"preserve_modes", preserve_1based},
                          {"scale_on_apply", spec.scale_on_apply},
                          {"content_hash", spec_content_hash(spec)}};
}

GtrpSpec spec_from_json(const nlohmann::json& j) {
    std::vector<int> preserve;
    for (int m : j.at("preserve_modes").get<std::vector<int>>()) preserve.push_back(m - 1);
    GtrpSpec spec = build_gtrp(j.at("input_shape").get<std::vector<int>>(),
                               j.at("output_shape").get<std::vector<int>>(),
                               j.at("mode_wise_count").get<int>(), j.at("psi").get<double>(),
                               j.at("seed").get<std::uint64_t>(), preserve,
                               j.at("scale_on_apply").get<bool>());
    if (j.contains("content_hash") && j.at("content_hash").get<std::string>() != spec_content_hash(spec))
        throw io_error("projection spec: regenerated entries do not match the stored content hash");
    return spec;
}

void save_chain_csv(const ChainOutput& chain, const std::vector<int>& shape,
                    const std::string& csv_path) {
    const std::int64_t q = shape_size(shape);
    std::string out;
    for (std::int64_t i = 0; i < q; ++i) out += "b_" + std::to_string(i + 1) + ",";
    out += "mu,sigma2\n";
    for (const auto& draw : chain.draws) {
        append_doubles(out, draw.coefficient.data(), draw.coefficient.size());
        out += format_double(draw.mu);
        out += ',';
        out += format_double(draw.sigma2);
        out += '\n';
    }
    write_text(out, csv_path);
}

ChainOutput load_chain_csv(const std::string& csv_path, const std::vector<int>& shape) {
    const auto rows = read_csv(csv_path);
    if (rows.empty()) throw io_error("chain csv: missing header: " + csv_path);
    const std::int64_t q = shape_size(shape);
    if (static_cast<std::int64_t>(rows.front().size()) != q + 2)
        throw io_error("chain csv: column count does not match coefficient shape");
    ChainOutput chain;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::vector<double> values(static_cast<std::size_t>(q));
        for (std::int64_t i = 0; i < q; ++i) values[static_cast<std::size_t>(i)] = std::stod(row[static_cast<std::size_t>(i)]);
        ChainDraw draw;
        draw.coefficient = DenseTensor(shape, std::move(values));
        draw.mu = std::stod(row[static_cast<std::size_t>(q)]);
        draw.sigma2 = std::stod(row[static_cast<std::size_t>(q + 1)]);
        chain.draws.push_back(std::move(draw));
    }
    return chain;
}

nlohmann::json chain_manifest(const ChainOutput& chain, const std::vector<int>& shape) {
    return nlohmann::json{{"coefficient_shape", shape}, {"iterations", chain.iterations},
                          {"burn_in", chain.burn_in},   {"thin", chain.thin},
                          {"seed", chain.seed},         {"projection_id", chain.projection_id},
                          {"draws", chain.draws.size()}};
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    const std::string text = read_text(path);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size())
            throw io_error("csv: ragged row " + std::to_string(r + 1) + " in " + path);
        for (const auto& f : rows[r])
            if (f.empty()) throw io_error("csv: missing value at row " + std::to_string(r + 1) + " in " + path);
    }
    return rows;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("invalid json in " + path + ": " + e.what());
    }
    return j;
}

void save_json(const nlohmann::json& j, const std::string& path) {
    write_text(j.dump(2) + "\n", path);
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    out << text;
    if (!out) throw io_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ctrp
