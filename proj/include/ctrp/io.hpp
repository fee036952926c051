#pragma once

#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "ctrp/gibbs.hpp"
#include "ctrp/projection.hpp"
#include "ctrp/tensor.hpp"

namespace ctrp {

/// Canonical tensor literal: {"shape": [...], "data": [...]} with the data
/// flat in first-mode-fastest order.
nlohmann::json tensor_to_json(const DenseTensor& t);
DenseTensor tensor_from_json(const nlohmann::json& j);
DenseTensor load_tensor_json(const std::string& path);
void save_tensor_json(const DenseTensor& t, const std::string& path);

std::string sha1_hex(std::string_view data);

/// Deterministic double formatting (round-trippable, locale-free).
std::string format_double(double v);

/// Projection serialization: shapes, mode-wise count, psi, seed, preserved
/// modes (1-based on disk), scale flag, and a content hash of the realized
/// entries. Entries themselves regenerate from the seed on load; a hash
/// mismatch raises an error.
nlohmann::json spec_to_json(const GtrpSpec& spec);
GtrpSpec spec_from_json(const nlohmann::json& j);
std::string spec_content_hash(const GtrpSpec& spec);

/// Chain persistence: one CSV row per retained draw (flattened coefficient,
/// mu, sigma2) plus a JSON manifest carrying shape and run metadata.
void save_chain_csv(const ChainOutput& chain, const std::vector<int>& coefficient_shape,
                    const std::string& csv_path);
ChainOutput load_chain_csv(const std::string& csv_path, const std::vector<int>& coefficient_shape);
nlohmann::json chain_manifest(const ChainOutput& chain, const std::vector<int>& coefficient_shape);

/// Minimal RFC-4180 CSV support; missing values are rejected on read.
std::string csv_escape(const std::string& field);
std::vector<std::vector<std::string>> read_csv(const std::string& path);

nlohmann::json load_json(const std::string& path);
void save_json(const nlohmann::json& j, const std::string& path);
void write_text(const std::string& text, const std::string& path);
std::string read_text(const std::string& path);

}  // namespace ctrp
