// Copyright 2026 The steersvm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "steersvm/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "steersvm/errors.hpp"

namespace steersvm {

namespace {

constexpr const char* kHeader = "t11,t12,t13,t21,t22,t23,t31,t32,t33,label";

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& cell, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw IoError("not a number in " + where + ": '" + cell + "'");
    }
}

}  // namespace

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::ostringstream out;
    out << kHeader << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (Eigen::Index k = 0; k < data.dims(); ++k) out << data.features()(static_cast<Eigen::Index>(i), k) << ',';
        out << data.labels()[i] << '\n';
    }
    write_text(path, out.str());
}

Dataset read_dataset_csv(const std::string& path) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) throw IoError("unexpected dataset header in " + path);
    std::vector<std::array<double, 9>> rows;
    LabelVector labels;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (cells.size() != 10) throw IoError("expected 10 columns at " + where);
        std::array<double, 9> row{};
        for (int k = 0; k < 9; ++k) row[static_cast<std::size_t>(k)] = parse_double(cells[static_cast<std::size_t>(k)], where);
        const double label = parse_double(cells[9], where);
        if (label != 1.0 && label != -1.0) throw IoError("label must be +1 or -1 at " + where);
        rows.push_back(row);
        labels.push_back(static_cast<int>(label));
    }
    FeatureMatrix x(static_cast<Eigen::Index>(rows.size()), 9);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int k = 0; k < 9; ++k) x(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    }
    return Dataset(std::move(x), std::move(labels));
}

nlohmann::json state_to_json(const TwoQubitState& state) {
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
        std::vector<double> a(4);
        std::vector<double> b(4);
        for (int c = 0; c < 4; ++c) {
            a[static_cast<std::size_t>(c)] = state.rho()(r, c).real();
            b[static_cast<std::size_t>(c)] = state.rho()(r, c).imag();
        }
        re.push_back(a);
        im.push_back(b);
    }
    return {{"re", re}, {"im", im}};
}

TwoQubitState state_from_json(const nlohmann::json& j) {
    Mat4 rho = Mat4::Zero();
    try {
        const auto re = j.at("re").get<std::vector<std::vector<double>>>();
        std::vector<std::vector<double>> im(4, std::vector<double>(4, 0.0));
        if (j.contains("im")) im = j.at("im").get<std::vector<std::vector<double>>>();
        if (re.size() != 4 || im.size() != 4) throw IoError("state matrix must be 4x4");
        for (int r = 0; r < 4; ++r) {
            const auto ur = static_cast<std::size_t>(r);
            if (re[ur].size() != 4 || im[ur].size() != 4) throw IoError("state matrix must be 4x4");
            for (int c = 0; c < 4; ++c) rho(r, c) = {re[ur][static_cast<std::size_t>(c)], im[ur][static_cast<std::size_t>(c)]};
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed state JSON: ") + e.what());
    }
    return TwoQubitState::from_matrix(rho);
}

nlohmann::json read_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("cannot parse " + path + ": " + e.what());
    }
}

void write_text(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string git_blob_sha1(std::string_view content) {
    const std::string head = "blob " + std::to_string(content.size()) + '\0';
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw IoError("cannot allocate a digest context");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, head.data(), head.size()) == 1 &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest.data(), &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw IoError("SHA-1 digest failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
    return hex.str();
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             const std::vector<std::string>& input_files) {
    std::string material = config.dump();
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& path : input_files) {
        const std::string text = read_text(path);
        inputs.push_back({{"path", path}, {"sha1", git_blob_sha1(text)}});
        material += '\n';
        material += text;
    }
    return {{"command", command}, {"config", config}, {"inputs", inputs}, {"content_hash", git_blob_sha1(material)}};
}

}  // namespace steersvm
