#include "shadow/models.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "shadow/errors.hpp"

namespace shadow {

using nlohmann::json;

ModelSpec builtin_model(const std::string& name) {
    if (name == "main")
        return {"main",
                {{0.25, "ZZ", {0, 1}},
                 {0.3, "YY", {0, 1}},
                 {0.3, "XX", {0, 1}},
                 {0.25, "Z", {0}},
                 {0.3, "X", {0}}}};
    if (name == "H1") return {"H1", {{1.0, "X", {0}}, {-1.0, "ZZ", {0, 1}}}};
    if (name == "H2") return {"H2", {{2.0, "X", {0}}, {-1.0, "ZZ", {0, 1}}}};
    if (name == "H3")
        return {"H3",
                {{0.12, "ZZ", {0, 1}},
                 {0.25, "XX", {0, 1}},
                 {0.25, "YY", {0, 1}},
                 {-2.0, "Z", {0}}}};
    throw ValidationError("unknown builtin model '" + name + "'");
}

bool is_builtin_model(const std::string& name) {
    return name == "main" || name == "H1" || name == "H2" || name == "H3";
}

std::vector<std::string> builtin_model_names() { return {"main", "H1", "H2", "H3"}; }

ModelSpec load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("model file " + path + ": " + e.what());
    }
    ModelSpec model;
    model.name = j.value("name", path);
    if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty())
        throw ValidationError("model file " + path + ": needs a non-empty 'terms' array");
    for (const auto& t : j["terms"]) {
        TermTemplate tt;
        tt.coeff = t.at("coeff").get<double>();
        tt.word = t.at("word").get<std::string>();
        tt.offsets = t.at("offsets").get<std::vector<int>>();
        model.terms.push_back(std::move(tt));
    }
    return model;
}

ModelSpec resolve_model(const std::string& name_or_path) {
    if (is_builtin_model(name_or_path)) return builtin_model(name_or_path);
    return load_model_file(name_or_path);
}

HamiltonianSpec expand_model(const ModelSpec& model, int sites) {
    if (sites < 2) throw ValidationError("expand_model: need at least 2 sites");
    HamiltonianSpec h;
    h.name = model.name;
    h.sites = sites;
    for (const auto& t : model.terms) {
        if (t.word.size() != t.offsets.size())
            throw ValidationError("model '" + model.name + "': word '" + t.word +
                                  "' and offsets disagree in length");
        if (t.word.empty()) throw ValidationError("model '" + model.name + "': empty word");
    }
    for (int j = 0; j < sites; ++j)
        for (const auto& t : model.terms) {
            PauliString p = PauliString::identity(sites);
            for (std::size_t k = 0; k < t.word.size(); ++k) {
                const int site = ((j + t.offsets[k]) % sites + sites) % sites;
                if (p.at(site) != Axis::I)
                    throw ValidationError("model '" + model.name + "': offsets of '" + t.word +
                                          "' collide at L = " + std::to_string(sites));
                p.set(site, axis_from_char(t.word[k]));
            }
            h.terms.push_back({t.coeff, std::move(p)});
        }
    return h;
}

std::string model_hash(const HamiltonianSpec& h) {
    // FNV-1a over the sorted canonical term list
    std::vector<std::string> parts;
    parts.reserve(h.terms.size());
    for (const auto& t : h.terms) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g*", t.coeff);
        parts.push_back(buf + t.op.str());
    }
    std::sort(parts.begin(), parts.end());
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            hash ^= c;
            hash *= 0x100000001b3ULL;
        }
        hash ^= 0x1f;
        hash *= 0x100000001b3ULL;
    };
    for (const auto& p : parts) mix(p);
    char out[32];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

} // namespace shadow
