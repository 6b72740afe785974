#include "magnet/io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

namespace magnet {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw SchemaError(field + ": expected array of rows");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols)
            throw SchemaError(field + ": ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    if (!doc.is_object()) throw SchemaError(path + ": top level must be an object");
    if (!doc.contains("schema_version")) throw SchemaError("schema_version: missing");
    if (doc["schema_version"].get<int>() != kSchemaVersion)
        throw VersionMismatch("schema_version: expected " + std::to_string(kSchemaVersion));
    return doc;
}

void write_document(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << '\n';
}

}  // namespace

void save_dataset(const GraphDataset& dataset, const std::string& path,
                  const json* run_config) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["n_nodes"] = dataset.n_nodes();
    doc["feat_dim"] = dataset.feat_dim();
    json edges = json::array();
    for (auto [i, j] : dataset.adjacency.edges()) edges.push_back(json::array({i, j}));
    doc["adjacency"] = std::move(edges);
    doc["important_nodes"] = dataset.important_nodes;
    doc["meta"] = {{"setting", dataset.meta.setting},
                   {"seed", dataset.meta.seed},
                   {"noise_sd", dataset.meta.noise_sd},
                   {"target_density", dataset.meta.target_density},
                   {"notes", dataset.meta.notes}};
    if (run_config) doc["meta"]["run_config"] = *run_config;
    json instances = json::array();
    for (const auto& inst : dataset.instances) {
        json features = json::array();
        for (Eigen::Index r = 0; r < inst.features.rows(); ++r)
            for (Eigen::Index c = 0; c < inst.features.cols(); ++c)
                features.push_back(inst.features(r, c));
        instances.push_back({{"features", std::move(features)}, {"label", inst.label}});
    }
    doc["instances"] = std::move(instances);
    write_document(doc, path);
}

GraphDataset load_dataset(const std::string& path) {
    const json doc = load_document(path);
    for (const char* field : {"n_nodes", "feat_dim", "adjacency", "instances"})
        if (!doc.contains(field)) throw SchemaError(std::string(field) + ": missing");

    const int n_nodes = doc["n_nodes"].get<int>();
    const int feat_dim = doc["feat_dim"].get<int>();
    if (n_nodes < 2) throw SchemaError("n_nodes: must be >= 2");
    if (feat_dim < 1) throw SchemaError("feat_dim: must be >= 1");

    std::vector<std::pair<int, int>> edges;
    std::set<std::pair<int, int>> seen;
    for (std::size_t e = 0; e < doc["adjacency"].size(); ++e) {
        const auto& entry = doc["adjacency"][e];
        if (!entry.is_array() || entry.size() != 2)
            throw SchemaError("adjacency[" + std::to_string(e) + "]: expected [i,j]");
        const int i = entry[0].get<int>(), j = entry[1].get<int>();
        if (i >= j) throw SchemaError("adjacency[" + std::to_string(e) +
                                      "]: upper-triangle order (i<j) required");
        if (i < 0 || j >= n_nodes)
            throw SchemaError("adjacency[" + std::to_string(e) + "]: endpoint out of range");
        if (!seen.insert({i, j}).second)
            throw SchemaError("adjacency[" + std::to_string(e) + "]: duplicate edge");
        edges.emplace_back(i, j);
    }

    GraphDataset ds;
    ds.adjacency = AdjacencyMatrix(n_nodes, std::move(edges));
    if (doc.contains("important_nodes")) {
        for (const auto& v : doc["important_nodes"]) {
            const int node = v.get<int>();
            if (node < 0 || node >= n_nodes) throw SchemaError("important_nodes: out of range");
            ds.important_nodes.push_back(node);
        }
    }
    if (doc.contains("meta")) {
        const auto& m = doc["meta"];
        if (m.contains("setting")) ds.meta.setting = m["setting"].get<int>();
        if (m.contains("seed")) ds.meta.seed = m["seed"].get<std::uint64_t>();
        if (m.contains("noise_sd")) ds.meta.noise_sd = m["noise_sd"].get<double>();
        if (m.contains("target_density"))
            ds.meta.target_density = m["target_density"].get<double>();
        if (m.contains("notes")) ds.meta.notes = m["notes"].get<std::string>();
    }
    for (std::size_t k = 0; k < doc["instances"].size(); ++k) {
        const auto& inst = doc["instances"][k];
        const std::string where = "instances[" + std::to_string(k) + "]";
        if (!inst.contains("features") || !inst.contains("label"))
            throw SchemaError(where + ": features and label required");
        const int label = inst["label"].get<int>();
        if (label != 1 && label != -1) throw SchemaError(where + ".label: must be -1 or 1");
        const auto& f = inst["features"];
        if (static_cast<int>(f.size()) != n_nodes * feat_dim)
            throw SchemaError(where + ".features: expected n_nodes*feat_dim values");
        Matrix x(n_nodes, feat_dim);
        std::size_t idx = 0;
        for (int r = 0; r < n_nodes; ++r)
            for (int c = 0; c < feat_dim; ++c) x(r, c) = f[idx++].get<double>();
        ds.instances.push_back({std::move(x), label});
    }
    return ds;
}

namespace {

json head_to_json(const HeadModel& head) {
    json j;
    j["type"] = head.type == HeadType::Linear ? "linear" : "mlp";
    j["w1"] = matrix_to_json(head.w1);
    if (head.type == HeadType::Mlp) j["w2"] = matrix_to_json(head.w2);
    return j;
}

HeadModel head_from_json(const json& j) {
    HeadModel head;
    const std::string type = j.at("type").get<std::string>();
    if (type == "linear")
        head.type = HeadType::Linear;
    else if (type == "mlp")
        head.type = HeadType::Mlp;
    else
        throw SchemaError("head.type: unknown value");
    head.w1 = matrix_from_json(j.at("w1"), "head.w1");
    if (head.type == HeadType::Mlp) head.w2 = matrix_from_json(j.at("w2"), "head.w2");
    return head;
}

}  // namespace

void save_model(const MaGNetModel& model, const std::string& path, const json* run_config) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["K"] = model.config.k_orders;
    doc["w_mode"] = model.config.w_mode == WMode::Identity ? "identity" : "trained";
    doc["pooling"] = model.config.pooling == Pooling::Mean ? "mean" : "sum";
    doc["W"] = matrix_to_json(model.actor_w);
    json critics = json::array();
    for (const auto& c : model.critics) critics.push_back(matrix_to_json(c.weights));
    doc["critics"] = std::move(critics);
    doc["alphas"] = model.alphas;
    doc["head"] = head_to_json(model.head);
    doc["diagnostics"] = {{"epsilons", model.epsilons}, {"betas", model.final_betas}};
    doc["label_convention"] = "class 0 -> -1, class 1 -> +1";
    if (run_config) doc["run_config"] = *run_config;
    write_document(doc, path);
}

MaGNetModel load_model(const std::string& path) {
    const json doc = load_document(path);
    for (const char* field : {"K", "W", "critics", "alphas", "head"})
        if (!doc.contains(field)) throw SchemaError(std::string(field) + ": missing");

    MaGNetModel model;
    model.config.k_orders = doc["K"].get<int>();
    if (model.config.k_orders < 1) throw SchemaError("K: must be >= 1");
    if (doc.contains("w_mode"))
        model.config.w_mode =
            doc["w_mode"].get<std::string>() == "trained" ? WMode::Trained : WMode::Identity;
    if (doc.contains("pooling"))
        model.config.pooling =
            doc["pooling"].get<std::string>() == "sum" ? Pooling::Sum : Pooling::Mean;
    model.actor_w = matrix_from_json(doc["W"], "W");
    for (std::size_t k = 0; k < doc["critics"].size(); ++k)
        model.critics.push_back(
            CriticModel{matrix_from_json(doc["critics"][k], "critics[" + std::to_string(k) + "]")});
    model.alphas = doc["alphas"].get<std::vector<double>>();
    if (static_cast<int>(model.alphas.size()) != model.config.k_orders)
        throw SchemaError("alphas: length must equal K");
    if (static_cast<int>(model.critics.size()) != model.config.k_orders)
        throw SchemaError("critics: length must equal K");
    model.head = head_from_json(doc["head"]);
    model.config.head_type = model.head.type;
    if (doc.contains("diagnostics")) {
        const auto& d = doc["diagnostics"];
        if (d.contains("epsilons")) model.epsilons = d["epsilons"].get<std::vector<double>>();
        if (d.contains("betas")) model.final_betas = d["betas"].get<std::vector<double>>();
    }
    return model;
}

void save_explanation(const Explanation& explanation, const std::string& path,
                      const json* run_config) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["edge_scores"] = explanation.edge_scores;
    doc["feature_scores"] = explanation.feature_scores;
    json kept = json::array();
    for (auto [i, j] : explanation.kept_edges) kept.push_back(json::array({i, j}));
    doc["kept_edges"] = std::move(kept);
    doc["kept_nodes"] = explanation.kept_nodes;
    doc["kept_features"] = explanation.kept_features;
    doc["loss_trajectory"] = explanation.loss_trajectory;
    if (run_config) doc["run_config"] = *run_config;
    write_document(doc, path);
}

Explanation load_explanation(const std::string& path) {
    const json doc = load_document(path);
    Explanation ex;
    ex.edge_scores = doc.at("edge_scores").get<std::vector<double>>();
    ex.feature_scores = doc.at("feature_scores").get<std::vector<double>>();
    for (const auto& e : doc.at("kept_edges"))
        ex.kept_edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    ex.kept_nodes = doc.at("kept_nodes").get<std::vector<int>>();
    ex.kept_features = doc.at("kept_features").get<std::vector<int>>();
    ex.loss_trajectory = doc.at("loss_trajectory").get<std::vector<double>>();
    return ex;
}

}  // namespace magnet
