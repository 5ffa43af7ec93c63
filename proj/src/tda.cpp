#include "topictrace/tda.hpp"

#include "topictrace/errors.hpp"
#include "topictrace/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace topictrace::tda {

using nlohmann::json;

PointCloud tag_vectors(const corpus::Corpus& c, const nn::Network& model_a,
                       const nn::Network& model_b, const text::Vocabulary& vocab, int length) {
    if (model_a.arch != nn::Arch::ModelA)
        throw ConfigError("tag_vectors: first network must be a multilabel modelA");
    if (model_b.num_outputs != 1)
        throw ConfigError("tag_vectors: second network must be a binary modelB");

    PointCloud cloud;
    cloud.points.resize(Eigen::Index(c.size()), model_a.num_outputs);
    cloud.doc_ids.reserve(c.size());
    cloud.attributes.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& doc = c.documents[i];
        const auto tags = nn::score(model_a, doc, vocab, length);
        for (int t = 0; t < model_a.num_outputs; ++t)
            cloud.points(Eigen::Index(i), t) = tags[std::size_t(t)];
        cloud.doc_ids.push_back(doc.id);
        cloud.attributes.push_back(nn::score(model_b, doc, vocab, length)[0]);
    }
    return cloud;
}

PcaResult pca(const Eigen::MatrixXd& points, int k) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    if (n < 2) throw ConfigError("pca: need at least 2 points");
    if (k < 1 || k > std::min(n, d)) throw ConfigError("pca: k out of range");

    const Eigen::RowVectorXd mean = points.colwise().mean();
    const Eigen::MatrixXd centered = points.rowwise() - mean;
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / double(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericError("pca: eigensolve failed");

    PcaResult res;
    res.total_variance = std::max(0.0, cov.trace());
    res.components.resize(k, d);
    res.explained_variance.resize(std::size_t(k));
    // Eigen returns ascending eigenvalues; take the top k in descending order.
    for (int i = 0; i < k; ++i) {
        const Eigen::Index src = d - 1 - i;
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        // sign convention: largest-magnitude entry positive
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0.0) v = -v;
        res.components.row(i) = v.transpose();
        res.explained_variance[std::size_t(i)] = std::max(0.0, solver.eigenvalues()(src));
    }
    res.projected = centered * res.components.transpose();
    return res;
}

std::vector<std::vector<int>> build_cover(const Eigen::MatrixXd& lens, const CoverConfig& cfg) {
    if (cfg.intervals_per_dim < 1) throw ConfigError("cover: intervals_per_dim must be >= 1");
    if (!(cfg.overlap_fraction >= 0.0 && cfg.overlap_fraction < 1.0))
        throw ConfigError("cover: overlap_fraction must lie in [0,1)");
    const Eigen::Index n = lens.rows();
    const int d = int(lens.cols());
    if (n == 0) return {};

    // Per-dimension interval bounds. A dimension whose spread is negligible
    // against the widest one carries no cover information and collapses to a
    // single interval; otherwise numerical dust would shard the bins.
    struct Axis {
        std::vector<double> lo, hi;
    };
    std::vector<Axis> axes(static_cast<std::size_t>(d));
    double max_range = 0.0;
    for (int c = 0; c < d; ++c)
        max_range = std::max(max_range, lens.col(c).maxCoeff() - lens.col(c).minCoeff());

    for (int c = 0; c < d; ++c) {
        const double lo = lens.col(c).minCoeff();
        const double hi = lens.col(c).maxCoeff();
        const double range = hi - lo;
        Axis axis;
        if (range <= 1e-9 * max_range || cfg.intervals_per_dim == 1) {
            axis.lo.push_back(lo - 1.0);
            axis.hi.push_back(hi + 1.0);
        } else {
            const double width = range / cfg.intervals_per_dim;
            // symmetric expansion e so consecutive intervals overlap by
            // overlap_fraction of the expanded width: e = f*w / (2(1-f))
            const double e = cfg.overlap_fraction * width / (2.0 * (1.0 - cfg.overlap_fraction));
            for (int i = 0; i < cfg.intervals_per_dim; ++i) {
                axis.lo.push_back(lo + i * width - e);
                axis.hi.push_back(lo + (i + 1) * width + e);
            }
        }
        axes[std::size_t(c)] = std::move(axis);
    }

    std::vector<std::size_t> radix(static_cast<std::size_t>(d));
    std::size_t n_bins = 1;
    for (int c = d - 1; c >= 0; --c) {
        radix[std::size_t(c)] = n_bins;
        n_bins *= axes[std::size_t(c)].lo.size();
    }

    std::vector<std::vector<int>> bins(n_bins);
    for (Eigen::Index r = 0; r < n; ++r) {
        std::vector<std::vector<int>> memberships(static_cast<std::size_t>(d));
        for (int c = 0; c < d; ++c) {
            const double x = lens(r, c);
            const Axis& axis = axes[std::size_t(c)];
            for (std::size_t i = 0; i < axis.lo.size(); ++i)
                if (x >= axis.lo[i] && x <= axis.hi[i]) memberships[std::size_t(c)].push_back(int(i));
        }
        // Cartesian product of per-dimension memberships
        std::vector<std::size_t> bin_ids{0};
        for (int c = 0; c < d; ++c) {
            std::vector<std::size_t> next;
            next.reserve(bin_ids.size() * memberships[std::size_t(c)].size());
            for (std::size_t base : bin_ids)
                for (int i : memberships[std::size_t(c)])
                    next.push_back(base + std::size_t(i) * radix[std::size_t(c)]);
            bin_ids = std::move(next);
        }
        for (std::size_t id : bin_ids) bins[id].push_back(int(r));
    }

    std::vector<std::vector<int>> result;
    for (auto& b : bins)
        if (!b.empty()) result.push_back(std::move(b));
    return result;
}

std::vector<std::vector<int>> cluster_bin(const Eigen::MatrixXd& lens,
                                          const std::vector<int>& bin) {
    if (bin.empty()) throw ConfigError("cluster_bin: empty bin");
    const std::size_t m = bin.size();
    if (m == 1) return {{bin[0]}};

    std::vector<double> dists;
    dists.reserve(m * (m - 1) / 2);
    double max_dist = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double dd = (lens.row(bin[i]) - lens.row(bin[j])).norm();
            dists.push_back(dd);
            max_dist = std::max(max_dist, dd);
        }
    }

    double epsilon = max_dist; // default: everything in one cluster
    if (max_dist > 0.0) {
        const std::size_t n_hist = std::size_t(std::ceil(std::sqrt(double(dists.size()))));
        std::vector<long> hist(n_hist, 0);
        const double bw = max_dist / double(n_hist);
        for (double dd : dists) {
            auto idx = std::min(n_hist - 1, std::size_t(dd / bw));
            ++hist[idx];
        }
        for (std::size_t i = 0; i < n_hist; ++i) {
            if (hist[i] == 0) {
                epsilon = double(i) * bw; // left edge of the first empty bin
                break;
            }
        }
    }

    // single linkage: union points closer than epsilon; when the histogram
    // had no gap everything merges into one cluster
    const bool no_gap = (epsilon == max_dist);
    std::vector<std::size_t> parent(m);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::size_t pair_idx = 0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j, ++pair_idx) {
            if (no_gap || dists[pair_idx] < epsilon) parent[find(i)] = find(j);
        }
    }

    std::vector<std::vector<int>> clusters;
    std::vector<int> cluster_of(m, -1);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t root = find(i);
        if (cluster_of[root] < 0) {
            cluster_of[root] = int(clusters.size());
            clusters.emplace_back();
        }
        clusters[std::size_t(cluster_of[root])].push_back(bin[i]);
    }
    return clusters;
}

MapperGraph mapper(const PointCloud& cloud, const CoverConfig& cfg, int lens_dim) {
    const Eigen::Index n = cloud.points.rows();
    if (n == 0) throw ConfigError("mapper: empty point cloud");
    if (cloud.doc_ids.size() != std::size_t(n) || cloud.attributes.size() != std::size_t(n))
        throw ConfigError("mapper: point cloud fields disagree on length");

    Eigen::MatrixXd lens;
    if (n == 1) {
        lens = Eigen::MatrixXd::Zero(1, 1);
    } else {
        const int k = std::min<int>(lens_dim, int(std::min(n, cloud.points.cols())));
        lens = pca(cloud.points, k).projected;
    }

    MapperGraph g;
    std::vector<std::vector<int>> node_members; // row indices per node
    for (const auto& bin : build_cover(lens, cfg)) {
        for (auto& cluster : cluster_bin(lens, bin)) {
            std::sort(cluster.begin(), cluster.end());
            MapperNode node;
            node.id = int(g.nodes.size());
            node.size = int(cluster.size());
            double attr = 0.0;
            for (int r : cluster) {
                node.doc_ids.push_back(cloud.doc_ids[std::size_t(r)]);
                attr += cloud.attributes[std::size_t(r)];
            }
            node.mean_attribute = attr / double(cluster.size());
            g.nodes.push_back(std::move(node));
            node_members.push_back(std::move(cluster));
        }
    }

    // nerve: edge where two clusters share at least one point
    for (std::size_t a = 0; a < node_members.size(); ++a) {
        for (std::size_t b = a + 1; b < node_members.size(); ++b) {
            const auto& ma = node_members[a];
            const auto& mb = node_members[b];
            int shared = 0;
            std::size_t i = 0, j = 0;
            while (i < ma.size() && j < mb.size()) {
                if (ma[i] < mb[j]) ++i;
                else if (ma[i] > mb[j]) ++j;
                else {
                    ++shared;
                    ++i;
                    ++j;
                }
            }
            if (shared > 0) g.edges.push_back({int(a), int(b), shared});
        }
    }
    return g;
}

namespace {

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(std::size_t(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[std::size_t(x)] != x) {
            parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
            x = parent[std::size_t(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[std::size_t(find(a))] = find(b); }
};

} // namespace

int graph_components(const MapperGraph& g) {
    if (g.nodes.empty()) return 0;
    DisjointSet ds(int(g.nodes.size()));
    for (const auto& e : g.edges) ds.unite(e.a, e.b);
    int components = 0;
    for (int i = 0; i < int(g.nodes.size()); ++i)
        if (ds.find(i) == i) ++components;
    return components;
}

int cycle_rank(const MapperGraph& g) {
    return int(g.edges.size()) - int(g.nodes.size()) + graph_components(g);
}

namespace {

std::string blue_red_ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = int(std::lround(255.0 * t));
    const int b = 255 - r;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, 0, b);
    return buf;
}

} // namespace

std::string export_dot(const MapperGraph& g) {
    std::string out = "graph mapper {\n";
    out += "  node [shape=circle style=filled fontsize=10];\n";
    for (const auto& node : g.nodes) {
        const double width = 0.4 * std::log(1.0 + double(node.size));
        out += "  n" + std::to_string(node.id) + " [label=\"" + std::to_string(node.size) +
               "\" width=" + io::format_double(width) + " fixedsize=true fillcolor=\"" +
               blue_red_ramp(node.mean_attribute) + "\"];\n";
    }
    for (const auto& e : g.edges) {
        out += "  n" + std::to_string(e.a) + " -- n" + std::to_string(e.b) + " [weight=" +
               std::to_string(e.shared_count) + "];\n";
    }
    out += "}\n";
    return out;
}

std::string export_json(const MapperGraph& g) {
    json nodes = json::array();
    for (const auto& node : g.nodes) {
        nodes.push_back({{"id", node.id},
                         {"doc_ids", node.doc_ids},
                         {"size", node.size},
                         {"mean_attribute", node.mean_attribute}});
    }
    json edges = json::array();
    for (const auto& e : g.edges)
        edges.push_back({{"a", e.a}, {"b", e.b}, {"shared_count", e.shared_count}});
    return json{{"nodes", nodes}, {"edges", edges}}.dump(2) + "\n";
}

MapperGraph graph_from_json(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid graph JSON: ") + e.what());
    }
    try {
        MapperGraph g;
        for (const auto& nj : j.at("nodes")) {
            MapperNode node;
            node.id = nj.at("id").get<int>();
            node.doc_ids = nj.at("doc_ids").get<std::vector<std::string>>();
            node.size = nj.at("size").get<int>();
            node.mean_attribute = nj.at("mean_attribute").get<double>();
            g.nodes.push_back(std::move(node));
        }
        for (const auto& ej : j.at("edges"))
            g.edges.push_back({ej.at("a").get<int>(), ej.at("b").get<int>(),
                               ej.at("shared_count").get<int>()});
        return g;
    } catch (const json::exception& e) {
        throw DataError(std::string("graph JSON: ") + e.what());
    }
}

} // namespace topictrace::tda
