#include "topictrace/tda.hpp"
#include "topictrace/errors.hpp"
#include "topictrace/rng.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace topictrace;

namespace {

tda::PointCloud cloud_from(const Eigen::MatrixXd& points) {
    tda::PointCloud cloud;
    cloud.points = points;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        cloud.doc_ids.push_back("p" + std::to_string(i));
        cloud.attributes.push_back(0.5);
    }
    return cloud;
}

// Planar circle embedded in 3-D by a rotation, radial jitter in-plane.
Eigen::MatrixXd noisy_circle_3d(int n, std::uint64_t seed) {
    Rng rng(seed);
    const Eigen::Vector3d u = Eigen::Vector3d(1, 1, 0).normalized();
    const Eigen::Vector3d v = Eigen::Vector3d(1, -1, 1).normalized();
    Eigen::MatrixXd pts(n, 3);
    for (int i = 0; i < n; ++i) {
        const double theta =
            2.0 * std::numbers::pi * (double(i) + 0.3 * rng.uniform(-1, 1)) / double(n);
        const double r = 1.0 + 0.02 * rng.normal();
        pts.row(i) = (r * std::cos(theta) * u + r * std::sin(theta) * v).transpose();
    }
    return pts;
}

Eigen::MatrixXd two_blobs_3d(int per_blob, double separation, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd pts(2 * per_blob, 3);
    for (int i = 0; i < 2 * per_blob; ++i) {
        const double off = i < per_blob ? 0.0 : separation;
        for (int c = 0; c < 3; ++c) pts(i, c) = off + 0.05 * rng.normal();
    }
    return pts;
}

} // namespace

TEST_CASE("pca recovers an exact line with the documented sign convention") {
    Eigen::MatrixXd pts(6, 2);
    for (int i = 0; i < 6; ++i) {
        pts(i, 0) = i;
        pts(i, 1) = 2.0 * i;
    }
    const tda::PcaResult res = tda::pca(pts, 1);
    const double total = res.total_variance;
    CHECK(res.explained_variance[0] / total == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.components(0, 0) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-10));
    CHECK(res.components(0, 1) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-10));
}

TEST_CASE("full-rank pca is an isometry of the centered data") {
    Rng rng(5);
    Eigen::MatrixXd pts(20, 4);
    for (int i = 0; i < 20; ++i)
        for (int c = 0; c < 4; ++c) pts(i, c) = rng.normal();
    const tda::PcaResult res = tda::pca(pts, 4);
    for (int i = 0; i < 20; ++i) {
        for (int j = i + 1; j < 20; ++j) {
            const double before = (pts.row(i) - pts.row(j)).norm();
            const double after = (res.projected.row(i) - res.projected.row(j)).norm();
            CHECK(after == doctest::Approx(before).epsilon(1e-8));
        }
    }
}

TEST_CASE("rank-3 data reconstructs exactly at k=3 with orthonormal components") {
    Rng rng(6);
    Eigen::MatrixXd left(50, 3), right(3, 6);
    for (int i = 0; i < 50; ++i)
        for (int c = 0; c < 3; ++c) left(i, c) = rng.normal();
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 6; ++c) right(i, c) = rng.normal();
    const Eigen::MatrixXd pts = left * right;

    const tda::PcaResult res = tda::pca(pts, 3);
    const Eigen::RowVectorXd mean = pts.colwise().mean();
    const Eigen::MatrixXd recon =
        (res.projected * res.components).rowwise() + mean;
    CHECK((recon - pts).norm() < 1e-8);

    const Eigen::MatrixXd gram = res.components * res.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-8);

    for (std::size_t i = 1; i < res.explained_variance.size(); ++i)
        CHECK(res.explained_variance[i] <= res.explained_variance[i - 1]);
}

TEST_CASE("pca handles degenerate inputs per contract") {
    Eigen::MatrixXd same(4, 3);
    same.setConstant(1.5);
    const tda::PcaResult res = tda::pca(same, 2);
    CHECK(res.projected.norm() == doctest::Approx(0.0));
    CHECK(res.explained_variance[0] == doctest::Approx(0.0));

    CHECK_THROWS_AS(tda::pca(same, 4), ConfigError);
    CHECK_THROWS_AS(tda::pca(Eigen::MatrixXd(1, 3), 1), ConfigError);
}

TEST_CASE("build_cover reproduces the hand-enumerated 1-D example") {
    Eigen::MatrixXd lens(11, 1);
    for (int i = 0; i <= 10; ++i) lens(i, 0) = i;
    tda::CoverConfig cfg;
    cfg.intervals_per_dim = 2;
    cfg.overlap_fraction = 0.25;
    const auto bins = tda::build_cover(lens, cfg);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0] == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(bins[1] == std::vector<int>{5, 6, 7, 8, 9, 10});
}

TEST_CASE("single-interval cover holds every point; cover property in general") {
    Rng rng(7);
    Eigen::MatrixXd lens(30, 3);
    for (int i = 0; i < 30; ++i)
        for (int c = 0; c < 3; ++c) lens(i, c) = rng.uniform(-2, 2);

    tda::CoverConfig single;
    single.intervals_per_dim = 1;
    const auto all = tda::build_cover(lens, single);
    REQUIRE(all.size() == 1);
    CHECK(all[0].size() == 30);

    tda::CoverConfig cfg;
    cfg.intervals_per_dim = 3;
    cfg.overlap_fraction = 0.3;
    const auto bins = tda::build_cover(lens, cfg);
    std::set<int> covered;
    for (const auto& b : bins) covered.insert(b.begin(), b.end());
    CHECK(covered.size() == 30);

    cfg.overlap_fraction = 1.0;
    CHECK_THROWS_AS(tda::build_cover(lens, cfg), ConfigError);
}

TEST_CASE("cluster_bin separates well-separated pairs and degenerate bins") {
    Eigen::MatrixXd lens(4, 2);
    lens << 0.0, 0.0, 0.1, 0.0, 10.0, 0.0, 10.1, 0.0;
    const auto clusters = tda::cluster_bin(lens, {0, 1, 2, 3});
    REQUIRE(clusters.size() == 2);
    std::set<int> first(clusters[0].begin(), clusters[0].end());
    std::set<int> second(clusters[1].begin(), clusters[1].end());
    CHECK(first == std::set<int>{0, 1});
    CHECK(second == std::set<int>{2, 3});

    CHECK(tda::cluster_bin(lens, {2}).size() == 1);

    Eigen::MatrixXd same(3, 2);
    same.setConstant(4.0);
    CHECK(tda::cluster_bin(same, {0, 1, 2}).size() == 1);
}

TEST_CASE("mapper separates distant blobs with no cross edges") {
    tda::PointCloud cloud = cloud_from(two_blobs_3d(60, 10.0, 8));
    for (int i = 0; i < 60; ++i) cloud.attributes[std::size_t(i)] = 0.1;
    for (int i = 60; i < 120; ++i) cloud.attributes[std::size_t(i)] = 0.9;

    const tda::MapperGraph g = tda::mapper(cloud, tda::CoverConfig{}, 3);
    CHECK(tda::graph_components(g) >= 2);

    // no node mixes blobs, no edge crosses them
    auto blob_of = [](const std::string& id) { return std::stoi(id.substr(1)) < 60 ? 0 : 1; };
    std::vector<int> node_blob(g.nodes.size());
    for (const auto& node : g.nodes) {
        std::set<int> blobs;
        for (const auto& id : node.doc_ids) blobs.insert(blob_of(id));
        REQUIRE(blobs.size() == 1);
        node_blob[std::size_t(node.id)] = *blobs.begin();
        if (*blobs.begin() == 0) CHECK(node.mean_attribute == doctest::Approx(0.1));
        else CHECK(node.mean_attribute == doctest::Approx(0.9));
    }
    for (const auto& e : g.edges)
        CHECK(node_blob[std::size_t(e.a)] == node_blob[std::size_t(e.b)]);
}

TEST_CASE("mapper on a noisy 3-D circle has cycle rank exactly 1") {
    const tda::PointCloud cloud = cloud_from(noisy_circle_3d(200, 9));
    const tda::MapperGraph g = tda::mapper(cloud, tda::CoverConfig{}, 3);
    CHECK(tda::graph_components(g) == 1);
    CHECK(tda::cycle_rank(g) == 1);
}

TEST_CASE("disjoint cover makes mapper a partition with no edges") {
    Eigen::MatrixXd pts(6, 2);
    pts << 0, 0, 0.1, 0, 5, 5, 5.1, 5, 9, 0, 9.1, 0;
    tda::PointCloud cloud = cloud_from(pts);
    tda::CoverConfig cfg;
    cfg.intervals_per_dim = 1;
    cfg.overlap_fraction = 0.0;
    const tda::MapperGraph g = tda::mapper(cloud, cfg, 2);
    CHECK(g.edges.empty());
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto& node : g.nodes) {
        seen.insert(node.doc_ids.begin(), node.doc_ids.end());
        total += node.doc_ids.size();
    }
    CHECK(seen.size() == 6);
    CHECK(total == 6);
}

TEST_CASE("nerve soundness: an edge exists iff member sets intersect") {
    const tda::PointCloud cloud = cloud_from(noisy_circle_3d(60, 10));
    const tda::MapperGraph g = tda::mapper(cloud, tda::CoverConfig{}, 3);
    std::set<std::pair<int, int>> edges;
    for (const auto& e : g.edges) {
        CHECK(e.shared_count >= 1);
        edges.insert({e.a, e.b});
    }
    for (std::size_t a = 0; a < g.nodes.size(); ++a) {
        for (std::size_t b = a + 1; b < g.nodes.size(); ++b) {
            std::set<std::string> sa(g.nodes[a].doc_ids.begin(), g.nodes[a].doc_ids.end());
            int shared = 0;
            for (const auto& id : g.nodes[b].doc_ids)
                if (sa.count(id)) ++shared;
            CHECK((shared > 0) == (edges.count({int(a), int(b)}) == 1));
        }
    }
}

TEST_CASE("mapper is deterministic") {
    const tda::PointCloud cloud = cloud_from(noisy_circle_3d(80, 11));
    const std::string g1 = tda::export_json(tda::mapper(cloud, tda::CoverConfig{}, 3));
    const std::string g2 = tda::export_json(tda::mapper(cloud, tda::CoverConfig{}, 3));
    CHECK(g1 == g2);
}

TEST_CASE("graph statistics on hand-built graphs") {
    CHECK(tda::graph_components(tda::MapperGraph{}) == 0);
    CHECK(tda::cycle_rank(tda::MapperGraph{}) == 0);

    tda::MapperGraph tree;
    for (int i = 0; i < 5; ++i) tree.nodes.push_back({i, {"d" + std::to_string(i)}, 1, 0.0});
    for (int i = 1; i < 5; ++i) tree.edges.push_back({0, i, 1});
    CHECK(tda::graph_components(tree) == 1);
    CHECK(tda::cycle_rank(tree) == 0);

    tda::MapperGraph ring = tree;
    ring.edges.clear();
    for (int i = 0; i < 5; ++i) ring.edges.push_back({i, (i + 1) % 5, 1});
    CHECK(tda::graph_components(ring) == 1);
    CHECK(tda::cycle_rank(ring) == 1);
}

TEST_CASE("tag_vectors: one row per document, pure, sigmoid-ranged") {
    auto cfg = test_util::storm_config(3, 8, 0.3);
    auto [c, events] = corpus::synthesize_corpus(cfg, 41);
    // two documents with identical text
    corpus::Document dup = c.documents[0];
    dup.id = "zz-dup";
    auto docs = c.documents;
    docs.push_back(dup);
    c = corpus::make_corpus(std::move(docs));

    const text::Vocabulary vocab = text::build_vocabulary(c, 100, 1);
    nn::ModelShape shape_a;
    shape_a.embed_dim = 4;
    shape_a.conv_channels = {5, 5};
    shape_a.conv_kernels = {2, 2};
    nn::ModelShape shape_b;
    shape_b.embed_dim = 4;
    shape_b.conv_channels = {5, 5, 5, 5};
    shape_b.conv_kernels = {2, 2, 2, 1};
    const nn::Network model_a =
        nn::init_network(nn::Arch::ModelA, vocab.size(), int(c.tag_universe.size()), 1, &shape_a);
    const nn::Network model_b = nn::init_network(nn::Arch::ModelB, vocab.size(), 1, 2, &shape_b);

    const tda::PointCloud cloud = tda::tag_vectors(c, model_a, model_b, vocab, 8);
    CHECK(cloud.points.rows() == Eigen::Index(c.size()));
    CHECK(cloud.points.cols() == Eigen::Index(c.tag_universe.size()));
    CHECK(cloud.doc_ids.size() == c.size());
    CHECK(cloud.attributes.size() == c.size());
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i)
        for (Eigen::Index j = 0; j < cloud.points.cols(); ++j) {
            CHECK(cloud.points(i, j) > 0.0);
            CHECK(cloud.points(i, j) < 1.0);
        }
    for (double a : cloud.attributes) {
        CHECK(a > 0.0);
        CHECK(a < 1.0);
    }

    // identical documents give identical rows
    Eigen::Index orig = -1, copy = -1;
    for (std::size_t i = 0; i < cloud.doc_ids.size(); ++i) {
        if (cloud.doc_ids[i] == "zz-dup") copy = Eigen::Index(i);
        if (cloud.doc_ids[i] == "doc-00000000") orig = Eigen::Index(i);
    }
    REQUIRE(orig >= 0);
    REQUIRE(copy >= 0);
    CHECK((cloud.points.row(orig) - cloud.points.row(copy)).norm() == 0.0);

    CHECK_THROWS_AS(tda::tag_vectors(c, model_b, model_b, vocab, 8), ConfigError);
}

TEST_CASE("property: pca spectra behave across random shapes") {
    Rng rng(1212);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = int(rng.uniform_int(5, 40));
        const int d = int(rng.uniform_int(2, 6));
        const int k = int(rng.uniform_int(1, std::min(n, d)));
        Eigen::MatrixXd pts(n, d);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < d; ++c) pts(i, c) = rng.normal() * (1.0 + c);
        const tda::PcaResult res = tda::pca(pts, k);

        const Eigen::MatrixXd gram = res.components * res.components.transpose();
        CHECK((gram - Eigen::MatrixXd::Identity(k, k)).norm() < 1e-8);
        for (std::size_t i = 1; i < res.explained_variance.size(); ++i)
            CHECK(res.explained_variance[i] <= res.explained_variance[i - 1] + 1e-12);

        // variance of each projected column equals its eigenvalue
        for (int c = 0; c < k; ++c) {
            const double mean = res.projected.col(c).mean();
            const double var =
                (res.projected.col(c).array() - mean).square().sum() / double(n - 1);
            CHECK(var == doctest::Approx(res.explained_variance[std::size_t(c)]).epsilon(1e-8));
        }
    }
}

TEST_CASE("property: every point is covered for random cover configs") {
    Rng rng(1313);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = int(rng.uniform_int(4, 60));
        const int d = int(rng.uniform_int(1, 3));
        Eigen::MatrixXd lens(n, d);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < d; ++c) lens(i, c) = rng.uniform(-5, 5);
        tda::CoverConfig cfg;
        cfg.intervals_per_dim = int(rng.uniform_int(1, 5));
        cfg.overlap_fraction = rng.uniform(0.0, 0.6);

        std::set<int> covered;
        for (const auto& bin : tda::build_cover(lens, cfg)) {
            CHECK(!bin.empty());
            covered.insert(bin.begin(), bin.end());
            // every bin member yields a node via clustering, so the cover
            // property carries over to the graph
            const auto clusters = tda::cluster_bin(lens, bin);
            std::size_t clustered = 0;
            for (const auto& cl : clusters) clustered += cl.size();
            CHECK(clustered == bin.size());
        }
        CHECK(covered.size() == std::size_t(n));
    }
}

TEST_CASE("exports: valid DOT, byte-identical JSON round trip, ramp endpoints") {
    const std::string empty_dot = tda::export_dot(tda::MapperGraph{});
    CHECK(test_util::check_dot(empty_dot));

    tda::MapperGraph g;
    g.nodes.push_back({0, {"a", "b"}, 2, 1.0});
    g.nodes.push_back({1, {"b", "c"}, 2, 0.0});
    g.edges.push_back({0, 1, 1});

    const std::string dot = tda::export_dot(g);
    CHECK(test_util::check_dot(dot));
    CHECK(dot.find("#ff0000") != std::string::npos); // mean_attribute 1 -> red end
    CHECK(dot.find("#0000ff") != std::string::npos); // mean_attribute 0 -> blue end

    const std::string json1 = tda::export_json(g);
    const std::string json2 = tda::export_json(tda::graph_from_json(json1));
    CHECK(json1 == json2);
}
