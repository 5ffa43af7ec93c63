#pragma once

#include "topictrace/corpus.hpp"
#include "topictrace/nn.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace topictrace::tda {

struct PointCloud {
    Eigen::MatrixXd points;           // n x d
    std::vector<std::string> doc_ids; // parallel to rows
    std::vector<double> attributes;   // topic probability per point
};

// One row per document: modelA's full tag-probability vector; the attribute
// is modelB's topic probability.
PointCloud tag_vectors(const corpus::Corpus& c, const nn::Network& model_a,
                       const nn::Network& model_b, const text::Vocabulary& vocab, int length);

struct PcaResult {
    Eigen::MatrixXd projected;               // n x k (centered data onto components)
    Eigen::MatrixXd components;              // k x d orthonormal rows, eigenvalue-descending
    std::vector<double> explained_variance;  // top-k covariance eigenvalues
    double total_variance = 0.0;             // trace of the covariance
};

// Covariance eigendecomposition; each component's largest-magnitude entry is
// made positive so the lens orientation is reproducible.
PcaResult pca(const Eigen::MatrixXd& points, int k);

struct CoverConfig {
    int intervals_per_dim = 4;
    double overlap_fraction = 0.25; // of the expanded interval width, in [0,1)
};

// Overlapping hyper-rectangle bins over the lens; each returned bin holds row
// indices, empty bins dropped, order deterministic (last dimension fastest).
std::vector<std::vector<int>> build_cover(const Eigen::MatrixXd& lens, const CoverConfig& cfg);

// Single-linkage clustering of the given rows, cut at the first empty gap in
// the pairwise-distance histogram (sqrt(#pairs) bins); one cluster when the
// histogram has no gap.
std::vector<std::vector<int>> cluster_bin(const Eigen::MatrixXd& lens,
                                          const std::vector<int>& bin);

struct MapperNode {
    int id = 0;
    std::vector<std::string> doc_ids;
    int size = 0;
    double mean_attribute = 0.0;
};

struct MapperEdge {
    int a = 0;
    int b = 0;
    int shared_count = 0;
};

struct MapperGraph {
    std::vector<MapperNode> nodes;
    std::vector<MapperEdge> edges; // undirected, a < b, no duplicates
};

// Full pipeline: PCA lens, overlapping cover, per-bin clustering, nerve.
MapperGraph mapper(const PointCloud& cloud, const CoverConfig& cfg, int lens_dim = 3);

int graph_components(const MapperGraph& g);
int cycle_rank(const MapperGraph& g); // E - V + components

// DOT: node width ~ log(1+size), fill a blue->red ramp over mean_attribute.
std::string export_dot(const MapperGraph& g);
std::string export_json(const MapperGraph& g);
MapperGraph graph_from_json(const std::string& content);

} // namespace topictrace::tda
