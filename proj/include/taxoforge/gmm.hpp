#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taxoforge/embedder.hpp"
#include "taxoforge/parallel.hpp"

namespace taxoforge {

struct GmmConfig {
    int max_iters = 200;
    double rel_tol = 1e-4;          // relative log-likelihood change
    double variance_floor = 1e-6;
    int restarts = 1;               // best final log-likelihood wins, ties to lower index
    bool project = true;            // random-project when dim > project_threshold
    std::size_t project_threshold = 512;
    std::size_t project_dim = 128;
    ExecMode exec = default_exec_mode();
};

struct GmmDiagnostics {
    int iterations = 0;
    double final_log_likelihood = 0.0;
    std::vector<double> ll_history;      // one entry per EM iteration
    std::vector<int> reseed_iterations;  // empty-component repairs
    double assignment_mass = 0.0;        // sum over rows of the max posterior
    int restart_index = 0;
    bool projected = false;
};

// Diagonal-covariance Gaussian mixture.
struct GmmModel {
    int k = 0;
    std::size_t input_dim = 0;   // dimension the model accepts
    std::size_t dim = 0;         // working dimension after projection
    std::vector<double> weights;     // k, sums to 1
    std::vector<double> means;       // k * dim
    std::vector<double> variances;   // k * dim, >= variance floor
    std::vector<double> projection;  // input_dim * dim when projected, else empty
    GmmDiagnostics diagnostics;
};

// Posterior probabilities, rows on the simplex, canonical paper order.
struct SoftAssignment {
    std::string aspect_name;
    std::size_t rows = 0;
    std::size_t k = 0;
    std::vector<double> probs;  // rows * k

    double at(std::size_t r, std::size_t i) const { return probs[r * k + i]; }
};

// EM fit from a k-means++ style seeded initialization. Stops at relative
// log-likelihood change < rel_tol or max_iters. Empty components are
// re-seeded at the row the current mixture explains worst.
GmmModel fit_gmm(const AspectEmbeddings& data, int k, std::uint64_t seed,
                 const GmmConfig& config = {});

SoftAssignment soft_assign(const GmmModel& model, const AspectEmbeddings& data);

} // namespace taxoforge
