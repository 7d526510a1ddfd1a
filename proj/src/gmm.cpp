#include "taxoforge/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taxoforge/errors.hpp"
#include "taxoforge/rng.hpp"

namespace taxoforge {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr std::size_t kReduceBlock = 256;  // rows per reduction block

// Blocked sums keep OpenMP reductions independent of the thread count:
// each block is accumulated serially, block partials combine in order.
template <typename BlockFn>
void blocked_rows(std::size_t rows, ExecMode exec, BlockFn&& fn) {
    const std::size_t n_blocks = (rows + kReduceBlock - 1) / kReduceBlock;
#ifdef TAXOFORGE_HAVE_OPENMP
    if (exec == ExecMode::OpenMP) {
        #pragma omp parallel for schedule(static)
        for (long long b = 0; b < static_cast<long long>(n_blocks); ++b) {
            std::size_t begin = static_cast<std::size_t>(b) * kReduceBlock;
            fn(static_cast<std::size_t>(b), begin, std::min(rows, begin + kReduceBlock));
        }
        return;
    }
#endif
    (void)exec;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        std::size_t begin = b * kReduceBlock;
        fn(b, begin, std::min(rows, begin + kReduceBlock));
    }
}

struct EStepResult {
    double log_likelihood = 0.0;
    // responsibilities written into the caller's buffer
};

// Computes responsibilities (rows x k) and the total log-likelihood with
// log-sum-exp stabilization. row_density receives each row's log mixture
// density when non-null.
EStepResult e_step(const std::vector<double>& data, std::size_t rows, std::size_t dim,
                   const GmmModel& model, ExecMode exec, std::vector<double>& resp,
                   std::vector<double>* row_density) {
    const int k = model.k;
    std::vector<double> log_w(k), log_norm(k);
    for (int j = 0; j < k; ++j) {
        log_w[j] = std::log(model.weights[j]);
        double c = 0.0;
        for (std::size_t t = 0; t < dim; ++t) c += std::log(model.variances[j * dim + t]);
        log_norm[j] = -0.5 * (static_cast<double>(dim) * kLog2Pi + c);
    }

    const std::size_t n_blocks = (rows + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> block_ll(n_blocks, 0.0);

    blocked_rows(rows, exec, [&](std::size_t b, std::size_t begin, std::size_t end) {
        std::vector<double> logp(k);
        double ll = 0.0;
        for (std::size_t r = begin; r < end; ++r) {
            const double* x = data.data() + r * dim;
            double best = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double* mu = model.means.data() + j * dim;
                const double* var = model.variances.data() + j * dim;
                double quad = 0.0;
                for (std::size_t t = 0; t < dim; ++t) {
                    double dlt = x[t] - mu[t];
                    quad += dlt * dlt / var[t];
                }
                logp[j] = log_w[j] + log_norm[j] - 0.5 * quad;
                best = std::max(best, logp[j]);
            }
            double sum = 0.0;
            for (int j = 0; j < k; ++j) sum += std::exp(logp[j] - best);
            double lse = best + std::log(sum);
            ll += lse;
            if (row_density) (*row_density)[r] = lse;
            double* out = resp.data() + r * k;
            double total = 0.0;
            for (int j = 0; j < k; ++j) {
                out[j] = std::exp(logp[j] - lse);
                total += out[j];
            }
            for (int j = 0; j < k; ++j) out[j] /= total;
        }
        block_ll[b] = ll;
    });

    EStepResult res;
    for (double v : block_ll) res.log_likelihood += v;
    return res;
}

// Weighted sums for the M-step, blocked for determinism.
void m_step(const std::vector<double>& data, std::size_t rows, std::size_t dim,
            const std::vector<double>& resp, int k, double variance_floor, ExecMode exec,
            GmmModel& model, std::vector<double>& comp_mass) {
    const std::size_t n_blocks = (rows + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> part_mass(n_blocks * k, 0.0);
    std::vector<double> part_sum(n_blocks * k * dim, 0.0);
    std::vector<double> part_sq(n_blocks * k * dim, 0.0);

    blocked_rows(rows, exec, [&](std::size_t b, std::size_t begin, std::size_t end) {
        double* mass = part_mass.data() + b * k;
        double* sum = part_sum.data() + b * k * dim;
        double* sq = part_sq.data() + b * k * dim;
        for (std::size_t r = begin; r < end; ++r) {
            const double* x = data.data() + r * dim;
            const double* w = resp.data() + r * k;
            for (int j = 0; j < k; ++j) {
                mass[j] += w[j];
                double* sj = sum + j * dim;
                double* qj = sq + j * dim;
                for (std::size_t t = 0; t < dim; ++t) {
                    sj[t] += w[j] * x[t];
                    qj[t] += w[j] * x[t] * x[t];
                }
            }
        }
    });

    comp_mass.assign(k, 0.0);
    std::vector<double> sum(k * dim, 0.0), sq(k * dim, 0.0);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        for (int j = 0; j < k; ++j) comp_mass[j] += part_mass[b * k + j];
        for (std::size_t t = 0; t < static_cast<std::size_t>(k) * dim; ++t) {
            sum[t] += part_sum[b * k * dim + t];
            sq[t] += part_sq[b * k * dim + t];
        }
    }

    const double n = static_cast<double>(rows);
    for (int j = 0; j < k; ++j) {
        double mass = comp_mass[j];
        if (mass < 1e-10) continue;  // caller repairs empty components
        model.weights[j] = mass / n;
        for (std::size_t t = 0; t < dim; ++t) {
            double mean = sum[j * dim + t] / mass;
            model.means[j * dim + t] = mean;
            double var = sq[j * dim + t] / mass - mean * mean;
            model.variances[j * dim + t] = std::max(var, variance_floor);
        }
    }
}

std::vector<double> global_variance(const std::vector<double>& data, std::size_t rows,
                                    std::size_t dim, double floor) {
    std::vector<double> mean(dim, 0.0), var(dim, floor);
    if (rows == 0) return var;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t t = 0; t < dim; ++t) mean[t] += data[r * dim + t];
    for (std::size_t t = 0; t < dim; ++t) mean[t] /= static_cast<double>(rows);
    for (std::size_t t = 0; t < dim; ++t) var[t] = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t t = 0; t < dim; ++t) {
            double d = data[r * dim + t] - mean[t];
            var[t] += d * d;
        }
    for (std::size_t t = 0; t < dim; ++t)
        var[t] = std::max(var[t] / static_cast<double>(rows), floor);
    return var;
}

double sq_dist(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t t = 0; t < dim; ++t) {
        double d = a[t] - b[t];
        s += d * d;
    }
    return s;
}

// k-means++ seeding: first center uniform, then proportional to the
// squared distance to the nearest chosen center.
std::vector<std::size_t> kmeanspp_centers(const std::vector<double>& data, std::size_t rows,
                                          std::size_t dim, int k, Rng& rng) {
    std::vector<std::size_t> centers;
    centers.reserve(k);
    centers.push_back(static_cast<std::size_t>(rng.bounded(rows)));
    std::vector<double> d2(rows);
    for (std::size_t r = 0; r < rows; ++r)
        d2[r] = sq_dist(data.data() + r * dim, data.data() + centers[0] * dim, dim);
    while (centers.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = 0;
        if (total <= 0.0) {
            pick = static_cast<std::size_t>(rng.bounded(rows));
        } else {
            double target = rng.uniform() * total;
            double run = 0.0;
            pick = rows - 1;
            for (std::size_t r = 0; r < rows; ++r) {
                run += d2[r];
                if (run >= target) {
                    pick = r;
                    break;
                }
            }
        }
        centers.push_back(pick);
        for (std::size_t r = 0; r < rows; ++r)
            d2[r] = std::min(d2[r], sq_dist(data.data() + r * dim, data.data() + pick * dim, dim));
    }
    return centers;
}

GmmModel fit_once(const std::vector<double>& data, std::size_t rows, std::size_t dim, int k,
                  std::uint64_t seed, const GmmConfig& config) {
    Rng rng(seed);
    GmmModel model;
    model.k = k;
    model.dim = dim;
    model.weights.assign(k, 0.0);
    model.means.assign(static_cast<std::size_t>(k) * dim, 0.0);
    model.variances.assign(static_cast<std::size_t>(k) * dim, config.variance_floor);

    const auto gvar = global_variance(data, rows, dim, config.variance_floor);

    // init: hard assignment to the nearest seed center
    auto centers = kmeanspp_centers(data, rows, dim, k, rng);
    std::vector<int> owner(rows, 0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int j = 0; j < k; ++j) {
            double d = sq_dist(data.data() + r * dim, data.data() + centers[j] * dim, dim);
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        owner[r] = arg;
        ++count[arg];
    }
    for (int j = 0; j < k; ++j) {
        if (count[j] == 0) {
            // empty seed bucket: take the center itself with a small weight
            model.weights[j] = 1.0 / static_cast<double>(rows);
            for (std::size_t t = 0; t < dim; ++t) {
                model.means[j * dim + t] = data[centers[j] * dim + t];
                model.variances[j * dim + t] = gvar[t];
            }
            continue;
        }
        model.weights[j] = static_cast<double>(count[j]) / static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            if (owner[r] != j) continue;
            for (std::size_t t = 0; t < dim; ++t) model.means[j * dim + t] += data[r * dim + t];
        }
        for (std::size_t t = 0; t < dim; ++t) model.means[j * dim + t] /= static_cast<double>(count[j]);
        for (std::size_t t = 0; t < dim; ++t) model.variances[j * dim + t] = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            if (owner[r] != j) continue;
            for (std::size_t t = 0; t < dim; ++t) {
                double d = data[r * dim + t] - model.means[j * dim + t];
                model.variances[j * dim + t] += d * d;
            }
        }
        for (std::size_t t = 0; t < dim; ++t)
            model.variances[j * dim + t] =
                std::max(model.variances[j * dim + t] / static_cast<double>(count[j]),
                         config.variance_floor);
    }
    {
        double wsum = 0.0;
        for (double w : model.weights) wsum += w;
        for (double& w : model.weights) w /= wsum;
    }

    std::vector<double> resp(rows * static_cast<std::size_t>(k));
    std::vector<double> density(rows);
    std::vector<double> comp_mass;
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < config.max_iters; ++iter) {
        auto e = e_step(data, rows, dim, model, config.exec, resp, &density);
        model.diagnostics.ll_history.push_back(e.log_likelihood);
        model.diagnostics.iterations = iter + 1;
        model.diagnostics.final_log_likelihood = e.log_likelihood;

        double rel = std::abs(e.log_likelihood - prev_ll) /
                     (std::abs(prev_ll) + std::numeric_limits<double>::epsilon());
        if (iter > 0 && rel < config.rel_tol) break;
        prev_ll = e.log_likelihood;

        m_step(data, rows, dim, resp, k, config.variance_floor, config.exec, model, comp_mass);

        // empty-component repair: re-seed at the worst-explained row
        for (int j = 0; j < k; ++j) {
            if (comp_mass[j] >= 1e-10) continue;
            std::size_t worst = 0;
            for (std::size_t r = 1; r < rows; ++r)
                if (density[r] < density[worst]) worst = r;
            for (std::size_t t = 0; t < dim; ++t) {
                model.means[j * dim + t] = data[worst * dim + t];
                model.variances[j * dim + t] = gvar[t];
            }
            model.weights[j] = 1.0 / static_cast<double>(rows);
            double wsum = 0.0;
            for (double w : model.weights) wsum += w;
            for (double& w : model.weights) w /= wsum;
            model.diagnostics.reseed_iterations.push_back(iter);
        }
    }

    // final responsibilities under the converged parameters
    e_step(data, rows, dim, model, config.exec, resp, nullptr);
    double mass = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        double m = 0.0;
        for (int j = 0; j < k; ++j) m = std::max(m, resp[r * k + j]);
        mass += m;
    }
    model.diagnostics.assignment_mass = mass;
    return model;
}

} // namespace

GmmModel fit_gmm(const AspectEmbeddings& data, int k, std::uint64_t seed, const GmmConfig& config) {
    if (k < 1) throw contract_error("fit_gmm: k must be at least 1");
    if (data.rows < static_cast<std::size_t>(k))
        throw sizing_error("fit_gmm: " + std::to_string(data.rows) + " rows cannot support k=" +
                           std::to_string(k));
    if (data.dim == 0) throw contract_error("fit_gmm: zero-dimensional data");

    // optional seeded random projection for the high-dimension regime
    std::vector<double> projection;
    std::vector<double> work;
    std::size_t dim = data.dim;
    if (config.project && data.dim > config.project_threshold) {
        dim = config.project_dim;
        projection.resize(data.dim * dim);
        Rng prng(mix_seed(seed, 0x70726f6aull));
        const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
        for (auto& v : projection) v = prng.normal() * scale;
        work.assign(data.rows * dim, 0.0);
        blocked_rows(data.rows, config.exec, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t r = begin; r < end; ++r) {
                const double* x = data.row(r);
                double* y = work.data() + r * dim;
                for (std::size_t i = 0; i < data.dim; ++i) {
                    const double xi = x[i];
                    if (xi == 0.0) continue;
                    const double* prow = projection.data() + i * dim;
                    for (std::size_t t = 0; t < dim; ++t) y[t] += xi * prow[t];
                }
            }
        });
    } else {
        work = data.data;
    }

    GmmModel best;
    bool have = false;
    for (int r = 0; r < std::max(1, config.restarts); ++r) {
        GmmModel m = fit_once(work, data.rows, dim, k, mix_seed(seed, static_cast<std::uint64_t>(r)), config);
        m.diagnostics.restart_index = r;
        if (!have || m.diagnostics.final_log_likelihood > best.diagnostics.final_log_likelihood) {
            best = std::move(m);
            have = true;
        }
    }
    best.input_dim = data.dim;
    best.projection = std::move(projection);
    best.diagnostics.projected = !best.projection.empty();
    return best;
}

SoftAssignment soft_assign(const GmmModel& model, const AspectEmbeddings& data) {
    if (data.dim != model.input_dim)
        throw contract_error("soft_assign: data dimension " + std::to_string(data.dim) +
                             " does not match model dimension " + std::to_string(model.input_dim));

    const std::vector<double>* work = &data.data;
    std::vector<double> projected;
    if (!model.projection.empty()) {
        projected.assign(data.rows * model.dim, 0.0);
        for (std::size_t r = 0; r < data.rows; ++r) {
            const double* x = data.row(r);
            double* y = projected.data() + r * model.dim;
            for (std::size_t i = 0; i < data.dim; ++i) {
                const double xi = x[i];
                if (xi == 0.0) continue;
                const double* prow = model.projection.data() + i * model.dim;
                for (std::size_t t = 0; t < model.dim; ++t) y[t] += xi * prow[t];
            }
        }
        work = &projected;
    }

    SoftAssignment out;
    out.rows = data.rows;
    out.k = static_cast<std::size_t>(model.k);
    out.probs.assign(data.rows * out.k, 0.0);
    e_step(*work, data.rows, model.dim, model, ExecMode::Serial, out.probs, nullptr);
    return out;
}

} // namespace taxoforge
