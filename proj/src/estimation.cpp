#include <algorithm>
#include <cmath>

#include "optotherm/errors.hpp"
#include "optotherm/metrology.hpp"

namespace optotherm {

namespace {

RVector nbar_grid(PriorRange prior, int grid_points) {
    if (!(prior.hi > prior.lo) || prior.lo < 0.0) throw DomainError("bayesian_estimate: need 0 <= lo < hi");
    if (grid_points < 2) throw DomainError("bayesian_estimate: need at least 2 grid points");
    return RVector::LinSpaced(grid_points, prior.lo, prior.hi);
}

EstimationRun summarize(std::vector<double> samples, RVector grid, const RVector& loglik) {
    EstimationRun run;
    run.count = static_cast<int>(samples.size());
    run.samples = std::move(samples);
    run.grid = std::move(grid);
    const double peak = loglik.maxCoeff();
    run.posterior = (loglik.array() - peak).exp().matrix();
    run.posterior /= run.posterior.sum();
    run.estimate = run.posterior.dot(run.grid);
    run.variance = run.posterior.dot((run.grid.array() - run.estimate).square().matrix());
    const Eigen::Index n = run.grid.size();
    const Eigen::Index edge = std::max<Eigen::Index>(1, n / 20);
    const double edge_mass = run.posterior.head(edge).sum() + run.posterior.tail(edge).sum();
    run.boundary_warning = run.count > 0 && edge_mass > 0.2;
    return run;
}

double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

} // namespace

EstimationRun bayesian_estimate(std::vector<double> samples, const DephasingFamily& family, HomodyneSetting setting,
                                PriorRange prior, int grid_points) {
    RVector grid = nbar_grid(prior, grid_points);
    const int dim = family.dim();
    const Eigen::Index count = static_cast<Eigen::Index>(samples.size());
    RVector loglik = RVector::Zero(grid.size());
    if (count > 0) {
        // p(x | nbar) = sum_d w_d(nbar) q_d(x): the bands q_d do not depend on
        // nbar, so they are tabulated once per sample.
        const RVector x = Eigen::Map<const RVector>(samples.data(), count);
        const RMatrix psi = hermite_table(x, FockCutoff(dim - 1));
        RMatrix bands = RMatrix::Zero(count, dim);
        const CMatrix& base = family.base();
        for (int d = 0; d < dim; ++d) {
            for (int m = 0; m + d < dim; ++m) {
                const int n = m + d;
                const double coeff = (base(n, m) * std::polar(1.0, setting.phi_lo * static_cast<double>(m - n))).real();
                const double factor = d == 0 ? coeff : 2.0 * coeff;
                bands.col(d) += factor * psi.col(n).cwiseProduct(psi.col(m));
            }
        }
        constexpr Eigen::Index kChunk = 64;
        for (Eigen::Index start = 0; start < grid.size(); start += kChunk) {
            const Eigen::Index width = std::min(kChunk, grid.size() - start);
            RMatrix weights(dim, width);
            for (Eigen::Index j = 0; j < width; ++j) weights.col(j) = family.band_weights(grid[start + j]);
            const RMatrix p = bands * weights;
            for (Eigen::Index j = 0; j < width; ++j) {
                double s = 0.0;
                for (Eigen::Index k = 0; k < count; ++k) s += safe_log(p(k, j));
                loglik[start + j] = s;
            }
        }
    }
    return summarize(std::move(samples), std::move(grid), loglik);
}

EstimationRun bayesian_estimate(std::vector<double> samples, const StateMap& builder, HomodyneSetting setting,
                                PriorRange prior, int grid_points) {
    RVector grid = nbar_grid(prior, grid_points);
    RVector loglik = RVector::Zero(grid.size());
    if (!samples.empty()) {
        const RVector x = Eigen::Map<const RVector>(samples.data(), static_cast<Eigen::Index>(samples.size()));
        for (Eigen::Index j = 0; j < grid.size(); ++j) {
            const RVector p = homodyne_density(builder(grid[j]).matrix(), setting, x);
            double s = 0.0;
            for (Eigen::Index k = 0; k < p.size(); ++k) s += safe_log(p[k]);
            loglik[j] = s;
        }
    }
    return summarize(std::move(samples), std::move(grid), loglik);
}

} // namespace optotherm
