#ifndef JCAS_SUBSPACE_HPP
#define JCAS_SUBSPACE_HPP

/**
 * @file subspace.hpp
 * @brief Shared subspace machinery: Hermitian eigendecomposition, eigenvalue-gap
 *        model-order selection, noise-power estimation and the grid-seeded
 *        two-step Newton descent used by every MUSIC-style search.
 */

#include <algorithm>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "jcas/common.hpp"

namespace jcas {

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
struct EigResult {
    VectorXd values;   ///< descending
    MatrixXcd vectors;  ///< columns matching values

    /// Columns [order, end): the noise subspace for a given model order.
    MatrixXcd noise_subspace(int order) const {
        return vectors.rightCols(vectors.cols() - order);
    }
    /// Columns [0, order): the signal subspace.
    MatrixXcd signal_subspace(int order) const { return vectors.leftCols(order); }
};

/**
 * @brief Eigendecomposition with a deterministic ordering and phase convention.
 *
 * Eigenvalues are returned in descending order; each eigenvector is scaled so
 * that its largest-magnitude entry is real and positive.  Throws if the input
 * is not square or deviates from Hermitian symmetry by more than 1e-9
 * (relative Frobenius).
 */
inline EigResult herm_eig(const MatrixXcd& R) {
    if (R.rows() != R.cols()) {
        throw std::invalid_argument("herm_eig: matrix must be square");
    }
    const double scale = R.norm();
    if (scale > 0.0 && (R - R.adjoint()).norm() > 1e-9 * scale) {
        throw std::invalid_argument("herm_eig: matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(R);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("herm_eig: eigendecomposition failed");
    }
    const int n = static_cast<int>(R.rows());
    EigResult out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values(i) = es.eigenvalues()(n - 1 - i);  // ascending -> descending
        VectorXcd v = es.eigenvectors().col(n - 1 - i);
        int imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        const Cplx pivot = v(imax);
        if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
        out.vectors.col(i) = v;
    }
    return out;
}

/**
 * @brief Eigenvalue-gap model-order estimate.
 *
 * Differential spectrum rule: with descending eigenvalues v and gaps
 * v_d[i] = v[i] - v[i+1], leading gaps that stand clear of the tail-half gap
 * level mark signal components.  The textbook form (threshold =
 * (1+eps) * mean of the tail-half gaps) assumes the idealized spectrum whose
 * noise eigenvalues are exactly equal; on finite-sample covariances the
 * sorted-spectrum edge gaps routinely beat that mean, so this implementation
 * hardens the rule while reproducing it exactly on clean spectra:
 *
 *  - trailing eigenvalues below 1e-10 * v[0] are dropped first (rank-deficient
 *    sample covariances produce an exactly-zero tail that would poison the
 *    tail statistics);
 *  - the gap threshold compares against the tail-half *maximum* gap;
 *  - a qualifying eigenvalue must additionally exceed 3x the eigenvalue at the
 *    tail-half boundary (the rule's documented sensitivity floor of
 *    3 * sigma_N^2);
 *  - the scan stops at the first clearly failing gap, but numerically zero
 *    gaps (exact eigenvalue ties) neither qualify nor stop it.
 *
 * Clean spectra are handled before the gap scan: when every eigenvalue past
 * the first @c above is numerically zero (<= 1e-12 * v[0]) and @c above is
 * well below the attainable rank, the covariance itself is exactly low-rank
 * (noise-free data), so the rank is the order.  @c snapshots caps the
 * attainable rank of a sample covariance; without it a noisy covariance
 * averaged over fewer snapshots than its dimension (whose spectrum also ends
 * in an exact-zero tail) would be mistaken for clean data.
 *
 * Returns 0 when no gap qualifies (e.g. an all-equal spectrum).
 */
inline int estimate_model_order(const VectorXd& values, double eps_gap = 1.0, int snapshots = 0) {
    const int n_in = static_cast<int>(values.size());
    if (n_in < 4) {
        throw std::invalid_argument("estimate_model_order: need at least 4 eigenvalues");
    }
    for (int i = 0; i + 1 < n_in; ++i) {
        if (values(i) < values(i + 1) - 1e-12 * std::abs(values(0))) {
            throw std::invalid_argument("estimate_model_order: eigenvalues must be descending");
        }
    }

    // Truncate the numerically-zero tail, keeping a small guard band.
    int above = 0;
    for (int i = 0; i < n_in; ++i) {
        if (values(i) > 1e-10 * values(0)) ++above;
    }

    // Clean-spectrum shortcut (see header comment).
    const int rank_limit = snapshots > 0 ? std::min(snapshots, n_in) : n_in;
    if (above < rank_limit && 2 * above <= rank_limit &&
        values(above) <= 1e-12 * values(0)) {
        return above;
    }

    const int n = std::min(n_in, std::max(above + 3, 4));

    const int n_gaps = n - 1;
    VectorXd gap(n_gaps);
    for (int i = 0; i < n_gaps; ++i) gap(i) = values(i) - values(i + 1);

    // Tail half: 1-based start floor((n-1)/2), clamped so the first gap never
    // counts as tail (degenerate for very short inputs).
    const int lo = std::max((n - 1) / 2, 2);  // 1-based index into gaps
    double tail_max = 0.0;
    for (int i = lo; i <= n_gaps; ++i) tail_max = std::max(tail_max, gap(i - 1));

    const double spread = values(0) - values(n - 1);
    const double tie = 1e-9 * spread;
    const double thr = std::max((1.0 + eps_gap) * tail_max, tie);
    const double level_ref = values(lo - 1);  // eigenvalue at the tail boundary

    const int cap = std::max(lo - 1, 1);
    int order = 0;
    for (int i = 1; i <= cap; ++i) {
        const double g = gap(i - 1);
        if (g > thr && values(i - 1) > 3.0 * level_ref) {
            order = i;
        } else if (g > tie) {
            break;
        }
    }
    return order;
}

/// Mean of the sub-noise eigenvalues: sigma_hat^2 = mean(values[order..]).
inline double estimate_noise_power(const VectorXd& values, int order) {
    const int n = static_cast<int>(values.size());
    if (order < 0 || order >= n) {
        throw std::invalid_argument("estimate_noise_power: order must leave a nonempty tail");
    }
    return values.tail(n - order).mean();
}

/**
 * @brief Model order of a smoothed covariance: the largest eigenvalue cliff.
 *
 * The gap rule above needs a flat noise floor to measure gaps against.  A
 * Kalman-smoothed sequence has none: smoothing crushes both the noise and the
 * clock-jitter spread by orders of magnitude, leaving a spectrum that falls
 * off a cliff after the true components and then decays smoothly.  Absolute
 * thresholds fail too, because the residual shoulder scales with the signal
 * power, not with sigma_N^2.  What survives smoothing is the multiplicative
 * structure: signal eigenvalues sit a factor of hundreds above everything
 * else, so the order is the index of the largest ratio v[i-1] / v[i].
 *
 * Ratios are clamped at a relative floor of 1e-12 * v[0] so exact-zero tails
 * (noise-free data) cannot fake a second cliff at machine level.  The scan
 * stops short of @c rank_limit (the snapshot count): a sample covariance
 * drops to machine zero exactly at its attainable rank, and that plunge --
 * easily 10^8 -- says nothing about signal content.  Call this only when at
 * least one component is known to be present (e.g. after a detection gate on
 * the unsmoothed matrix): like every argmax, it returns >= 1 even on junk.
 */
inline int spectral_cliff_order(const VectorXd& values, int rank_limit = 0) {
    const int n = static_cast<int>(values.size());
    if (n < 2) {
        throw std::invalid_argument("spectral_cliff_order: need at least 2 eigenvalues");
    }
    if (!(values(0) > 0.0)) {
        throw std::invalid_argument("spectral_cliff_order: leading eigenvalue must be positive");
    }
    const int cap = rank_limit > 0 ? std::min(rank_limit - 1, n - 1) : n - 1;
    const double floor = 1e-12 * values(0);
    int order = 1;
    double best = 0.0;
    for (int i = 1; i <= cap; ++i) {
        const double r = values(i - 1) / std::max(values(i), floor);
        if (r > best) {
            best = r;
            order = i;
        }
    }
    return order;
}

// ---------------------------------------------------------------------------
// Grid-seeded Newton minimum search
// ---------------------------------------------------------------------------

/**
 * @brief Domain, grid density and convergence control for a spectrum search.
 *
 * Axis 1 is ignored for one-dimensional searches.  Grid samples are placed at
 * cell centres, so open interval endpoints are never evaluated.
 */
struct SearchConfig {
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> grid{64, 64};
    double tol = 1e-6;   ///< Newton step-norm convergence threshold
    int max_iter = 20;   ///< ind_max

    /// Full-azimuth, upper-hemisphere angle search (overrridden per scene).
    static SearchConfig aoa_defaults() {
        SearchConfig c;
        c.lo = {-kPi, deg2rad(1.0)};
        c.hi = {kPi, deg2rad(90.0)};
        c.grid = {64, 64};
        c.tol = 1e-5;
        return c;
    }
    /// Doppler search over the unambiguous window (-1/(2 T_p), 1/(2 T_p)].
    static SearchConfig doppler_defaults(double packet_interval) {
        SearchConfig c;
        const double half = 0.5 / packet_interval;
        c.lo = {-half, 0.0};
        c.hi = {half, 0.0};
        c.grid = {256, 1};
        c.tol = 1e-1;
        return c;
    }
    /// Range search over the unambiguous window [0, c/delta_f).
    static SearchConfig range_defaults(double subcarrier_spacing) {
        SearchConfig c;
        c.lo = {0.0, 0.0};
        c.hi = {kSpeedOfLight / subcarrier_spacing, 0.0};
        c.grid = {512, 1};
        c.tol = 1e-3;
        return c;
    }
};

/// One refined spectrum minimum; @c newton_ok is false when refinement fell
/// back to the grid seed without making any progress.
struct SpectrumMinimum {
    Eigen::Vector2d point = Eigen::Vector2d::Zero();
    double value = 0.0;
    bool newton_ok = true;
};

namespace detail {

/// Deduplicate refined minima that collapsed onto the same point, keeping the
/// deeper one.  Tolerance is per-axis and generous relative to Newton's tol.
inline void dedup_minima(std::vector<SpectrumMinimum>& mins, double tol0, double tol1) {
    std::vector<SpectrumMinimum> out;
    for (const auto& m : mins) {
        bool dup = false;
        for (auto& o : out) {
            if (std::abs(m.point(0) - o.point(0)) <= tol0 &&
                std::abs(m.point(1) - o.point(1)) <= tol1) {
                if (m.value < o.value) o = m;
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(m);
    }
    mins = std::move(out);
}

}  // namespace detail

namespace detail {

/// Seeds beyond the requested peak count that are still refined; spurious
/// valley seeds then converge onto a true minimum and fall to deduplication.
inline int seed_budget(int n_peaks) { return std::max(3 * n_peaks, n_peaks + 2); }

}  // namespace detail

/**
 * @brief 2-D grid-seeded Newton descent to the @c n_peaks deepest minima of f.
 *
 * Seeds are strict local minima of f on the cell-centre grid (4-neighbourhood;
 * boundary cells compare only against existing neighbours).  Each seed is
 * refined by a damped Newton iteration p <- p - t H^-1 grad with a
 * backtracking line search (t halved until f decreases); when the Newton
 * direction is unusable (singular or indefinite Hessian) the search falls
 * back to the gradient direction scaled to one grid cell.  Monotone by
 * construction: the result never exceeds its seed's value.  The damping
 * matters near the elevation-degenerate edge of an angle domain, where minima
 * sit in long curved valleys and the undamped Newton step overshoots.
 * A few extra seeds beyond @c n_peaks are refined so that shallow valley
 * artifacts can migrate into the true basins and be deduplicated; the
 * deepest @c n_peaks survivors are returned sorted by ascending spectrum
 * value.  Throws if the grid contains no local minimum.
 */
inline std::vector<SpectrumMinimum> newton_minimum_search(
    const std::function<double(const Eigen::Vector2d&)>& f,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& grad,
    const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& hess,
    const SearchConfig& cfg, int n_peaks) {
    const int n0 = cfg.grid[0];
    const int n1 = cfg.grid[1];
    if (n0 < 3 || n1 < 3) {
        throw std::invalid_argument("newton_minimum_search: grid too coarse");
    }
    if (n_peaks < 1) return {};
    const double step0 = (cfg.hi[0] - cfg.lo[0]) / n0;
    const double step1 = (cfg.hi[1] - cfg.lo[1]) / n1;

    Eigen::MatrixXd vals(n0, n1);
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            vals(i, j) = f({cfg.lo[0] + (i + 0.5) * step0, cfg.lo[1] + (j + 0.5) * step1});
        }
    }

    struct Seed {
        int i, j;
        double v;
    };
    std::vector<Seed> seeds;
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const double v = vals(i, j);
            bool is_min = true;
            if (i > 0 && vals(i - 1, j) <= v) is_min = false;
            if (is_min && i + 1 < n0 && vals(i + 1, j) <= v) is_min = false;
            if (is_min && j > 0 && vals(i, j - 1) <= v) is_min = false;
            if (is_min && j + 1 < n1 && vals(i, j + 1) <= v) is_min = false;
            if (is_min) seeds.push_back({i, j, v});
        }
    }
    if (seeds.empty()) {
        throw std::runtime_error("newton_minimum_search: no local minima on the grid");
    }
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.v < b.v; });
    if (static_cast<int>(seeds.size()) > detail::seed_budget(n_peaks)) {
        seeds.resize(detail::seed_budget(n_peaks));
    }

    std::vector<SpectrumMinimum> mins;
    for (const Seed& s : seeds) {
        Eigen::Vector2d x{cfg.lo[0] + (s.i + 0.5) * step0, cfg.lo[1] + (s.j + 0.5) * step1};
        double fx = s.v;
        bool ok = true;
        int accepted_steps = 0;
        for (int it = 0; it < cfg.max_iter; ++it) {
            const Eigen::Vector2d g = grad(x);
            const double gnorm = g.norm();
            if (!std::isfinite(gnorm) || gnorm == 0.0) break;  // critical point
            const Eigen::Matrix2d H = hess(x);
            const double det = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
            Eigen::Vector2d dir;
            bool newton_dir = std::isfinite(det) && std::abs(det) > 1e-300;
            if (newton_dir) {
                dir(0) = (H(1, 1) * g(0) - H(0, 1) * g(1)) / det;
                dir(1) = (H(0, 0) * g(1) - H(1, 0) * g(0)) / det;
                newton_dir = dir.allFinite() && dir.dot(g) > 0.0;  // descent check
            }
            if (!newton_dir) {
                dir = g * (std::hypot(step0, step1) / gnorm);
            }
            double t = 1.0;
            bool accepted = false;
            double moved = 0.0;
            for (int bt = 0; bt < 30; ++bt, t *= 0.5) {
                const Eigen::Vector2d cand = x - t * dir;
                if (cand(0) < cfg.lo[0] || cand(0) > cfg.hi[0] || cand(1) < cfg.lo[1] ||
                    cand(1) > cfg.hi[1]) {
                    continue;
                }
                const double fc = f(cand);
                if (std::isfinite(fc) && fc < fx) {
                    moved = t * dir.norm();
                    x = cand;
                    fx = fc;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                ok = accepted_steps > 0;
                break;
            }
            ++accepted_steps;
            if (moved <= cfg.tol) break;
        }
        mins.push_back({x, fx, ok});
    }
    detail::dedup_minima(mins, std::max(10.0 * cfg.tol, 1e-12), std::max(10.0 * cfg.tol, 1e-12));
    std::sort(mins.begin(), mins.end(),
              [](const SpectrumMinimum& a, const SpectrumMinimum& b) { return a.value < b.value; });
    if (static_cast<int>(mins.size()) > n_peaks) mins.resize(n_peaks);
    return mins;
}

/// 1-D counterpart sharing the same contract (axis 0 of cfg).
inline std::vector<SpectrumMinimum> newton_minimum_search_1d(
    const std::function<double(double)>& f, const std::function<double(double)>& df,
    const std::function<double(double)>& d2f, const SearchConfig& cfg, int n_peaks) {
    const int n0 = cfg.grid[0];
    if (n0 < 3) {
        throw std::invalid_argument("newton_minimum_search_1d: grid too coarse");
    }
    if (n_peaks < 1) return {};
    const double step0 = (cfg.hi[0] - cfg.lo[0]) / n0;

    VectorXd vals(n0);
    for (int i = 0; i < n0; ++i) vals(i) = f(cfg.lo[0] + (i + 0.5) * step0);

    struct Seed {
        int i;
        double v;
    };
    std::vector<Seed> seeds;
    for (int i = 0; i < n0; ++i) {
        const double v = vals(i);
        bool is_min = true;
        if (i > 0 && vals(i - 1) <= v) is_min = false;
        if (is_min && i + 1 < n0 && vals(i + 1) <= v) is_min = false;
        if (is_min) seeds.push_back({i, v});
    }
    if (seeds.empty()) {
        throw std::runtime_error("newton_minimum_search_1d: no local minima on the grid");
    }
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.v < b.v; });
    if (static_cast<int>(seeds.size()) > detail::seed_budget(n_peaks)) {
        seeds.resize(detail::seed_budget(n_peaks));
    }

    std::vector<SpectrumMinimum> mins;
    for (const Seed& s : seeds) {
        double x = cfg.lo[0] + (s.i + 0.5) * step0;
        double fx = s.v;
        bool ok = true;
        int accepted_steps = 0;
        for (int it = 0; it < cfg.max_iter; ++it) {
            const double g = df(x);
            if (!std::isfinite(g) || g == 0.0) break;  // critical point
            const double h = d2f(x);
            double dir = std::isfinite(h) && h > 1e-300 ? g / h : 0.0;  // descent check
            if (!std::isfinite(dir) || dir * g <= 0.0) {
                dir = g * (step0 / std::abs(g));
            }
            double t = 1.0;
            bool accepted = false;
            double moved = 0.0;
            for (int bt = 0; bt < 30; ++bt, t *= 0.5) {
                const double cand = x - t * dir;
                if (cand < cfg.lo[0] || cand > cfg.hi[0]) continue;
                const double fc = f(cand);
                if (std::isfinite(fc) && fc < fx) {
                    moved = t * std::abs(dir);
                    x = cand;
                    fx = fc;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                ok = accepted_steps > 0;
                break;
            }
            ++accepted_steps;
            if (moved <= cfg.tol) break;
        }
        mins.push_back({{x, 0.0}, fx, ok});
    }
    detail::dedup_minima(mins, std::max(10.0 * cfg.tol, 1e-12), 1.0);
    std::sort(mins.begin(), mins.end(),
              [](const SpectrumMinimum& a, const SpectrumMinimum& b) { return a.value < b.value; });
    if (static_cast<int>(mins.size()) > n_peaks) mins.resize(n_peaks);
    return mins;
}

// ---------------------------------------------------------------------------
// MUSIC spectrum helper
// ---------------------------------------------------------------------------

/**
 * @brief Evaluates quadratic forms against a noise-subspace projector.
 *
 * For searches the projector is applied through its signal-space complement
 * (P_N = I - U_s U_s^H), which costs O(dim * order) per product instead of
 * O(dim^2).  Orthogonality residual tests should use the explicit noise
 * subspace from EigResult instead; the complement form loses precision below
 * ~1e-7 of the vector norm through cancellation.
 */
class NoiseProjector {
  public:
    explicit NoiseProjector(MatrixXcd signal_basis) : us_(std::move(signal_basis)) {}

    /// u^H P_N v for arbitrary vectors.
    Cplx quad(const VectorXcd& u, const VectorXcd& v) const {
        Cplx full = u.dot(v);  // Eigen's dot conjugates the left argument
        if (us_.cols() > 0) full -= (us_.adjoint() * u).dot(us_.adjoint() * v);
        return full;
    }

    /// a^H P_N a (real by construction).
    double spectrum(const VectorXcd& a) const { return std::real(quad(a, a)); }

    int order() const { return static_cast<int>(us_.cols()); }

  private:
    MatrixXcd us_;
};

}  // namespace jcas

#endif  // JCAS_SUBSPACE_HPP
