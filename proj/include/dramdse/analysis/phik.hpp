#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <Eigen/Dense>

#include "dramdse/analysis/grid.hpp"

namespace dramdse::analysis {

/// Row/column counts of a two-way table with empty rows and columns removed.
struct Contingency {
    Eigen::MatrixXd counts;
    double total = 0.0;

    int rows() const { return static_cast<int>(counts.rows()); }
    int cols() const { return static_cast<int>(counts.cols()); }
};

/// Category labels as ordinals in increasing order of value.
inline std::vector<int> category_codes(const std::vector<double>& x)
{
    std::map<double, int> code;
    for (double v : x) code.emplace(v, 0);
    int k = 0;
    for (auto& [v, c] : code) c = k++;
    std::vector<int> out;
    out.reserve(x.size());
    for (double v : x) out.push_back(code[v]);
    return out;
}

/// Quantile bins: edges at the k/n_bins order statistics, with every value
/// equal to an edge placed above it, so tied values always share a bin.
inline std::vector<int> quantile_bins(const std::vector<double>& x, int n_bins)
{
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;
    for (int k = 1; k < n_bins; ++k)
        edges.push_back(sorted[static_cast<std::size_t>(k) * sorted.size() / static_cast<std::size_t>(n_bins)]);
    std::vector<int> out;
    out.reserve(x.size());
    for (double v : x)
        out.push_back(static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()));
    return out;
}

inline Contingency contingency(const std::vector<int>& a, const std::vector<int>& b)
{
    if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "contingency: columns differ in length");
    const int ra = a.empty() ? 0 : *std::max_element(a.begin(), a.end()) + 1;
    const int rb = b.empty() ? 0 : *std::max_element(b.begin(), b.end()) + 1;
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(ra, rb);
    for (std::size_t i = 0; i < a.size(); ++i) full(a[i], b[i]) += 1.0;
    std::vector<int> keep_r, keep_c;
    for (int i = 0; i < ra; ++i)
        if (full.row(i).sum() > 0) keep_r.push_back(i);
    for (int j = 0; j < rb; ++j)
        if (full.col(j).sum() > 0) keep_c.push_back(j);
    Contingency c;
    c.counts.resize(static_cast<Eigen::Index>(keep_r.size()), static_cast<Eigen::Index>(keep_c.size()));
    for (std::size_t i = 0; i < keep_r.size(); ++i)
        for (std::size_t j = 0; j < keep_c.size(); ++j)
            c.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = full(keep_r[i], keep_c[j]);
    c.total = c.counts.sum();
    return c;
}

/// Pearson chi-square against independence given the observed margins.
inline double pearson_chi2(const Contingency& c)
{
    const Eigen::VectorXd rs = c.counts.rowwise().sum();
    const Eigen::RowVectorXd cs = c.counts.colwise().sum();
    double chi2 = 0.0;
    for (int i = 0; i < c.rows(); ++i)
        for (int j = 0; j < c.cols(); ++j) {
            const double e = rs(i) * cs(j) / c.total;
            const double d = c.counts(i, j) - e;
            chi2 += d * d / e;
        }
    return chi2;
}

/// Cell probabilities of a standard bivariate normal with correlation rho,
/// cut at the normal quantiles of the cumulative margins `ua` (rows) and `ub`
/// (columns); both run from 0 to 1.
///
/// P(a_i < X <= a_{i+1}, Y <= b) = integral of phi(x) Phi((b - rho x) / sqrt(1 - rho^2))
/// over the row, evaluated with 20-point Gauss-Legendre on `panels` equal
/// sub-intervals; infinite row limits are cut at |x| = 9. rho = 1 uses the
/// exact interval overlap.
inline Eigen::MatrixXd bvn_cell_probs(const std::vector<double>& ua, const std::vector<double>& ub, double rho,
                                      int panels = 8)
{
    const int r = static_cast<int>(ua.size()) - 1;
    const int c = static_cast<int>(ub.size()) - 1;
    Eigen::MatrixXd p(r, c);
    if (rho >= 1.0) {
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
                p(i, j) = std::max(0.0, std::min(ua[static_cast<std::size_t>(i) + 1], ub[static_cast<std::size_t>(j) + 1]) -
                                            std::max(ua[static_cast<std::size_t>(i)], ub[static_cast<std::size_t>(j)]));
        return p;
    }
    constexpr double kTail = 9.0;
    const boost::math::normal_distribution<double> std_normal;
    auto z = [&](double u, double inf) {
        return u <= 0.0 ? -inf : u >= 1.0 ? inf : boost::math::quantile(std_normal, u);
    };
    const double s = std::sqrt(1.0 - rho * rho);
    auto Phi = [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); };
    auto pdf = [](double v) { return std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI); };
    for (int i = 0; i < r; ++i) {
        const double lo = z(ua[static_cast<std::size_t>(i)], kTail);
        const double hi = z(ua[static_cast<std::size_t>(i) + 1], kTail);
        const double row_mass = ua[static_cast<std::size_t>(i) + 1] - ua[static_cast<std::size_t>(i)];
        // cum[j] = P(X in row i, Y <= b_j)
        std::vector<double> cum(static_cast<std::size_t>(c) + 1, 0.0);
        cum[static_cast<std::size_t>(c)] = row_mass;
        for (int j = 1; j < c; ++j) {
            const double bj = z(ub[static_cast<std::size_t>(j)], INFINITY);
            auto f = [&](double x) { return pdf(x) * Phi((bj - rho * x) / s); };
            double acc = 0.0;
            const double w = (hi - lo) / panels;
            for (int k = 0; k < panels; ++k)
                acc += boost::math::quadrature::gauss<double, 20>::integrate(f, lo + k * w, lo + (k + 1) * w);
            cum[static_cast<std::size_t>(j)] = std::min(acc, row_mass);
        }
        for (int j = 0; j < c; ++j)
            p(i, j) = std::max(0.0, cum[static_cast<std::size_t>(j) + 1] - cum[static_cast<std::size_t>(j)]);
    }
    return p;
}

/// Chi-square a binned bivariate normal with correlation rho would produce
/// for a table with these margins and total.
inline double bvn_chi2(const Contingency& c, double rho)
{
    const Eigen::VectorXd rs = c.counts.rowwise().sum() / c.total;
    const Eigen::RowVectorXd cs = c.counts.colwise().sum() / c.total;
    std::vector<double> ua{0.0}, ub{0.0};
    for (int i = 0; i < c.rows(); ++i) ua.push_back(i + 1 == c.rows() ? 1.0 : ua.back() + rs(i));
    for (int j = 0; j < c.cols(); ++j) ub.push_back(j + 1 == c.cols() ? 1.0 : ub.back() + cs(j));
    const Eigen::MatrixXd p = bvn_cell_probs(ua, ub, rho);
    double chi2 = 0.0;
    for (int i = 0; i < c.rows(); ++i)
        for (int j = 0; j < c.cols(); ++j) {
            const double e = rs(i) * cs(j);
            chi2 += (p(i, j) - e) * (p(i, j) - e) / e;
        }
    return c.total * chi2;
}

/// Correlation of the latent bivariate normal whose binned chi-square matches
/// the table's. The reference chi-square carries a noise pedestal equal to
/// the degrees of freedom, the mean chi-square of an independent table:
///
///   chi2(rho) = df + (1 - df / chi2_max) * chi2_bvn(rho),  chi2_max = N (min(r, c) - 1)
///
/// so chi2(0) = df and chi2(1) = chi2_max. Tables at or below the pedestal map
/// to 0. Solved by bisection to `tol`.
inline double phik_from_table(const Contingency& c, double tol = 1e-4)
{
    if (c.rows() < 2 || c.cols() < 2) return 0.0;
    const double obs = pearson_chi2(c);
    const double df = static_cast<double>((c.rows() - 1) * (c.cols() - 1));
    const double chi2_max = c.total * (std::min(c.rows(), c.cols()) - 1);
    const double scale = std::max(0.0, 1.0 - df / chi2_max);
    auto model = [&](double rho) { return df + scale * bvn_chi2(c, rho); };
    if (obs <= df) return 0.0;
    if (obs >= model(1.0) * (1.0 - 1e-12)) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (model(mid) < obs)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Bins a column for phi_k: native categories for categorical columns,
/// quantile bins otherwise.
inline std::vector<int> phik_codes(const std::vector<double>& x, bool categorical, int n_bins)
{
    return categorical ? category_codes(x) : quantile_bins(x, n_bins);
}

inline double phik_pair(const std::vector<double>& x, bool x_categorical, const std::vector<double>& y,
                        bool y_categorical, int n_bins = 5)
{
    return phik_from_table(contingency(phik_codes(x, x_categorical, n_bins), phik_codes(y, y_categorical, n_bins)));
}

/// 13 x 13 phi_k matrix over the ten parameters and the three metrics.
/// A constant column correlates 0 with everything; the diagonal is 1.
inline Eigen::MatrixXd phik_matrix(const SampleTable& t, int n_bins = 5, unsigned threads = 1)
{
    if (n_bins < 2) throw Error(ErrorKind::ConfigError, "n_bins must be >= 2");
    if (t.n_rows() < static_cast<std::size_t>(10 * n_bins))
        throw Error(ErrorKind::LengthMismatch, "phi_k needs at least 10 * n_bins rows");
    constexpr int k = SampleTable::kColumns;
    std::vector<std::vector<int>> codes;
    for (int j = 0; j < k; ++j) codes.push_back(phik_codes(t.column(j), SampleTable::is_categorical(j), n_bins));
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
    std::vector<double> vals(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t i) {
        vals[i] = phik_from_table(contingency(codes[static_cast<std::size_t>(pairs[i].first)],
                                              codes[static_cast<std::size_t>(pairs[i].second)]));
    });
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        m(pairs[i].first, pairs[i].second) = vals[i];
        m(pairs[i].second, pairs[i].first) = vals[i];
    }
    return m;
}

/// Header: "variable" followed by the 13 column names; one row per variable.
inline std::string phik_to_csv(const Eigen::MatrixXd& m)
{
    csv::Table out;
    out.header.push_back("variable");
    for (int j = 0; j < m.cols(); ++j) out.header.push_back(SampleTable::column_name(j));
    for (int i = 0; i < m.rows(); ++i) {
        std::vector<std::string> cells{SampleTable::column_name(i)};
        for (int j = 0; j < m.cols(); ++j) cells.push_back(csv::num(m(i, j)));
        out.rows.push_back(std::move(cells));
    }
    return csv::to_string(out);
}

} // namespace dramdse::analysis
