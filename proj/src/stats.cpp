#include "driveframe/stats.hpp"

#include "driveframe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace driveframe::stats {

namespace {

// Modified Lentz continued fraction for the incomplete beta.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TestResult paired_t_test(const PairedSample& s, Sides sides) {
    const std::size_t n = s.pairs.size();
    if (n < 2)
        throw ValidationError("stats: paired t-test needs at least 2 pairs");

    double mean = 0.0;
    for (const auto& [baseline, intervention] : s.pairs) mean += baseline - intervention;
    mean /= static_cast<double>(n);

    double ss = 0.0;
    for (const auto& [baseline, intervention] : s.pairs) {
        const double d = (baseline - intervention) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0)
        throw ValidationError("stats: degenerate variance, all differences identical");

    TestResult r;
    r.n_effective = n;
    r.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
    const double p_two = student_t_two_sided_p(r.statistic, static_cast<double>(n - 1));
    if (sides == Sides::Two) {
        r.p_value = p_two;
        r.method_note = "student-t two-sided df=" + std::to_string(n - 1);
    } else {
        r.p_value = r.statistic > 0.0 ? p_two / 2.0 : 1.0 - p_two / 2.0;
        r.method_note = "student-t one-sided df=" + std::to_string(n - 1);
    }
    return r;
}

TestResult wilcoxon_signed_rank(const PairedSample& s) {
    if (s.pairs.size() < 2)
        throw ValidationError("stats: wilcoxon needs at least 2 pairs");

    std::vector<double> diffs;
    for (const auto& [baseline, intervention] : s.pairs) {
        const double d = baseline - intervention;
        if (d != 0.0) diffs.push_back(d);
    }
    const std::size_t n = diffs.size();
    if (n == 0)
        throw ValidationError("stats: no signal, all differences are zero");

    // Mid-ranks over |d|.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(diffs[a]) < std::fabs(diffs[b]);
    });
    std::vector<double> rank(n, 0.0);
    std::vector<std::size_t> tie_sizes;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::fabs(diffs[order[j]]) == std::fabs(diffs[order[i]])) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) rank[order[k]] = mid;
        tie_sizes.push_back(j - i);
        i = j;
    }

    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        (diffs[i] > 0.0 ? w_plus : w_minus) += rank[i];
    const double w = std::min(w_plus, w_minus);

    TestResult r;
    r.statistic = w;
    r.n_effective = n;

    if (n <= kWilcoxonExactLimit) {
        // Count sign assignments by achievable W+ (doubled ranks stay
        // integral under mid-ranks), then p = P(min(W+, W-) <= w).
        const int total2 = static_cast<int>(static_cast<double>(n * (n + 1)));
        std::vector<std::uint64_t> count(static_cast<std::size_t>(total2) + 1, 0);
        count[0] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            const int r2 = static_cast<int>(std::lround(rank[i] * 2.0));
            for (int v = total2; v >= r2; --v) count[v] += count[v - r2];
        }
        const int w2 = static_cast<int>(std::lround(w * 2.0));
        std::uint64_t hits = 0;
        for (int v = 0; v <= total2; ++v)
            if (v <= w2 || v >= total2 - w2) hits += count[v];
        r.p_value = static_cast<double>(hits) / std::ldexp(1.0, static_cast<int>(n));
        r.p_value = std::min(1.0, r.p_value);
        r.method_note = "exact";
    } else {
        const double nd = static_cast<double>(n);
        const double mu = nd * (nd + 1.0) / 4.0;
        double sigma2 = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0;
        for (std::size_t t : tie_sizes) {
            const double td = static_cast<double>(t);
            sigma2 -= (td * td * td - td) / 48.0;
        }
        const double z = (w - mu + 0.5) / std::sqrt(sigma2);
        r.p_value = std::min(1.0, 2.0 * normal_cdf(z));
        r.method_note = "normal-approx";
    }
    return r;
}

TestResult pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw ValidationError("stats: pearson inputs differ in length");
    const std::size_t n = x.size();
    if (n < 3)
        throw ValidationError("stats: pearson needs at least 3 points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ValidationError("stats: degenerate variance, constant input");

    TestResult res;
    res.n_effective = n;
    res.statistic = sxy / std::sqrt(sxx * syy);
    const double df = static_cast<double>(n - 2);
    const double denom = 1.0 - res.statistic * res.statistic;
    if (denom <= 0.0) {
        res.p_value = 0.0;
    } else {
        const double t = res.statistic * std::sqrt(df / denom);
        res.p_value = student_t_two_sided_p(t, df);
    }
    res.method_note = "pearson t-approx df=" + std::to_string(n - 2);
    return res;
}

} // namespace driveframe::stats
