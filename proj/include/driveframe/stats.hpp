#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace driveframe::stats {

// Per-driver (baseline, intervention) rate pairs, events per 100 km.
struct PairedSample {
    std::vector<std::pair<double, double>> pairs;
};

enum class Sides { Two, One };

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n_effective = 0;
    std::string method_note;
};

// Continued-fraction evaluation of I_x(a, b); the p-value workhorse.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided Student t tail probability with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// t = mean(d) / (sd(d)/sqrt(n)) over d = baseline - intervention, with the
// sample (n-1) standard deviation. One-sided tests the observed direction's
// upper tail, so p_one = p_two/2 when t > 0.
TestResult paired_t_test(const PairedSample& s, Sides sides = Sides::Two);

// Zero differences are dropped; |d| is ranked with mid-ranks for ties and
// W = min(W+, W-). Exact two-sided p over all 2^n sign assignments while
// n_effective <= 20, otherwise a normal approximation with tie and
// continuity corrections. method_note says which path ran.
TestResult wilcoxon_signed_rank(const PairedSample& s);

inline constexpr std::size_t kWilcoxonExactLimit = 20;

// Product-moment correlation; p from t = r*sqrt((n-2)/(1-r^2)) on n-2 df.
TestResult pearson_r(const std::vector<double>& x, const std::vector<double>& y);

} // namespace driveframe::stats
