#pragma once

#include <cstddef>
#include <span>

// Reduction kernels backing the exact-moment and Monte Carlo paths. Every
// kernel has a scalar reference implementation and an AVX2+FMA variant;
// dispatch happens at runtime. The two variants may differ by reassociation
// rounding only (equivalence-tested at 1e-12 relative), which sits far below
// the 1e-9 tolerances used everywhere else.
namespace decouple::kernels {

// True if the AVX2 variants are compiled in and the CPU supports them.
bool avx2_available() noexcept;

// Force the scalar reference path. Used by the equivalence tests; the CLI
// honors DECOUPLE_FORCE_SCALAR=1.
void set_force_scalar(bool force) noexcept;
bool scalar_forced() noexcept;

// Variant the dispatcher picks right now: "avx2" or "scalar".
const char* active_variant() noexcept;

double sum(std::span<const double> x) noexcept;        // sum x_i
double sum_sq(std::span<const double> x) noexcept;     // sum x_i^2
double sum_quart(std::span<const double> x) noexcept;  // sum x_i^4

// sum w_i * x_i
double dot(std::span<const double> x, std::span<const double> w) noexcept;
// sum w_i * x_i^2
double weighted_sq(std::span<const double> x, std::span<const double> w) noexcept;
// sum w_i * (x_i - center)^2
double weighted_centered_sq(std::span<const double> x, std::span<const double> w,
                            double center) noexcept;
// sum w_i * a_i * b_i
double weighted_prod(std::span<const double> a, std::span<const double> b,
                     std::span<const double> w) noexcept;

// Probability mass of strict events: {x_i > threshold} and
// {|x_i - center| > threshold}.
double mass_above(std::span<const double> x, std::span<const double> w,
                  double threshold) noexcept;
double mass_abs_deviation_above(std::span<const double> x, std::span<const double> w,
                                double center, double threshold) noexcept;

std::size_t count_above(std::span<const double> x, double threshold) noexcept;
std::size_t count_abs_deviation_above(std::span<const double> x, double center,
                                      double threshold) noexcept;

}  // namespace decouple::kernels
