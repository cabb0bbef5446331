#include "detail/simplex.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <cmath>
#include <memory>
#include <stdexcept>

namespace credit::detail {

namespace {

constexpr double kPenalty = 1e30;

struct Context {
    const Objective* objective;
    int evaluations = 0;
};

double trampoline(const gsl_vector* v, void* params) {
    auto* ctx = static_cast<Context*>(params);
    ++ctx->evaluations;
    const std::span<const double> x(v->data, v->size);
    const double f = (*ctx->objective)(x);
    return std::isfinite(f) ? f : kPenalty;
}

struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;
using MinimizerPtr = std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter>;

VectorPtr make_vector(std::span<const double> values) {
    VectorPtr v(gsl_vector_alloc(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i)
        gsl_vector_set(v.get(), i, values[i]);
    return v;
}

} // namespace

SimplexResult minimize_simplex(const Objective& objective, std::vector<double> start,
                               const SimplexOptions& options) {
    if (start.empty())
        throw std::invalid_argument("minimize_simplex: empty start vector");
    gsl_set_error_handler_off();

    Context ctx{&objective};
    gsl_multimin_function fn;
    fn.n = start.size();
    fn.f = &trampoline;
    fn.params = &ctx;

    SimplexResult result;
    result.x = std::move(start);
    result.value = trampoline(make_vector(result.x).get(), &ctx);

    const std::vector<double> steps(result.x.size(), options.initial_step);
    for (int restart = 0; restart <= options.max_restarts; ++restart) {
        MinimizerPtr minimizer(
            gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, result.x.size()));
        auto x0 = make_vector(result.x);
        auto step = make_vector(steps);
        gsl_multimin_fminimizer_set(minimizer.get(), &fn, x0.get(), step.get());

        const double value_before = result.value;
        bool contracted = false;
        const int stall_window = options.stall_iterations_per_dim * static_cast<int>(fn.n);
        double checkpoint = gsl_multimin_fminimizer_minimum(minimizer.get());
        int since_checkpoint = 0;
        while (result.iterations < options.max_iterations) {
            ++result.iterations;
            if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) {
                // Degenerate simplex: rebuild it around the best vertex.
                contracted = true;
                break;
            }
            const double best = gsl_multimin_fminimizer_minimum(minimizer.get());
            result.descent_log.push_back(best);
            const double size = gsl_multimin_fminimizer_size(minimizer.get());
            if (gsl_multimin_test_size(size, options.size_tolerance) == GSL_SUCCESS) {
                contracted = true;
                break;
            }
            // A parameter drifting to infinity in transformed coordinates keeps
            // the simplex large while the objective no longer moves.
            if (++since_checkpoint >= stall_window) {
                if (!(checkpoint - best > options.stall_tolerance * std::abs(best) + 1e-300)) {
                    contracted = true;
                    break;
                }
                checkpoint = best;
                since_checkpoint = 0;
            }
        }

        const double value = gsl_multimin_fminimizer_minimum(minimizer.get());
        if (value <= result.value) {
            const gsl_vector* best = gsl_multimin_fminimizer_x(minimizer.get());
            result.x.assign(best->data, best->data + best->size);
            result.value = value;
        }
        if (!contracted)
            break;
        const double gain = value_before - result.value;
        if (restart > 0 && !(gain > options.restart_tolerance * std::abs(result.value) + 1e-300)) {
            result.converged = true;
            break;
        }
    }
    result.evaluations = ctx.evaluations;
    return result;
}

} // namespace credit::detail
