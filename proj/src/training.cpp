#include "toplora/training.hpp"

#include <cmath>

#include "toplora/rng.hpp"

namespace toplora {

void TeacherTaskSpec::validate() const {
    if (n == 0 || m == 0) throw ConfigError("teacher dims must be positive");
    if (r_teacher == 0 || r_teacher > std::min(m, n))
        throw ConfigError("r_teacher must be in [1, min(m, n)]");
    if (vocab < 2) throw ConfigError("vocab must be >= 2");
    if (vocab > n) throw ConfigError("vocab must not exceed n (type indicator coordinates)");
    if (samples_train < 1 || samples_eval < 1) throw ConfigError("samples must be >= 1");
    if (noise_std < 0.0) throw ConfigError("noise_std must be >= 0");
    if (gate_log_bound < 0.0) throw ConfigError("gate_log_bound must be >= 0");
}

namespace {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double std_dev, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = std_dev * rng.gaussian();
    return m;
}

Dataset sample_dataset(const TeacherTaskSpec& spec, const TeacherModel& teacher,
                       std::size_t count, Rng& rng) {
    Dataset data;
    data.inputs = Matrix(spec.n, count);
    data.targets = Matrix(spec.m, count);
    data.token_type.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
        const int type = static_cast<int>(rng.index(spec.vocab));
        data.token_type[s] = type;
        Vector x(spec.n);
        for (std::size_t i = 0; i < spec.n; ++i) x[i] = rng.gaussian();
        // The first `vocab` coordinates carry a clean one-hot type indicator so
        // the type is an exact function of the token content.
        for (std::size_t k = 0; k < spec.vocab; ++k) {
            x[k] = (k == static_cast<std::size_t>(type)) ? 1.0 : 0.0;
        }
        set_column(data.inputs, s, x);

        Vector z = matvec(teacher.A, x);
        for (std::size_t i = 0; i < spec.r_teacher; ++i)
            z[i] *= teacher.gates(static_cast<std::size_t>(type), i);
        Vector y = matvec(teacher.W, x);
        Vector bz = matvec(teacher.B, z);
        for (std::size_t i = 0; i < spec.m; ++i) {
            y[i] += bz[i];
            if (spec.noise_std > 0.0) y[i] += spec.noise_std * rng.gaussian();
        }
        set_column(data.targets, s, y);
    }
    return data;
}

}  // namespace

TeacherData make_teacher_dataset(const TeacherTaskSpec& spec) {
    spec.validate();
    TeacherData out;
    {
        Rng rng(derive_seed(spec.seed, 100));
        out.teacher.W = gaussian_matrix(spec.m, spec.n,
                                        1.0 / std::sqrt(static_cast<double>(spec.n)), rng);
        out.teacher.A = gaussian_matrix(spec.r_teacher, spec.n,
                                        1.0 / std::sqrt(static_cast<double>(spec.n)), rng);
        out.teacher.B = gaussian_matrix(
            spec.m, spec.r_teacher, 1.0 / std::sqrt(static_cast<double>(spec.r_teacher)), rng);
        out.teacher.gates = Matrix(spec.vocab, spec.r_teacher);
        for (double& g : out.teacher.gates.data())
            g = std::exp(rng.uniform(-spec.gate_log_bound, spec.gate_log_bound));
    }
    {
        Rng rng(derive_seed(spec.seed, 101));
        out.train = sample_dataset(spec, out.teacher, spec.samples_train, rng);
    }
    {
        Rng rng(derive_seed(spec.seed, 102));
        out.eval = sample_dataset(spec, out.teacher, spec.samples_eval, rng);
    }
    return out;
}

void AdamW::step(const std::vector<Matrix*>& params,
                 const std::vector<const Matrix*>& grads) {
    if (params.size() != grads.size()) {
        throw ShapeError("adamw: parameter/gradient count mismatch");
    }
    if (first_moment_.empty()) {
        for (const Matrix* p : params) {
            first_moment_.emplace_back(p->rows(), p->cols());
            second_moment_.emplace_back(p->rows(), p->cols());
        }
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& p = *params[k];
        const Matrix& g = *grads[k];
        if (!p.same_shape(g) || !p.same_shape(first_moment_[k])) {
            throw ShapeError("adamw: shape mismatch for parameter " + std::to_string(k) +
                             " (" + shape_str(p) + " vs " + shape_str(g) + ")");
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            double& m = first_moment_[k].data()[i];
            double& v = second_moment_[k].data()[i];
            const double gi = g.data()[i];
            m = hyper_.beta1 * m + (1.0 - hyper_.beta1) * gi;
            v = hyper_.beta2 * v + (1.0 - hyper_.beta2) * gi * gi;
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            double& pi = p.data()[i];
            pi -= hyper_.lr * (m_hat / (std::sqrt(v_hat) + hyper_.eps) +
                               hyper_.weight_decay * pi);
        }
    }
}

namespace {

template <typename Adapter>
double eval_impl(const Adapter& adapter, const Dataset& data) {
    if (data.inputs.cols() == 0) throw ConfigError("evaluate: empty dataset");
    Matrix Y = forward(adapter, data.inputs);
    Matrix diff = sub(Y, data.targets);
    double total = 0.0;
    for (double v : diff.data()) total += v * v;
    return 0.5 * total / static_cast<double>(data.inputs.cols());
}

std::vector<Matrix*> trainable(LoRAAdapter& a) { return {&a.A, &a.B}; }
std::vector<Matrix*> trainable(TopLoRAAdapter& a) { return {&a.A, &a.B, &a.Theta}; }

std::vector<const Matrix*> grad_list(const LoRAAdapter&, const GradientSet& g) {
    return {&g.dA, &g.dB};
}
std::vector<const Matrix*> grad_list(const TopLoRAAdapter&, const GradientSet& g) {
    return {&g.dA, &g.dB, &g.dTheta};
}

template <typename Adapter>
RunMetrics train_impl(Adapter& adapter, const Dataset& train_data, const Dataset& eval_data,
                      const TrainOptions& options) {
    if (options.steps < 1) throw ConfigError("train: steps must be >= 1");
    if (options.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (train_data.inputs.cols() == 0) throw ConfigError("train: empty dataset");

    const std::size_t n = train_data.inputs.rows();
    const std::size_t total = train_data.inputs.cols();
    const double dropout = adapter.config.dropout_rate;

    Rng batch_rng(derive_seed(options.seed, 200));
    Rng dropout_rng(derive_seed(options.seed, 201));

    AdamWHyper hyper;
    hyper.lr = options.lr;
    AdamW optimizer(hyper);

    RunMetrics metrics;
    metrics.seed = options.seed;
    metrics.per_step.reserve(static_cast<std::size_t>(options.steps));

    for (long step = 1; step <= options.steps; ++step) {
        Matrix X(n, options.batch_size);
        Matrix T(adapter.W.rows(), options.batch_size);
        for (std::size_t b = 0; b < options.batch_size; ++b) {
            const std::size_t idx = static_cast<std::size_t>(batch_rng.index(total));
            set_column(X, b, column(train_data.inputs, idx));
            set_column(T, b, column(train_data.targets, idx));
        }

        Matrix mask;
        const Matrix* mask_ptr = nullptr;
        if (dropout > 0.0) {
            mask = make_dropout_mask(n, options.batch_size, dropout, dropout_rng);
            mask_ptr = &mask;
        }

        Matrix Y = forward(adapter, X, mask_ptr);
        Matrix diff = sub(Y, T);
        double loss = 0.0;
        for (double v : diff.data()) loss += v * v;
        loss *= 0.5 / static_cast<double>(options.batch_size);
        if (!std::isfinite(loss)) {
            throw DivergenceError("training loss became non-finite", step);
        }
        metrics.per_step.emplace_back(step, loss);

        Matrix G = scale(diff, 1.0 / static_cast<double>(options.batch_size));
        GradientSet grads = backward(adapter, X, G, mask_ptr);
        optimizer.step(trainable(adapter), grad_list(adapter, grads));
    }

    metrics.final_eval_loss = eval_impl(adapter, eval_data);
    return metrics;
}

}  // namespace

RunMetrics train(LoRAAdapter& adapter, const Dataset& train_data, const Dataset& eval_data,
                 const TrainOptions& options) {
    return train_impl(adapter, train_data, eval_data, options);
}

RunMetrics train(TopLoRAAdapter& adapter, const Dataset& train_data,
                 const Dataset& eval_data, const TrainOptions& options) {
    return train_impl(adapter, train_data, eval_data, options);
}

double evaluate(const LoRAAdapter& adapter, const Dataset& data) {
    return eval_impl(adapter, data);
}

double evaluate(const TopLoRAAdapter& adapter, const Dataset& data) {
    return eval_impl(adapter, data);
}

}  // namespace toplora
