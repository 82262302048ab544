#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "toplora/adapter.hpp"
#include "toplora/matrix.hpp"

namespace toplora {

struct TeacherTaskSpec {
    std::size_t n = 32;
    std::size_t m = 32;
    std::size_t r_teacher = 4;
    std::size_t vocab = 8;          // number of token types K
    double gate_log_bound = 1.0;    // gates log-uniform in [e^-b, e^+b]
    std::size_t samples_train = 4096;
    std::size_t samples_eval = 1024;
    double noise_std = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Dataset {
    Matrix inputs;                 // n x N, tokens as columns
    std::vector<int> token_type;   // length N, values in [0, K)
    Matrix targets;                // m x N
};

// Ground-truth generator: y = W*x + B*Diag(g_type)*A*x (+ noise).
struct TeacherModel {
    Matrix W;      // m x n, frozen base
    Matrix A;      // r_teacher x n
    Matrix B;      // m x r_teacher
    Matrix gates;  // vocab x r_teacher, per-type diagonal gates
};

struct TeacherData {
    TeacherModel teacher;
    Dataset train;
    Dataset eval;
};

// Tokens are standard Gaussians with a one-hot type indicator (scale 1)
// added onto the first K coordinates, so the type is recoverable from
// the token content alone.
TeacherData make_teacher_dataset(const TeacherTaskSpec& spec);

struct AdamWHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr = 1e-3;
    double weight_decay = 0.0;
};

// Bias-corrected AdamW over a fixed set of parameter matrices. With
// weight_decay = 0 this coincides with Adam.
class AdamW {
public:
    explicit AdamW(AdamWHyper hyper) : hyper_(hyper) {}

    // params and grads must be index-aligned with identical shapes across
    // calls; moments are lazily sized on the first step.
    void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads);

    long step_count() const { return step_; }

private:
    AdamWHyper hyper_;
    long step_ = 0;
    std::vector<Matrix> first_moment_;
    std::vector<Matrix> second_moment_;
};

struct RunMetrics {
    std::vector<std::pair<long, double>> per_step;  // (step, train loss)
    double final_eval_loss = 0.0;
    std::uint64_t seed = 0;
};

struct TrainOptions {
    long steps = 2000;
    std::size_t batch_size = 32;
    double lr = 1e-2;
    std::uint64_t seed = 0;
};

// Minibatch MSE training of the adapter's trainable parameters (A, B and
// Theta for TopLoRA); W is never touched. Loss per step is
// (1/batch) * sum over batch of 0.5*||y - target||^2.
RunMetrics train(LoRAAdapter& adapter, const Dataset& train_data, const Dataset& eval_data,
                 const TrainOptions& options);
RunMetrics train(TopLoRAAdapter& adapter, const Dataset& train_data,
                 const Dataset& eval_data, const TrainOptions& options);

// Mean over samples of 0.5*||y - target||^2, eval mode (no dropout).
double evaluate(const LoRAAdapter& adapter, const Dataset& data);
double evaluate(const TopLoRAAdapter& adapter, const Dataset& data);

}  // namespace toplora
