#pragma once

#include <cstdint>
#include <optional>

#include "toplora/matrix.hpp"
#include "toplora/rng.hpp"

namespace toplora {

enum class Kind { lora, toplora };

struct AdapterConfig {
    std::size_t rank = 4;
    double alpha = 0.0;  // <= 0 means "use the default 2*rank"
    double dropout_rate = 0.05;
    double rmsnorm_eps = 1e-6;
    bool use_exp = true;
    bool use_rmsnorm = true;
    double clamp_bound = 30.0;
    std::uint64_t seed = 0;

    double effective_alpha() const {
        return alpha > 0.0 ? alpha : 2.0 * static_cast<double>(rank);
    }
    double scaling() const { return effective_alpha() / static_cast<double>(rank); }
    void validate() const;
};

struct LoRAAdapter {
    Matrix W;  // m x n, frozen
    Matrix A;  // r x n
    Matrix B;  // m x r
    AdapterConfig config;
};

struct TopLoRAAdapter {
    Matrix W;      // m x n, frozen
    Matrix A;      // r x n
    Matrix B;      // m x r
    Matrix Theta;  // r x n, gate projector
    AdapterConfig config;
};

struct GradientSet {
    Matrix dA;      // r x n
    Matrix dB;      // m x r
    Matrix dTheta;  // r x n, empty for plain LoRA
    Matrix dX;      // n x T
    bool has_theta = false;
};

// A is Kaiming-uniform on [-sqrt(6/n), sqrt(6/n)], B is zero, so the
// initial update is exactly zero.
LoRAAdapter init_lora(const AdapterConfig& config, const Matrix& W);

// As init_lora; Theta gets an independent Kaiming-uniform draw.
TopLoRAAdapter init_toplora(const AdapterConfig& config, const Matrix& W);

// out_i = v_i / sqrt(mean_j(v_j^2) + eps), no learnable gain.
Vector rmsnorm(const Vector& v, double eps);

// Diagonal of Sigma_X for one token: gate(norm(Theta*x)).
Vector sigma_of(const TopLoRAAdapter& adapter, const Vector& x);

// Tokens are columns of X (n x T); returns m x T. An optional dropout
// mask (n x T, entries 0 or 1/(1-p)) scales the adapter-path input only;
// the frozen W path always sees the raw token.
Matrix forward(const LoRAAdapter& adapter, const Matrix& X,
               const Matrix* dropout_mask = nullptr);
Matrix forward(const TopLoRAAdapter& adapter, const Matrix& X,
               const Matrix* dropout_mask = nullptr);

// Exact gradients of the forward pass against upstream G (m x T). The
// mask must match the paired forward call.
GradientSet backward(const LoRAAdapter& adapter, const Matrix& X, const Matrix& G,
                     const Matrix* dropout_mask = nullptr);
GradientSet backward(const TopLoRAAdapter& adapter, const Matrix& X, const Matrix& G,
                     const Matrix* dropout_mask = nullptr);

// W + (alpha/r) * B * A.
Matrix merge(const LoRAAdapter& adapter);
// Always throws UnmergeableError: token-wise weights depend on the input
// and cannot be folded into W.
Matrix merge(const TopLoRAAdapter& adapter);

// (alpha/r) * B * Diag(sigma_of(adapter, x)) * A for one token.
Matrix effective_weight(const TopLoRAAdapter& adapter, const Vector& x);

// Trainable parameter counts per Kind across `modules` adapted weights.
std::uint64_t param_count(Kind kind, std::uint64_t m, std::uint64_t n, std::uint64_t r,
                          std::uint64_t modules);

// Inverted-scaling dropout mask, one shared mask per token column.
Matrix make_dropout_mask(std::size_t n, std::size_t tokens, double rate, Rng& rng);

}  // namespace toplora
