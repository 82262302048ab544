#include "toplora/adapter.hpp"

#include <algorithm>
#include <cmath>

namespace toplora {

void AdapterConfig::validate() const {
    if (rank < 1) throw ConfigError("rank must be >= 1");
    if (effective_alpha() <= 0.0) throw ConfigError("alpha must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ConfigError("dropout_rate must be in [0, 1)");
    if (rmsnorm_eps <= 0.0) throw ConfigError("rmsnorm_eps must be positive");
    if (clamp_bound <= 0.0) throw ConfigError("clamp_bound must be positive");
}

namespace {

Matrix kaiming_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    // fan-in = cols; bound sqrt(6 / fan_in)
    const double bound = std::sqrt(6.0 / static_cast<double>(cols));
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-bound, bound);
    return m;
}

void check_adapter_shapes(const AdapterConfig& config, const Matrix& W) {
    config.validate();
    if (W.rows() == 0 || W.cols() == 0) throw ConfigError("W must be non-empty");
    if (config.rank >= std::min(W.rows(), W.cols()))
        throw ConfigError("rank " + std::to_string(config.rank) +
                          " must be below min(m, n) for W " + shape_str(W));
}

}  // namespace

LoRAAdapter init_lora(const AdapterConfig& config, const Matrix& W) {
    check_adapter_shapes(config, W);
    Rng rng(derive_seed(config.seed, 0));
    LoRAAdapter adapter;
    adapter.W = W;
    adapter.A = kaiming_uniform(config.rank, W.cols(), rng);
    adapter.B = Matrix(W.rows(), config.rank);
    adapter.config = config;
    return adapter;
}

TopLoRAAdapter init_toplora(const AdapterConfig& config, const Matrix& W) {
    check_adapter_shapes(config, W);
    TopLoRAAdapter adapter;
    adapter.W = W;
    {
        Rng rng(derive_seed(config.seed, 0));
        adapter.A = kaiming_uniform(config.rank, W.cols(), rng);
    }
    {
        Rng rng(derive_seed(config.seed, 1));
        adapter.Theta = kaiming_uniform(config.rank, W.cols(), rng);
    }
    adapter.B = Matrix(W.rows(), config.rank);
    adapter.config = config;
    return adapter;
}

Vector rmsnorm(const Vector& v, double eps) {
    if (eps < 0.0) throw ConfigError("rmsnorm eps must be non-negative");
    double ms = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) ms += v[i] * v[i];
    ms /= static_cast<double>(v.size());
    const double rho = std::sqrt(ms + eps);
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / rho;
    return out;
}

namespace {

// Gate pipeline for one token: u = Theta*x, h = norm/clamp, sigma = gate(h).
struct GateState {
    Vector u;       // Theta * x
    Vector h_pre;   // after rmsnorm (or u), before clamp
    Vector h;       // clamped
    Vector sigma;
};

GateState gate_forward(const TopLoRAAdapter& adapter, const Vector& x) {
    const AdapterConfig& cfg = adapter.config;
    GateState st;
    st.u = matvec(adapter.Theta, x);
    st.h_pre = cfg.use_rmsnorm ? rmsnorm(st.u, cfg.rmsnorm_eps) : st.u;
    st.h = Vector(st.h_pre.size());
    st.sigma = Vector(st.h_pre.size());
    for (std::size_t i = 0; i < st.h_pre.size(); ++i) {
        st.h[i] = std::clamp(st.h_pre[i], -cfg.clamp_bound, cfg.clamp_bound);
        st.sigma[i] = cfg.use_exp ? std::exp(st.h[i]) : 1.0 + st.h[i];
    }
    return st;
}

// du from dh for h = rmsnorm(u): dh/du_j = delta_ij/rho - u_i*u_j/(r*rho^3).
Vector rmsnorm_backward(const Vector& dh, const Vector& u, double eps) {
    const std::size_t r = u.size();
    double ms = 0.0;
    for (std::size_t i = 0; i < r; ++i) ms += u[i] * u[i];
    ms /= static_cast<double>(r);
    const double rho = std::sqrt(ms + eps);
    double proj = 0.0;
    for (std::size_t i = 0; i < r; ++i) proj += dh[i] * u[i];
    proj /= static_cast<double>(r) * rho * rho * rho;
    Vector du(r);
    for (std::size_t j = 0; j < r; ++j) du[j] = dh[j] / rho - u[j] * proj;
    return du;
}

void check_forward_shapes(const Matrix& W, const Matrix& X, const Matrix* mask) {
    if (X.rows() != W.cols()) {
        throw ShapeError("forward: X rows " + std::to_string(X.rows()) +
                         " must equal n = " + std::to_string(W.cols()));
    }
    if (X.cols() == 0) throw ShapeError("forward: X must have at least one token column");
    X.check_finite("forward input");
    if (mask && !mask->same_shape(X)) {
        throw ShapeError("dropout mask shape " + shape_str(*mask) +
                         " must match X " + shape_str(X));
    }
}

Vector masked_column(const Matrix& X, const Matrix* mask, std::size_t t) {
    Vector x = column(X, t);
    if (mask) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] *= (*mask)(i, t);
    }
    return x;
}

void check_grad_shapes(const Matrix& W, const Matrix& X, const Matrix& G) {
    if (G.rows() != W.rows() || G.cols() != X.cols()) {
        throw ShapeError("backward: G " + shape_str(G) + " must be " +
                         std::to_string(W.rows()) + "x" + std::to_string(X.cols()));
    }
}

}  // namespace

Vector sigma_of(const TopLoRAAdapter& adapter, const Vector& x) {
    if (x.size() != adapter.Theta.cols()) {
        throw ShapeError("sigma_of: token length " + std::to_string(x.size()) +
                         " must equal n = " + std::to_string(adapter.Theta.cols()));
    }
    return gate_forward(adapter, x).sigma;
}

Matrix forward(const LoRAAdapter& adapter, const Matrix& X, const Matrix* dropout_mask) {
    check_forward_shapes(adapter.W, X, dropout_mask);
    const double s = adapter.config.scaling();
    Matrix Y(adapter.W.rows(), X.cols());
    for (std::size_t t = 0; t < X.cols(); ++t) {
        Vector x = column(X, t);
        Vector y = matvec(adapter.W, x);
        Vector xd = masked_column(X, dropout_mask, t);
        Vector z = matvec(adapter.A, xd);
        Vector bz = matvec(adapter.B, z);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * bz[i];
        set_column(Y, t, y);
    }
    return Y;
}

Matrix forward(const TopLoRAAdapter& adapter, const Matrix& X, const Matrix* dropout_mask) {
    check_forward_shapes(adapter.W, X, dropout_mask);
    const double s = adapter.config.scaling();
    Matrix Y(adapter.W.rows(), X.cols());
    for (std::size_t t = 0; t < X.cols(); ++t) {
        Vector x = column(X, t);
        Vector y = matvec(adapter.W, x);
        Vector xd = masked_column(X, dropout_mask, t);
        GateState st = gate_forward(adapter, xd);
        Vector z = matvec(adapter.A, xd);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] *= st.sigma[i];
        Vector bz = matvec(adapter.B, z);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * bz[i];
        set_column(Y, t, y);
    }
    return Y;
}

GradientSet backward(const LoRAAdapter& adapter, const Matrix& X, const Matrix& G,
                     const Matrix* dropout_mask) {
    check_forward_shapes(adapter.W, X, dropout_mask);
    check_grad_shapes(adapter.W, X, G);
    const double s = adapter.config.scaling();
    const Matrix Wt = transpose(adapter.W);
    const Matrix At = transpose(adapter.A);
    const Matrix Bt = transpose(adapter.B);

    GradientSet grads;
    grads.dA = Matrix(adapter.A.rows(), adapter.A.cols());
    grads.dB = Matrix(adapter.B.rows(), adapter.B.cols());
    grads.dX = Matrix(X.rows(), X.cols());
    grads.has_theta = false;

    for (std::size_t t = 0; t < X.cols(); ++t) {
        Vector g = column(G, t);
        Vector xd = masked_column(X, dropout_mask, t);
        Vector z = matvec(adapter.A, xd);

        // dB += s * g * z^T
        for (std::size_t i = 0; i < grads.dB.rows(); ++i)
            for (std::size_t j = 0; j < grads.dB.cols(); ++j)
                grads.dB(i, j) += s * g[i] * z[j];

        Vector dz = matvec(Bt, g);
        for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= s;

        for (std::size_t i = 0; i < grads.dA.rows(); ++i)
            for (std::size_t j = 0; j < grads.dA.cols(); ++j)
                grads.dA(i, j) += dz[i] * xd[j];

        Vector dx = matvec(Wt, g);
        Vector dxd = matvec(At, dz);
        for (std::size_t i = 0; i < dx.size(); ++i) {
            const double m = dropout_mask ? (*dropout_mask)(i, t) : 1.0;
            grads.dX(i, t) = dx[i] + m * dxd[i];
        }
    }
    return grads;
}

GradientSet backward(const TopLoRAAdapter& adapter, const Matrix& X, const Matrix& G,
                     const Matrix* dropout_mask) {
    check_forward_shapes(adapter.W, X, dropout_mask);
    check_grad_shapes(adapter.W, X, G);
    const AdapterConfig& cfg = adapter.config;
    const double s = cfg.scaling();
    const Matrix Wt = transpose(adapter.W);
    const Matrix At = transpose(adapter.A);
    const Matrix Bt = transpose(adapter.B);
    const Matrix Tt = transpose(adapter.Theta);

    GradientSet grads;
    grads.dA = Matrix(adapter.A.rows(), adapter.A.cols());
    grads.dB = Matrix(adapter.B.rows(), adapter.B.cols());
    grads.dTheta = Matrix(adapter.Theta.rows(), adapter.Theta.cols());
    grads.dX = Matrix(X.rows(), X.cols());
    grads.has_theta = true;

    const std::size_t r = cfg.rank;
    for (std::size_t t = 0; t < X.cols(); ++t) {
        Vector g = column(G, t);
        Vector xd = masked_column(X, dropout_mask, t);
        GateState st = gate_forward(adapter, xd);
        Vector z = matvec(adapter.A, xd);
        Vector v(r);
        for (std::size_t i = 0; i < r; ++i) v[i] = st.sigma[i] * z[i];

        // dB += s * g * v^T
        for (std::size_t i = 0; i < grads.dB.rows(); ++i)
            for (std::size_t j = 0; j < r; ++j) grads.dB(i, j) += s * g[i] * v[j];

        Vector dv = matvec(Bt, g);
        for (std::size_t i = 0; i < r; ++i) dv[i] *= s;

        Vector dz(r), dsigma(r), dh(r);
        for (std::size_t i = 0; i < r; ++i) {
            dz[i] = dv[i] * st.sigma[i];
            dsigma[i] = dv[i] * z[i];
            dh[i] = cfg.use_exp ? dsigma[i] * st.sigma[i] : dsigma[i];
            // clamp: zero gradient where the pre-clamp value is outside the bound
            if (st.h_pre[i] < -cfg.clamp_bound || st.h_pre[i] > cfg.clamp_bound) dh[i] = 0.0;
        }
        Vector du = cfg.use_rmsnorm ? rmsnorm_backward(dh, st.u, cfg.rmsnorm_eps) : dh;

        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < grads.dA.cols(); ++j) {
                grads.dA(i, j) += dz[i] * xd[j];
                grads.dTheta(i, j) += du[i] * xd[j];
            }

        Vector dx = matvec(Wt, g);
        Vector dxd_a = matvec(At, dz);
        Vector dxd_t = matvec(Tt, du);
        for (std::size_t i = 0; i < dx.size(); ++i) {
            const double m = dropout_mask ? (*dropout_mask)(i, t) : 1.0;
            grads.dX(i, t) = dx[i] + m * (dxd_a[i] + dxd_t[i]);
        }
    }
    return grads;
}

Matrix merge(const LoRAAdapter& adapter) {
    return add(adapter.W, scale(matmul(adapter.B, adapter.A), adapter.config.scaling()));
}

Matrix merge(const TopLoRAAdapter&) {
    throw UnmergeableError(
        "token-wise adapter weights depend on the input token and cannot be merged "
        "into the pretrained weight");
}

Matrix effective_weight(const TopLoRAAdapter& adapter, const Vector& x) {
    Vector sigma = sigma_of(adapter, x);
    Matrix sa = matmul(diag(sigma), adapter.A);
    return scale(matmul(adapter.B, sa), adapter.config.scaling());
}

std::uint64_t param_count(Kind kind, std::uint64_t m, std::uint64_t n, std::uint64_t r,
                          std::uint64_t modules) {
    if (m == 0 || n == 0 || r == 0 || modules == 0)
        throw ConfigError("param_count arguments must be positive");
    return kind == Kind::lora ? modules * r * (m + n) : modules * r * (m + 2 * n);
}

Matrix make_dropout_mask(std::size_t n, std::size_t tokens, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
    Matrix mask(n, tokens);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t t = 0; t < tokens; ++t)
        for (std::size_t i = 0; i < n; ++i)
            mask(i, t) = rng.uniform() < rate ? 0.0 : keep_scale;
    return mask;
}

}  // namespace toplora
