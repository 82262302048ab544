#include "toplora/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <variant>

#include "toplora/adapter.hpp"
#include "toplora/analysis.hpp"
#include "toplora/linalg.hpp"
#include "toplora/serialize.hpp"
#include "toplora/training.hpp"

namespace toplora::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Strict config parsing
// ---------------------------------------------------------------------------

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

std::uint64_t as_u64(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    const json& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError("key '" + key + "' in " + where + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::uint64_t as_u64_or(const json& obj, const std::string& key, const std::string& where,
                        std::uint64_t fallback) {
    return obj.contains(key) ? as_u64(obj, key, where) : fallback;
}

double as_double(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("key '" + key + "' in " + where + " must be a number");
    return v.get<double>();
}

double as_double_or(const json& obj, const std::string& key, const std::string& where,
                    double fallback) {
    return obj.contains(key) ? as_double(obj, key, where) : fallback;
}

bool as_bool_or(const json& obj, const std::string& key, const std::string& where,
                bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError("key '" + key + "' in " + where + " must be a boolean");
    return v.get<bool>();
}

std::string as_string_or(const json& obj, const std::string& key, const std::string& where,
                         const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError("key '" + key + "' in " + where + " must be a string");
    return v.get<std::string>();
}

std::vector<std::uint64_t> as_seed_list(const json& obj, const std::string& key,
                                        const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    const json& v = obj.at(key);
    if (!v.is_array() || v.empty()) {
        throw ConfigError("key '" + key + "' in " + where + " must be a non-empty array");
    }
    std::vector<std::uint64_t> seeds;
    std::set<std::uint64_t> seen;
    for (const json& e : v) {
        if (!e.is_number_integer() && !e.is_number_unsigned()) {
            throw ConfigError("seeds in " + where + " must be integers");
        }
        const std::uint64_t s = e.get<std::uint64_t>();
        if (!seen.insert(s).second) {
            throw ConfigError("duplicate seed " + std::to_string(s) + " in " + where);
        }
        seeds.push_back(s);
    }
    return seeds;
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

json finish_report(const std::string& command, const json& config, json results,
                   std::chrono::steady_clock::time_point start) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json report;
    report["tool_version"] = kToolVersion;
    report["command"] = command;
    report["config"] = config;
    report["results"] = std::move(results);
    report["wall_seconds"] = secs;
    return report;
}

AdapterConfig parse_adapter_config(const json& obj, const std::string& where,
                                   bool require_rank = true) {
    check_keys(obj,
               {"rank", "alpha", "dropout_rate", "rmsnorm_eps", "use_exp", "use_rmsnorm",
                "clamp_bound"},
               where);
    AdapterConfig cfg;
    if (require_rank || obj.contains("rank")) {
        cfg.rank = static_cast<std::size_t>(as_u64(obj, "rank", where));
    }
    cfg.alpha = as_double_or(obj, "alpha", where, 0.0);
    cfg.dropout_rate = as_double_or(obj, "dropout_rate", where, 0.0);
    cfg.rmsnorm_eps = as_double_or(obj, "rmsnorm_eps", where, 1e-6);
    cfg.use_exp = as_bool_or(obj, "use_exp", where, true);
    cfg.use_rmsnorm = as_bool_or(obj, "use_rmsnorm", where, true);
    cfg.clamp_bound = as_double_or(obj, "clamp_bound", where, 30.0);
    cfg.validate();
    return cfg;
}

TeacherTaskSpec parse_task_spec(const json& obj, const std::string& where) {
    check_keys(obj,
               {"n", "m", "r_teacher", "vocab", "gate_log_bound", "samples_train",
                "samples_eval", "noise_std", "seed"},
               where);
    TeacherTaskSpec spec;
    spec.n = static_cast<std::size_t>(as_u64_or(obj, "n", where, 32));
    spec.m = static_cast<std::size_t>(as_u64_or(obj, "m", where, 32));
    spec.r_teacher = static_cast<std::size_t>(as_u64_or(obj, "r_teacher", where, 4));
    spec.vocab = static_cast<std::size_t>(as_u64_or(obj, "vocab", where, 8));
    spec.gate_log_bound = as_double_or(obj, "gate_log_bound", where, 1.0);
    spec.samples_train = static_cast<std::size_t>(as_u64_or(obj, "samples_train", where, 4096));
    spec.samples_eval = static_cast<std::size_t>(as_u64_or(obj, "samples_eval", where, 1024));
    spec.noise_std = as_double_or(obj, "noise_std", where, 0.0);
    spec.seed = as_u64_or(obj, "seed", where, 0);
    spec.validate();
    return spec;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double std_dev = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = std_dev * rng.gaussian();
    return m;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

template <typename Adapter>
double half_sq_loss(const Adapter& adapter, const Matrix& X) {
    Matrix Y = forward(adapter, X);
    double s = 0.0;
    for (double v : Y.data()) s += v * v;
    return 0.5 * s;
}

// Central finite differences of L = 0.5*||forward||^2 w.r.t. one matrix,
// compared entry-wise against the analytic gradient.
template <typename Adapter>
double fd_max_rel_err(Adapter& adapter, Matrix& param, const Matrix& analytic,
                      const Matrix& X, double step) {
    double worst = 0.0;
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double saved = param.data()[i];
        param.data()[i] = saved + step;
        const double lp = half_sq_loss(adapter, X);
        param.data()[i] = saved - step;
        const double lm = half_sq_loss(adapter, X);
        param.data()[i] = saved;
        const double fd = (lp - lm) / (2.0 * step);
        const double an = analytic.data()[i];
        const double err = std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
        worst = std::max(worst, err);
    }
    return worst;
}

struct GradcheckCase {
    json per_group;
    double max_err = 0.0;
};

GradcheckCase gradcheck_case(const std::string& variant, std::uint64_t seed, std::size_t m,
                             std::size_t n, std::size_t r, std::size_t tokens,
                             bool corrupt) {
    constexpr double kStep = 1e-5;
    AdapterConfig cfg;
    cfg.rank = r;
    cfg.dropout_rate = 0.0;
    cfg.seed = seed;
    if (variant == "toplora_no_exp") cfg.use_exp = false;
    if (variant == "toplora_no_rmsnorm") cfg.use_rmsnorm = false;

    Rng rng(derive_seed(seed, 300));
    Matrix W = gaussian_matrix(m, n, rng);
    Matrix X = gaussian_matrix(n, tokens, rng);

    GradcheckCase out;
    auto run = [&](auto& adapter) {
        // Non-zero B so every path carries gradient signal.
        adapter.B = gaussian_matrix(m, r, rng, 0.5);
        Matrix G = forward(adapter, X);
        GradientSet grads = backward(adapter, X, G);
        if (corrupt) grads.dA(0, 0) += 1e-3;
        out.per_group["dA"] = fd_max_rel_err(adapter, adapter.A, grads.dA, X, kStep);
        out.per_group["dB"] = fd_max_rel_err(adapter, adapter.B, grads.dB, X, kStep);
        if constexpr (std::is_same_v<std::decay_t<decltype(adapter)>, TopLoRAAdapter>) {
            out.per_group["dTheta"] =
                fd_max_rel_err(adapter, adapter.Theta, grads.dTheta, X, kStep);
        }
        out.per_group["dX"] = fd_max_rel_err(adapter, X, grads.dX, X, kStep);
    };

    if (variant == "lora") {
        LoRAAdapter adapter = init_lora(cfg, W);
        run(adapter);
    } else {
        TopLoRAAdapter adapter = init_toplora(cfg, W);
        run(adapter);
    }
    for (const auto& [group, err] : out.per_group.items()) {
        (void)group;
        out.max_err = std::max(out.max_err, err.get<double>());
    }
    return out;
}

}  // namespace

json load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return doc;
}

json command_section(const json& doc, const std::string& command) {
    check_keys(doc, {"gradcheck", "analyze", "train", "params", "sweep"}, "config document");
    if (!doc.contains(command)) {
        throw ConfigError("config document has no '" + command + "' section");
    }
    return doc.at(command);
}

CommandResult run_gradcheck(const json& config) {
    const auto start = std::chrono::steady_clock::now();
    const std::string where = "gradcheck config";
    check_keys(config,
               {"m", "n", "r", "tokens", "seeds", "variants", "tolerance", "corrupt_gradient"},
               where);
    const std::size_t m = static_cast<std::size_t>(as_u64_or(config, "m", where, 3));
    const std::size_t n = static_cast<std::size_t>(as_u64_or(config, "n", where, 4));
    const std::size_t r = static_cast<std::size_t>(as_u64_or(config, "r", where, 2));
    const std::size_t tokens = static_cast<std::size_t>(as_u64_or(config, "tokens", where, 3));
    const double tolerance = as_double_or(config, "tolerance", where, 1e-6);
    const bool corrupt = as_bool_or(config, "corrupt_gradient", where, false);
    std::vector<std::uint64_t> seeds = as_seed_list(config, "seeds", where);

    std::vector<std::string> variants = {"lora", "toplora", "toplora_no_exp",
                                         "toplora_no_rmsnorm"};
    if (config.contains("variants")) {
        variants.clear();
        for (const json& v : config.at("variants")) {
            const std::string name = v.get<std::string>();
            if (name != "lora" && name != "toplora" && name != "toplora_no_exp" &&
                name != "toplora_no_rmsnorm") {
                throw ConfigError("unknown variant '" + name + "' in " + where);
            }
            variants.push_back(name);
        }
        if (variants.empty()) throw ConfigError("variants must be non-empty in " + where);
    }

    json cases = json::array();
    double overall_max = 0.0;
    for (const std::string& variant : variants) {
        for (std::uint64_t seed : seeds) {
            GradcheckCase c = gradcheck_case(variant, seed, m, n, r, tokens, corrupt);
            json entry;
            entry["variant"] = variant;
            entry["seed"] = seed;
            entry["max_rel_err"] = c.max_err;
            entry["per_group"] = c.per_group;
            cases.push_back(std::move(entry));
            overall_max = std::max(overall_max, c.max_err);
        }
    }

    json results;
    results["cases"] = std::move(cases);
    results["max_rel_err"] = overall_max;
    results["tolerance"] = tolerance;
    results["pass"] = overall_max <= tolerance;

    CommandResult out;
    out.exit_code = overall_max <= tolerance ? kExitOk : kExitThreshold;
    out.report = finish_report("gradcheck", config, std::move(results), start);
    return out;
}

CommandResult run_analyze(const json& config, const std::string& weights_path) {
    const auto start = std::chrono::steady_clock::now();
    const std::string where = "analyze config";
    check_keys(config,
               {"m", "n", "r", "seed", "kind", "tokens", "random_b", "use_exp", "use_rmsnorm"},
               where);
    const std::uint64_t seed = as_u64_or(config, "seed", where, 0);
    const std::size_t tokens = static_cast<std::size_t>(as_u64_or(config, "tokens", where, 64));

    std::variant<LoRAAdapter, TopLoRAAdapter> adapter;
    if (!weights_path.empty()) {
        adapter = load_adapter(weights_path);
    } else {
        const std::size_t m = static_cast<std::size_t>(as_u64_or(config, "m", where, 16));
        const std::size_t n = static_cast<std::size_t>(as_u64_or(config, "n", where, 24));
        AdapterConfig cfg;
        cfg.rank = static_cast<std::size_t>(as_u64_or(config, "r", where, 4));
        cfg.dropout_rate = 0.0;
        cfg.use_exp = as_bool_or(config, "use_exp", where, true);
        cfg.use_rmsnorm = as_bool_or(config, "use_rmsnorm", where, true);
        cfg.seed = seed;
        Rng rng(derive_seed(seed, 400));
        Matrix W = gaussian_matrix(m, n, rng);
        const std::string kind = as_string_or(config, "kind", where, "toplora");
        if (kind == "lora") {
            LoRAAdapter a = init_lora(cfg, W);
            if (as_bool_or(config, "random_b", where, false))
                a.B = gaussian_matrix(m, cfg.rank, rng);
            adapter = std::move(a);
        } else if (kind == "toplora") {
            TopLoRAAdapter a = init_toplora(cfg, W);
            if (as_bool_or(config, "random_b", where, false))
                a.B = gaussian_matrix(m, cfg.rank, rng);
            adapter = std::move(a);
        } else {
            throw ConfigError("kind must be 'lora' or 'toplora' in " + where);
        }
    }

    const Matrix& A = std::holds_alternative<LoRAAdapter>(adapter)
                          ? std::get<LoRAAdapter>(adapter).A
                          : std::get<TopLoRAAdapter>(adapter).A;
    const Matrix& B = std::holds_alternative<LoRAAdapter>(adapter)
                          ? std::get<LoRAAdapter>(adapter).B
                          : std::get<TopLoRAAdapter>(adapter).B;
    const std::size_t n_dim = A.cols();

    json results;
    results["kind"] = std::holds_alternative<LoRAAdapter>(adapter) ? "lora" : "toplora";
    results["m"] = B.rows();
    results["n"] = n_dim;
    results["r"] = A.rows();

    Matrix delta = matmul(B, A);
    results["delta_w_rank"] = numerical_rank(delta);
    results["a_rank"] = numerical_rank(A);
    results["b_rank"] = numerical_rank(B);

    Rng token_rng(derive_seed(seed, 401));
    try {
        ProjectionAnalysis pa = decompose(A, B);
        json proj;
        proj["qa_orthonormality_residual"] = frobenius_norm(
            sub(matmul(pa.q_a, transpose(pa.q_a)), Matrix::identity(pa.q_a.rows())));
        proj["qb_orthonormality_residual"] = frobenius_norm(
            sub(matmul(transpose(pa.q_b), pa.q_b), Matrix::identity(pa.q_b.cols())));
        const Matrix recon = matmul(pa.q_b, matmul(pa.p, pa.q_a));
        proj["reconstruction_residual_rel"] =
            frobenius_norm(sub(recon, delta)) / std::max(1.0, frobenius_norm(delta));
        double eq5_worst = 0.0;
        for (int i = 0; i < 16; ++i) {
            Vector x = Vector(n_dim);
            for (std::size_t j = 0; j < n_dim; ++j) x[j] = token_rng.gaussian();
            Vector via = output_via_projection(pa, x);
            Vector direct = matvec(delta, x);
            double num = 0.0;
            for (std::size_t j = 0; j < via.size(); ++j) {
                const double d = via[j] - direct[j];
                num += d * d;
            }
            eq5_worst = std::max(eq5_worst,
                                 std::sqrt(num) / std::max(1.0, norm(direct)));
        }
        proj["path_identity_error_rel"] = eq5_worst;
        results["projection"] = std::move(proj);
    } catch (const FactorizationError& e) {
        results["projection"] = nullptr;
        results["projection_note"] = e.what();
    }

    if (std::holds_alternative<TopLoRAAdapter>(adapter)) {
        const TopLoRAAdapter& a = std::get<TopLoRAAdapter>(adapter);
        Matrix token_batch = gaussian_matrix(n_dim, std::max<std::size_t>(tokens, 2), token_rng);
        SigmaDispersion disp = sigma_dispersion(a, token_batch);
        json d;
        d["mean_log_sigma"] = disp.mean_log_sigma.data();
        d["std_log_sigma"] = disp.std_log_sigma.data();
        d["max_abs_dev_from_one"] = disp.max_abs_dev_from_one;
        double mean_std = 0.0;
        for (std::size_t i = 0; i < disp.std_log_sigma.size(); ++i)
            mean_std += disp.std_log_sigma[i];
        d["mean_std_log_sigma"] = mean_std / static_cast<double>(disp.std_log_sigma.size());
        results["dispersion"] = std::move(d);
    }

    CommandResult out;
    out.report = finish_report("analyze", config, std::move(results), start);
    return out;
}

namespace {

struct TrainJob {
    TeacherTaskSpec task;
    AdapterConfig adapter_cfg;
    long steps = 2000;
    std::size_t batch_size = 32;
    double lr = 1e-2;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> kinds = {"lora", "toplora"};
    long record_every = 100;
    std::string save_weights_prefix;
};

TrainJob parse_train_job(const json& config, const std::string& where, bool require_rank) {
    check_keys(config,
               {"task", "adapter", "steps", "batch_size", "lr", "seeds", "kinds",
                "record_every", "save_weights_prefix", "ranks"},
               where);
    TrainJob job;
    job.task = parse_task_spec(config.value("task", json::object()), where + ".task");
    job.adapter_cfg = parse_adapter_config(config.value("adapter", json::object()),
                                           where + ".adapter", require_rank);
    job.steps = static_cast<long>(as_u64_or(config, "steps", where, 2000));
    job.batch_size = static_cast<std::size_t>(as_u64_or(config, "batch_size", where, 32));
    job.lr = as_double_or(config, "lr", where, 1e-2);
    job.seeds = as_seed_list(config, "seeds", where);
    job.record_every = static_cast<long>(as_u64_or(config, "record_every", where, 100));
    job.save_weights_prefix = as_string_or(config, "save_weights_prefix", where, "");
    if (config.contains("kinds")) {
        job.kinds.clear();
        for (const json& k : config.at("kinds")) {
            const std::string name = k.get<std::string>();
            if (name != "lora" && name != "toplora") {
                throw ConfigError("unknown kind '" + name + "' in " + where);
            }
            job.kinds.push_back(name);
        }
        if (job.kinds.empty()) throw ConfigError("kinds must be non-empty in " + where);
    }
    return job;
}

json thin_trace(const RunMetrics& metrics, long record_every) {
    json trace = json::array();
    const long last = metrics.per_step.empty() ? 0 : metrics.per_step.back().first;
    for (const auto& [step, loss] : metrics.per_step) {
        if (step == 1 || step == last || (record_every > 0 && step % record_every == 0)) {
            trace.push_back(json::array({step, loss}));
        }
    }
    return trace;
}

// Runs every (kind, seed) pair of the job against its teacher task and
// returns per-run records plus per-kind median final eval losses.
json execute_train_job(const TrainJob& job) {
    TeacherData data = make_teacher_dataset(job.task);

    json runs = json::array();
    std::map<std::string, std::vector<double>> finals;
    for (const std::string& kind : job.kinds) {
        for (std::uint64_t seed : job.seeds) {
            AdapterConfig cfg = job.adapter_cfg;
            cfg.seed = seed;
            TrainOptions options;
            options.steps = job.steps;
            options.batch_size = job.batch_size;
            options.lr = job.lr;
            options.seed = seed;

            json record;
            record["kind"] = kind;
            record["seed"] = seed;
            try {
                if (kind == "lora") {
                    LoRAAdapter adapter = init_lora(cfg, data.teacher.W);
                    record["initial_eval_loss"] = evaluate(adapter, data.eval);
                    RunMetrics metrics = train(adapter, data.train, data.eval, options);
                    record["final_eval_loss"] = metrics.final_eval_loss;
                    record["loss_trace"] = thin_trace(metrics, job.record_every);
                    finals[kind].push_back(metrics.final_eval_loss);
                    if (!job.save_weights_prefix.empty()) {
                        save_adapter(job.save_weights_prefix + "_lora_" +
                                         std::to_string(seed) + ".tplw",
                                     adapter);
                    }
                } else {
                    TopLoRAAdapter adapter = init_toplora(cfg, data.teacher.W);
                    record["initial_eval_loss"] = evaluate(adapter, data.eval);
                    RunMetrics metrics = train(adapter, data.train, data.eval, options);
                    record["final_eval_loss"] = metrics.final_eval_loss;
                    record["loss_trace"] = thin_trace(metrics, job.record_every);
                    finals[kind].push_back(metrics.final_eval_loss);
                    if (!job.save_weights_prefix.empty()) {
                        save_adapter(job.save_weights_prefix + "_toplora_" +
                                         std::to_string(seed) + ".tplw",
                                     adapter);
                    }
                }
                record["diverged"] = false;
            } catch (const DivergenceError& e) {
                record["diverged"] = true;
                record["divergence_step"] = e.step();
            }
            runs.push_back(std::move(record));
        }
    }

    json summary;
    for (const auto& [kind, values] : finals) {
        summary[kind + "_median_final_eval_loss"] = median(values);
    }
    json results;
    results["runs"] = std::move(runs);
    results["summary"] = std::move(summary);
    return results;
}

}  // namespace

CommandResult run_train(const json& config) {
    const auto start = std::chrono::steady_clock::now();
    if (config.contains("ranks")) {
        throw ConfigError("unknown key 'ranks' in train config (use the sweep command)");
    }
    TrainJob job = parse_train_job(config, "train config", true);
    json results = execute_train_job(job);

    CommandResult out;
    out.report = finish_report("train", config, std::move(results), start);
    return out;
}

CommandResult run_sweep(const json& config) {
    const auto start = std::chrono::steady_clock::now();
    const std::string where = "sweep config";
    TrainJob base = parse_train_job(config, where, false);
    if (!config.contains("ranks")) throw ConfigError("missing key 'ranks' in " + where);
    std::vector<std::size_t> ranks;
    for (const json& r : config.at("ranks")) {
        if (!r.is_number_integer() && !r.is_number_unsigned()) {
            throw ConfigError("ranks must be integers in " + where);
        }
        ranks.push_back(r.get<std::size_t>());
    }
    if (ranks.empty()) throw ConfigError("ranks must be non-empty in " + where);

    json table = json::array();
    for (std::size_t rank : ranks) {
        TrainJob job = base;
        job.adapter_cfg.rank = rank;
        job.adapter_cfg.alpha = 0.0;  // keep alpha = 2r across the sweep
        json row;
        row["rank"] = rank;
        json results = execute_train_job(job);
        row["summary"] = results.at("summary");
        row["runs"] = results.at("runs");
        table.push_back(std::move(row));
    }

    json results;
    results["table"] = std::move(table);

    CommandResult out;
    out.report = finish_report("sweep", config, std::move(results), start);
    return out;
}

CommandResult run_params(const json& config) {
    const auto start = std::chrono::steady_clock::now();
    const std::string where = "params config";
    check_keys(config, {"m", "n", "r", "modules", "kind"}, where);
    const std::uint64_t m = as_u64(config, "m", where);
    const std::uint64_t n = as_u64(config, "n", where);
    const std::uint64_t r = as_u64(config, "r", where);
    const std::uint64_t modules = as_u64_or(config, "modules", where, 1);

    const std::uint64_t lora = param_count(Kind::lora, m, n, r, modules);
    const std::uint64_t toplora = param_count(Kind::toplora, m, n, r, modules);

    json results;
    results["lora_params"] = lora;
    results["toplora_params"] = toplora;
    results["toplora_over_lora_ratio"] =
        static_cast<double>(toplora) / static_cast<double>(lora);
    if (config.contains("kind")) {
        const std::string kind = config.at("kind").get<std::string>();
        if (kind == "lora") {
            results["params"] = lora;
        } else if (kind == "toplora") {
            results["params"] = toplora;
        } else {
            throw ConfigError("kind must be 'lora' or 'toplora' in " + where);
        }
    }

    CommandResult out;
    out.report = finish_report("params", config, std::move(results), start);
    return out;
}

}  // namespace toplora::cli
