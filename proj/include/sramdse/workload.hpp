#pragma once

// Matmul traces for one transformer layer stack: prefill over the whole
// prompt and single-token decode steps against a growing KV cache. Only the
// five GEMM-heavy sublayers are emitted; softmax, norms and residuals are
// left out.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sramdse {

using count_t = std::uint64_t;

class model_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ModelSpec {
    count_t d_model = 12288;
    count_t n_heads = 96;
    count_t head_dim = 128;
    count_t mlp_ratio = 4;
    count_t bytes_per_element = 2;
    count_t n_layers = 1;

    [[nodiscard]] count_t mlp_dim() const { return mlp_ratio * d_model; }

    void validate() const {
        if (d_model == 0 || n_heads == 0 || head_dim == 0 || mlp_ratio == 0 ||
            bytes_per_element == 0 || n_layers == 0)
            throw model_error("model: all fields must be positive");
        if (n_heads * head_dim != d_model)
            throw model_error("model: n_heads * head_dim must equal d_model");
    }

    /// Bytes of weights read by one pass over all layers.
    [[nodiscard]] count_t weight_bytes() const {
        const count_t per_layer = d_model * 3 * d_model + 2 * d_model * mlp_dim();
        return per_layer * n_layers * bytes_per_element;
    }
};

struct InferenceRequest {
    count_t batch = 8;
    count_t prompt_len = 2048;
    count_t gen_tokens = 128;

    void validate() const {
        if (batch == 0) throw model_error("request: batch must be >= 1");
        if (prompt_len == 0) throw model_error("request: prompt_len must be >= 1");
    }
};

struct MatmulDims {
    count_t M = 1;
    count_t K = 1;
    count_t N = 1;
    bool weight_resident = true;

    void validate() const {
        if (M == 0 || K == 0 || N == 0) throw model_error("matmul: M, K, N must be >= 1");
    }

    friend bool operator==(const MatmulDims&, const MatmulDims&) = default;
};

[[nodiscard]] constexpr count_t flops_of(const MatmulDims& m) { return 2 * m.M * m.K * m.N; }

enum class Sublayer { QkvProjection, AttentionScore, AttentionOutput, MlpUp, MlpDown };

inline constexpr std::array<Sublayer, 5> kSublayers = {
    Sublayer::QkvProjection, Sublayer::AttentionScore, Sublayer::AttentionOutput,
    Sublayer::MlpUp, Sublayer::MlpDown};

constexpr std::string_view to_string(Sublayer s) {
    switch (s) {
        case Sublayer::QkvProjection: return "qkv";
        case Sublayer::AttentionScore: return "attn_score";
        case Sublayer::AttentionOutput: return "attn_output";
        case Sublayer::MlpUp: return "mlp_up";
        case Sublayer::MlpDown: return "mlp_down";
    }
    return "?";
}

/// One sublayer GEMM shape and how many identical instances of it run
/// (batch x heads for attention, times the layer count).
struct TraceEntry {
    Sublayer sublayer;
    MatmulDims dims;
    count_t repeat = 1;

    [[nodiscard]] count_t flops() const { return flops_of(dims) * repeat; }
};

enum class Phase { Prefill, DecodeStep };

constexpr std::string_view to_string(Phase p) {
    return p == Phase::Prefill ? "prefill" : "decode";
}

struct PhaseTrace {
    Phase phase = Phase::Prefill;
    count_t kv_len = 0;
    std::vector<TraceEntry> matmuls;

    [[nodiscard]] count_t total_flops() const {
        count_t f = 0;
        for (const auto& e : matmuls) f += e.flops();
        return f;
    }

    [[nodiscard]] const TraceEntry& entry(Sublayer s) const {
        for (const auto& e : matmuls)
            if (e.sublayer == s) return e;
        throw std::out_of_range("trace has no sublayer " + std::string(to_string(s)));
    }
};

namespace detail {

inline PhaseTrace layer_trace(const ModelSpec& model, Phase phase, count_t rows, count_t q_len,
                              count_t kv_len, count_t batch) {
    const count_t L = model.n_layers;
    const count_t heads = batch * model.n_heads * L;
    PhaseTrace t;
    t.phase = phase;
    t.kv_len = kv_len;
    t.matmuls = {
        {Sublayer::QkvProjection, {rows, model.d_model, 3 * model.d_model, true}, L},
        {Sublayer::AttentionScore, {q_len, model.head_dim, kv_len, false}, heads},
        {Sublayer::AttentionOutput, {q_len, kv_len, model.head_dim, false}, heads},
        {Sublayer::MlpUp, {rows, model.d_model, model.mlp_dim(), true}, L},
        {Sublayer::MlpDown, {rows, model.mlp_dim(), model.d_model, true}, L},
    };
    return t;
}

}  // namespace detail

inline PhaseTrace build_prefill_trace(const ModelSpec& model, const InferenceRequest& req) {
    model.validate();
    req.validate();
    return detail::layer_trace(model, Phase::Prefill, req.batch * req.prompt_len, req.prompt_len,
                               req.prompt_len, req.batch);
}

inline PhaseTrace build_decode_trace(const ModelSpec& model, const InferenceRequest& req,
                                     count_t step) {
    model.validate();
    req.validate();
    if (step >= req.gen_tokens)
        throw model_error("decode step " + std::to_string(step) + " out of range [0, " +
                          std::to_string(req.gen_tokens) + ")");
    return detail::layer_trace(model, Phase::DecodeStep, req.batch, 1, req.prompt_len + step,
                               req.batch);
}

}  // namespace sramdse
