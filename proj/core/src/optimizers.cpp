#include "geogns/optimizers.hpp"

#include <cmath>
#include <string>

#include "geogns/errors.hpp"

namespace geogns::optim {

namespace {

void check_shapes(const Matrix& x, const Matrix& g, const char* what) {
    if (x.rows() != g.rows() || x.cols() != g.cols()) {
        throw InvalidArgument(std::string(what) + ": gradient shape differs from parameter");
    }
}

void ensure_buffer(Matrix& buffer, const Matrix& like) {
    if (buffer.rows() != like.rows() || buffer.cols() != like.cols()) {
        buffer = Matrix::Zero(like.rows(), like.cols());
    }
}

void decay(Matrix& x, const OptimizerConfig& config, double step_size) {
    if (config.weight_decay != 0.0) x *= (1.0 - step_size * config.weight_decay);
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::Sgd: return "sgd";
        case OptimizerKind::Msgd: return "msgd";
        case OptimizerKind::SignSgd: return "signsgd";
        case OptimizerKind::Signum: return "signum";
        case OptimizerKind::SpecSgd: return "specsgd";
        case OptimizerKind::Muon: return "muon";
        case OptimizerKind::AdamW: return "adamw";
    }
    return "unknown";
}

OptimizerKind parse_optimizer(std::string_view name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "msgd") return OptimizerKind::Msgd;
    if (name == "signsgd") return OptimizerKind::SignSgd;
    if (name == "signum") return OptimizerKind::Signum;
    if (name == "specsgd") return OptimizerKind::SpecSgd;
    if (name == "muon") return OptimizerKind::Muon;
    if (name == "adamw") return OptimizerKind::AdamW;
    throw InvalidArgument("unknown optimizer '" + std::string(name) + "'");
}

geometry::GeometryKind natural_geometry(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::SignSgd:
        case OptimizerKind::Signum:
        case OptimizerKind::AdamW: return geometry::GeometryKind::SignLinf;
        case OptimizerKind::SpecSgd:
        case OptimizerKind::Muon: return geometry::GeometryKind::SpectralSinf;
        case OptimizerKind::Sgd:
        case OptimizerKind::Msgd: return geometry::GeometryKind::Euclidean;
    }
    return geometry::GeometryKind::Euclidean;
}

bool requires_matrix(OptimizerKind kind) {
    return kind == OptimizerKind::SpecSgd || kind == OptimizerKind::Muon;
}

void OptimizerConfig::validate() const {
    if (!(lr >= 0.0)) throw InvalidArgument("lr must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw InvalidArgument("AdamW betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
    if (!(weight_decay >= 0.0)) throw InvalidArgument("weight_decay must be >= 0");
    if (ns_iterations < 1) throw InvalidArgument("ns_iterations must be >= 1");
}

OptimizerState make_state(const Matrix& param) {
    OptimizerState s;
    s.momentum = Matrix::Zero(param.rows(), param.cols());
    return s;
}

void sgd_step(Matrix& x, const Matrix& g, OptimizerState& state, const OptimizerConfig& config,
              double step_size) {
    check_shapes(x, g, "sgd_step");
    decay(x, config, step_size);
    x -= step_size * g;
    ++state.steps;
}

void msgd_step(Matrix& x, const Matrix& g, OptimizerState& state, const OptimizerConfig& config,
               double step_size) {
    check_shapes(x, g, "msgd_step");
    ensure_buffer(state.momentum, x);
    state.momentum = config.momentum * state.momentum + g;
    decay(x, config, step_size);
    x -= step_size * state.momentum;
    ++state.steps;
}

void signsgd_step(Matrix& x, const Matrix& g, OptimizerState& state,
                  const OptimizerConfig& config, double step_size) {
    check_shapes(x, g, "signsgd_step");
    decay(x, config, step_size);
    x -= step_size * geometry::sign_direction(g).values;
    ++state.steps;
}

void signum_step(Matrix& x, const Matrix& g, OptimizerState& state,
                 const OptimizerConfig& config, double step_size) {
    check_shapes(x, g, "signum_step");
    ensure_buffer(state.momentum, x);
    state.momentum = config.momentum * state.momentum + (1.0 - config.momentum) * g;
    decay(x, config, step_size);
    x -= step_size * geometry::sign_direction(state.momentum).values;
    ++state.steps;
}

void specsgd_step(Matrix& x, const Matrix& g, OptimizerState& state,
                  const OptimizerConfig& config, double step_size) {
    check_shapes(x, g, "specsgd_step");
    const Matrix direction = geometry::matsign_exact(g).values;
    decay(x, config, step_size);
    x -= step_size * direction;
    ++state.steps;
}

void muon_step(Matrix& x, const Matrix& g, OptimizerState& state, const OptimizerConfig& config,
               double step_size) {
    check_shapes(x, g, "muon_step");
    ensure_buffer(state.momentum, x);
    state.momentum = config.momentum * state.momentum + (1.0 - config.momentum) * g;
    const Matrix direction =
        geometry::matsign_newton_schulz(state.momentum, config.ns_iterations).values;
    decay(x, config, step_size);
    x -= step_size * direction;
    ++state.steps;
}

void adamw_step(Matrix& x, const Matrix& g, OptimizerState& state, const OptimizerConfig& config,
                double step_size) {
    check_shapes(x, g, "adamw_step");
    ensure_buffer(state.momentum, x);
    ensure_buffer(state.second_moment, x);
    ++state.steps;
    const auto t = static_cast<double>(state.steps);
    state.momentum = config.beta1 * state.momentum + (1.0 - config.beta1) * g;
    state.second_moment = config.beta2 * state.second_moment + (1.0 - config.beta2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    decay(x, config, step_size);
    x.array() -= step_size * (state.momentum.array() / c1) /
                 ((state.second_moment.array() / c2).sqrt() + config.epsilon);
}

void apply_step(Matrix& x, const Matrix& g, OptimizerState& state, const OptimizerConfig& config,
                double step_size) {
    switch (config.kind) {
        case OptimizerKind::Sgd: return sgd_step(x, g, state, config, step_size);
        case OptimizerKind::Msgd: return msgd_step(x, g, state, config, step_size);
        case OptimizerKind::SignSgd: return signsgd_step(x, g, state, config, step_size);
        case OptimizerKind::Signum: return signum_step(x, g, state, config, step_size);
        case OptimizerKind::SpecSgd: return specsgd_step(x, g, state, config, step_size);
        case OptimizerKind::Muon: return muon_step(x, g, state, config, step_size);
        case OptimizerKind::AdamW: return adamw_step(x, g, state, config, step_size);
    }
}

CompositeOptimizer::CompositeOptimizer(const Params& params, OptimizerAssignment assignment) {
    for (const auto& group : params) {
        const auto& chosen =
            group.shape == ParamShape::Matrix ? assignment.matrix : assignment.vector;
        if (!chosen) {
            throw InvalidArgument("no optimizer assigned to parameter group '" + group.name + "'");
        }
        chosen->validate();
        if (group.shape == ParamShape::Vector && requires_matrix(chosen->kind)) {
            throw InvalidArgument(std::string(to_string(chosen->kind)) +
                                  " cannot update vector group '" + group.name + "'");
        }
        configs_.push_back(*chosen);
        states_.push_back(make_state(group.value));
    }
}

void CompositeOptimizer::step(Params& params, const Tensors& grads, double lr_scale,
                              double multiplier) {
    if (params.size() != configs_.size() || grads.size() != configs_.size()) {
        throw InvalidArgument("CompositeOptimizer: group count mismatch");
    }
    for (std::size_t i = 0; i < configs_.size(); ++i) {
        const double step_size = multiplier * configs_[i].lr * lr_scale;
        apply_step(params[i].value, grads[i], states_[i], configs_[i], step_size);
    }
}

}  // namespace geogns::optim
