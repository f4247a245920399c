#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "geogns/geometry.hpp"
#include "geogns/tensor.hpp"

namespace geogns::optim {

enum class OptimizerKind { Sgd, Msgd, SignSgd, Signum, SpecSgd, Muon, AdamW };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

// Geometry whose steepest-descent direction the optimizer follows.
geometry::GeometryKind natural_geometry(OptimizerKind kind);
bool requires_matrix(OptimizerKind kind);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::SignSgd;
    double lr = 1e-3;
    double momentum = 0.95;  // MSGD / Signum / Muon
    double beta1 = 0.9;      // AdamW
    double beta2 = 0.999;    // AdamW
    double epsilon = 1e-8;   // AdamW
    double weight_decay = 0.0;
    int ns_iterations = geometry::kDefaultNewtonSchulzIterations;

    void validate() const;
};

struct OptimizerState {
    Matrix momentum;       // m (MSGD, Signum, Muon), first moment (AdamW)
    Matrix second_moment;  // AdamW
    std::uint64_t steps = 0;
};

OptimizerState make_state(const Matrix& param);

// Each step first applies decoupled weight decay x <- x (1 - step_size * lambda),
// then moves along the optimizer's direction. step_size is omega * eta.
void sgd_step(Matrix& x, const Matrix& g, OptimizerState& state, const OptimizerConfig& config,
              double step_size);
void msgd_step(Matrix& x, const Matrix& g, OptimizerState& state, const OptimizerConfig& config,
               double step_size);
void signsgd_step(Matrix& x, const Matrix& g, OptimizerState& state,
                  const OptimizerConfig& config, double step_size);
void signum_step(Matrix& x, const Matrix& g, OptimizerState& state,
                 const OptimizerConfig& config, double step_size);
void specsgd_step(Matrix& x, const Matrix& g, OptimizerState& state,
                  const OptimizerConfig& config, double step_size);
void muon_step(Matrix& x, const Matrix& g, OptimizerState& state, const OptimizerConfig& config,
               double step_size);
void adamw_step(Matrix& x, const Matrix& g, OptimizerState& state, const OptimizerConfig& config,
                double step_size);

// Dispatch on config.kind.
void apply_step(Matrix& x, const Matrix& g, OptimizerState& state, const OptimizerConfig& config,
                double step_size);

// Optimizer per parameter shape: matrix groups and vector groups may use
// different rules (e.g. Muon for 2-D weights, AdamW for biases).
struct OptimizerAssignment {
    std::optional<OptimizerConfig> matrix;
    std::optional<OptimizerConfig> vector;
};

class CompositeOptimizer {
public:
    // Throws InvalidArgument if a group has no optimizer, or a matrix-only
    // rule is assigned to vector groups.
    CompositeOptimizer(const Params& params, OptimizerAssignment assignment);

    // Every group moves with step size multiplier * config.lr * lr_scale.
    void step(Params& params, const Tensors& grads, double lr_scale, double multiplier);

    const OptimizerConfig& config_for(std::size_t group) const { return configs_.at(group); }
    std::size_t size() const { return configs_.size(); }

private:
    std::vector<OptimizerConfig> configs_;
    std::vector<OptimizerState> states_;
};

}  // namespace geogns::optim
