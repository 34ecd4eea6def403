#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "sqf/chess/position.hpp"
#include "sqf/data/example.hpp"
#include "sqf/model/model.hpp"

namespace sqf::eval {

enum class Strategy { PolicyArgmax, ValueMax };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

// Position evaluator for the mover of states.back(); the two ints are the
// (active, opponent) rating pair of that mover.
using Evaluator =
    std::function<model::EvalResult(std::span<const chess::Position>, int, int)>;

Evaluator model_evaluator(const model::Parameters& params);

// A playing identity: model, move-selection rule, and the rating pair fed to
// the conditioning embeddings (ignored by engine-mode models). A set
// evaluator overrides params.
struct Agent {
  const model::Parameters* params = nullptr;
  Evaluator evaluator;
  Strategy strategy = Strategy::PolicyArgmax;
  int self_rating = 2000;
  int opponent_rating = 2000;
  std::string name;
};

Evaluator agent_evaluator(const Agent& agent);

// Inference input for the mover of states.back(): the canonical board stack
// over the trailing game history, with target fields left empty.
data::TrainingExample observation(std::span<const chess::Position> states,
                                  int history, int active_rating,
                                  int opponent_rating);

// Move choice in the absolute frame of states.back(). PolicyArgmax takes the
// top legal move of the masked policy; ValueMax evaluates every child and
// keeps the move minimizing the opponent's expected score. Ties break toward
// the lowest canonical move encoding. Throws ShapeError on a terminal
// position.
chess::Move select_move_with(const Evaluator& eval, Strategy strategy,
                             std::span<const chess::Position> states,
                             int self_rating, int opponent_rating);
chess::Move select_move(const Agent& agent,
                        std::span<const chess::Position> states);
chess::Move select_move(const Agent& agent, const chess::Position& p);

// Forward passes charged per move decision: PolicyArgmax evaluates once,
// ValueMax once per child, budgeted at a flat 20 legal moves. The overload
// charges an exact move count instead.
inline constexpr int kValueMaxBranching = 20;

int64_t agent_flops(const Agent& agent);
int64_t agent_flops(const Agent& agent, int legal_count);

}  // namespace sqf::eval
