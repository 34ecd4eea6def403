#include "sqf/eval/agent.hpp"

#include <algorithm>
#include <vector>

#include "sqf/common/error.hpp"

namespace sqf::eval {

const char* to_string(Strategy s) {
  return s == Strategy::PolicyArgmax ? "policy" : "value";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "policy") return Strategy::PolicyArgmax;
  if (s == "value") return Strategy::ValueMax;
  throw ParseError("unknown strategy '" + s + "'");
}

data::TrainingExample observation(std::span<const chess::Position> states,
                                  int history, int active_rating,
                                  int opponent_rating) {
  if (states.empty()) throw ShapeError("observation: empty game trail");
  const int last = static_cast<int>(states.size()) - 1;
  const chess::Position& current = states[last];
  const chess::Color mover = current.side_to_move();

  data::TrainingExample ex;
  ex.boards.reserve(history + 1);
  ex.repetition.reserve(history + 1);
  for (int i = 0; i <= history; ++i) {
    const int src = std::max(0, last - i);
    ex.boards.push_back(chess::canonicalize(states[src], mover));
    ex.repetition.push_back(states[src].repetition_count() >= 2 ? 1 : 0);
  }

  const auto castle = chess::canonical_castling(current);
  std::copy(castle.begin(), castle.end(), ex.castling.begin());
  ex.black_to_move = mover == chess::Color::Black;
  ex.halfmove_clock = current.halfmove_clock();
  ex.active_rating = active_rating;
  ex.opponent_rating = opponent_rating;
  ex.ply = last;

  for (const chess::Move& m : legal_moves(current))
    ex.legal.push_back(chess::canonical_move(current, m));
  return ex;
}

Evaluator model_evaluator(const model::Parameters& params) {
  return [&params](std::span<const chess::Position> states, int active,
                   int opponent) {
    const auto ex =
        observation(states, params.config().history, active, opponent);
    return model::evaluate(params, ex);
  };
}

Evaluator agent_evaluator(const Agent& agent) {
  if (agent.evaluator) return agent.evaluator;
  if (!agent.params)
    throw ShapeError("agent '" + agent.name + "' has no model");
  return model_evaluator(*agent.params);
}

chess::Move select_move_with(const Evaluator& eval, Strategy strategy,
                             std::span<const chess::Position> states,
                             int self_rating, int opponent_rating) {
  if (states.empty()) throw ShapeError("select_move: empty game trail");
  const chess::Position& p = states.back();
  const auto legal = legal_moves(p);
  if (legal.empty()) throw ShapeError("select_move: terminal position");

  std::vector<chess::Move> canon;
  canon.reserve(legal.size());
  for (const chess::Move& m : legal) canon.push_back(chess::canonical_move(p, m));

  size_t best = 0;
  if (strategy == Strategy::PolicyArgmax) {
    const auto out = eval(states, self_rating, opponent_rating);
    const auto probs = model::masked_policy(out.policy, canon);
    for (size_t i = 1; i < probs.size(); ++i)
      if (probs[i] > probs[best] ||
          (probs[i] == probs[best] &&
           canon[i].encoding() < canon[best].encoding()))
        best = i;
    return legal[best];
  }

  std::vector<chess::Position> trail(states.begin(), states.end());
  double best_score = 0.0;
  int best_key = 0;
  for (size_t i = 0; i < legal.size(); ++i) {
    trail.push_back(p.apply(legal[i]));
    // The child is the opponent's position, so their rating pair leads.
    const auto out = eval(trail, opponent_rating, self_rating);
    trail.pop_back();
    const double score = 1.0 - out.value.expected_score();
    const int key = canon[i].encoding();
    if (i == 0 || score > best_score ||
        (score == best_score && key < best_key)) {
      best = i;
      best_score = score;
      best_key = key;
    }
  }
  return legal[best];
}

chess::Move select_move(const Agent& agent,
                        std::span<const chess::Position> states) {
  return select_move_with(agent_evaluator(agent), agent.strategy, states,
                          agent.self_rating, agent.opponent_rating);
}

chess::Move select_move(const Agent& agent, const chess::Position& p) {
  return select_move(agent, std::span<const chess::Position>(&p, 1));
}

int64_t agent_flops(const Agent& agent) {
  return agent_flops(agent, kValueMaxBranching);
}

int64_t agent_flops(const Agent& agent, int legal_count) {
  if (!agent.params)
    throw ShapeError("agent '" + agent.name + "' has no model");
  const int64_t f = model::count_flops(agent.params->config());
  return agent.strategy == Strategy::ValueMax ? legal_count * f : f;
}

}  // namespace sqf::eval
