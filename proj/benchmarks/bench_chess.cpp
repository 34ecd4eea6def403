#include <benchmark/benchmark.h>

#include "sqf/chess/canonical.hpp"
#include "sqf/chess/position.hpp"

using namespace sqf::chess;

static void BM_LegalMovesStart(benchmark::State& state) {
  Position p = Position::startpos();
  for (auto _ : state) benchmark::DoNotOptimize(p.legal_moves());
}
BENCHMARK(BM_LegalMovesStart);

static void BM_LegalMovesMiddlegame(benchmark::State& state) {
  Position p = Position::from_fen(
      "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1");
  for (auto _ : state) benchmark::DoNotOptimize(p.legal_moves());
}
BENCHMARK(BM_LegalMovesMiddlegame);

static void BM_ApplyMove(benchmark::State& state) {
  Position p = Position::startpos();
  Move m = Move::parse_uci("e2e4");
  for (auto _ : state) benchmark::DoNotOptimize(p.apply_unchecked(m));
}
BENCHMARK(BM_ApplyMove);

static void BM_Perft3(benchmark::State& state) {
  Position p = Position::startpos();
  for (auto _ : state) benchmark::DoNotOptimize(perft(p, 3));
}
BENCHMARK(BM_Perft3);

static void BM_Canonicalize(benchmark::State& state) {
  Position p = Position::from_fen(
      "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R b KQkq - 0 1");
  for (auto _ : state) benchmark::DoNotOptimize(canonicalize(p));
}
BENCHMARK(BM_Canonicalize);

BENCHMARK_MAIN();
