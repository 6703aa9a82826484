#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

#include "autex/indexer.hpp"
#include "autex/text.hpp"

using namespace autex;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Synthetic dictionary of n plain and gapped entries over a small lexicon.
std::vector<CompiledEntry> synthetic_apd(std::size_t n) {
  static const std::vector<std::string> lexicon = {"neutrino", "mass", "photon",  "axion",    "decay", "plasma",
                                                   "magnetic", "field", "lepton", "symmetry", "solar", "oscillation"};
  std::mt19937 rng(42);
  std::vector<CompiledEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string a = lexicon[rng() % lexicon.size()] + " " + lexicon[rng() % lexicon.size()];
    std::string b = lexicon[rng() % lexicon.size()] + "s?[ \\w]+" + lexicon[rng() % lexicon.size()];
    out.push_back(compile_entry({"b" + std::to_string(i), {a, b}, {parse_keychain("k")}, {}}));
  }
  return out;
}

const TextSlice& eprint_fulltext() {
  static const auto parts = extract_parts(slurp(AUTEX_FIXTURES "/texprep/autex_eprint.tex"), {Pointer::FullText});
  return parts.of(Pointer::FullText).at(0);
}

void BM_MatchSerial(benchmark::State& state) {
  const auto apd = synthetic_apd(state.range(0));
  const auto& slice = eprint_fulltext();
  for (auto _ : state) benchmark::DoNotOptimize(match_slice_serial(apd, slice));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MatchParallel(benchmark::State& state) {
  const auto apd = synthetic_apd(state.range(0));
  const auto& slice = eprint_fulltext();
  for (auto _ : state) benchmark::DoNotOptimize(match_slice_parallel(apd, slice));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::vector<IndexRequest> appendix_requests(std::size_t copies) {
  static const auto snap = ApdSnapshot::build(parse_apd(slurp(AUTEX_FIXTURES "/apd/hep.apd")));
  const auto tex = slurp(AUTEX_FIXTURES "/texprep/autex_eprint.tex");
  std::vector<IndexRequest> out;
  for (std::size_t i = 0; i < copies; ++i)
    out.push_back({"doc" + std::to_string(i), tex, {Pointer::FullText}, snap});
  return out;
}

void BM_BatchSerial(benchmark::State& state) {
  const auto reqs = appendix_requests(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(index_batch_serial(reqs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchParallel(benchmark::State& state) {
  const auto reqs = appendix_requests(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(index_batch(reqs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_MatchSerial)->Arg(50)->Arg(400);
BENCHMARK(BM_MatchParallel)->Arg(50)->Arg(400);
BENCHMARK(BM_BatchSerial)->Arg(8);
BENCHMARK(BM_BatchParallel)->Arg(8);

BENCHMARK_MAIN();
