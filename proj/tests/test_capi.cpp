#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rlsearch.h"

namespace fs = std::filesystem;

TEST_CASE("c api reports version and status names") {
  CHECK(std::string(rls_version()).find("rlsearch") != std::string::npos);
  CHECK(std::string(rls_status_name(RLS_OK)) == "ok");
  CHECK(std::string(rls_status_name(RLS_ERR_PARSE)) == "parse-error");
}

TEST_CASE("c api end-to-end: generate, initial, solve, exact gap") {
  rls_instance* inst = nullptr;
  REQUIRE(rls_instance_generate(RLS_PROBLEM_TSP, 10, 0, 42, &inst) == RLS_OK);
  CHECK(rls_instance_kind(inst) == RLS_PROBLEM_TSP);
  CHECK(rls_instance_customers(inst) == 10);
  CHECK(rls_instance_locations(inst) == 10);

  char id[64];
  CHECK(rls_instance_id(inst, id, sizeof(id)) > 0);
  CHECK(std::string(id) == "tsp10-s42");

  rls_solution* initial = nullptr;
  REQUIRE(rls_solution_initial(inst, RLS_INITIAL_DEFAULT, 0, 7, &initial) == RLS_OK);
  CHECK(rls_solution_len(initial) == 10);
  double initial_cost = 0;
  REQUIRE(rls_solution_cost(inst, initial, &initial_cost) == RLS_OK);
  CHECK(initial_cost > 0);

  rls_solve_options opts;
  rls_solve_options_default(&opts);
  opts.policy_type = RLS_POLICY_BEST_IMPROVEMENT;
  opts.step_limit = 200;
  opts.seed = 3;
  rls_solution* best = nullptr;
  rls_solve_stats stats;
  REQUIRE(rls_solve(inst, initial, nullptr, &opts, nullptr, nullptr, &best, &stats) == RLS_OK);
  CHECK(stats.best_cost <= initial_cost + 1e-12);
  CHECK(stats.initial_cost == doctest::Approx(initial_cost));

  double exact_cost = 0;
  std::vector<int> tour(10);
  REQUIRE(rls_exact_tsp(inst, &exact_cost, tour.data(), 10) == RLS_OK);
  CHECK(stats.best_cost >= exact_cost - 1e-9);
  CHECK(stats.best_cost <= exact_cost * 1.2);  // 200 best-improvement steps get close on n=10

  rls_solution_free(best);
  rls_solution_free(initial);
  rls_instance_free(inst);
}

TEST_CASE("c api trace callback streams monotone incumbents") {
  rls_instance* inst = nullptr;
  REQUIRE(rls_instance_generate(RLS_PROBLEM_TSP, 8, 0, 9, &inst) == RLS_OK);
  rls_solve_options opts;
  rls_solve_options_default(&opts);
  opts.step_limit = 50;
  struct trace_state {
    long rows = 0;
    double last_incumbent = 1e300;
    bool monotone = true;
  } tstate;
  const auto cb = [](long, double, double incumbent, void* user) {
    auto* ts = static_cast<trace_state*>(user);
    ts->monotone &= incumbent <= ts->last_incumbent + 1e-12;
    ts->last_incumbent = incumbent;
    ++ts->rows;
    return 0;
  };
  rls_solution* best = nullptr;
  REQUIRE(rls_solve(inst, nullptr, nullptr, &opts, cb, &tstate, &best, nullptr) == RLS_OK);
  CHECK(tstate.rows == 51);  // initial row plus one per step
  CHECK(tstate.monotone);
  rls_solution_free(best);
  rls_instance_free(inst);
}

TEST_CASE("c api policies: init, save, load, learned solve, multi-policy") {
  const fs::path path = fs::temp_directory_path() / "rlsearch_capi_policy.ckpt";
  rls_policy* policy = nullptr;
  REQUIRE(rls_policy_init(RLS_PROBLEM_TSP, 16, 5, &policy) == RLS_OK);
  CHECK(rls_policy_problem(policy) == RLS_PROBLEM_TSP);
  CHECK(rls_policy_epoch(policy) == 0);
  REQUIRE(rls_policy_save(policy, path.string().c_str()) == RLS_OK);

  rls_policy* loaded = nullptr;
  REQUIRE(rls_policy_load(path.string().c_str(), &loaded) == RLS_OK);

  rls_instance* inst = nullptr;
  REQUIRE(rls_instance_generate(RLS_PROBLEM_TSP, 8, 0, 77, &inst) == RLS_OK);
  rls_solve_options opts;
  rls_solve_options_default(&opts);
  opts.policy_type = RLS_POLICY_LEARNED;
  opts.step_limit = 60;
  opts.seed = 1;

  rls_solution* a = nullptr;
  rls_solution* b = nullptr;
  rls_solve_stats sa, sb;
  REQUIRE(rls_solve(inst, nullptr, policy, &opts, nullptr, nullptr, &a, &sa) == RLS_OK);
  REQUIRE(rls_solve(inst, nullptr, loaded, &opts, nullptr, nullptr, &b, &sb) == RLS_OK);
  CHECK(sa.best_cost == sb.best_cost);  // identical checkpoint, seed and path

  // learned solve without a checkpoint is a config error
  rls_solution* c = nullptr;
  CHECK(rls_solve(inst, nullptr, nullptr, &opts, nullptr, nullptr, &c, nullptr) == RLS_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(rls_last_error()) > 0);

  const rls_policy* pols[2] = {policy, loaded};
  rls_solution* mp = nullptr;
  rls_solve_stats smp;
  REQUIRE(rls_solve_multi_policy(inst, nullptr, pols, 2, &opts, &mp, &smp) == RLS_OK);
  CHECK(smp.best_cost <= sa.best_cost + 1e-12);

  rls_solution_free(a);
  rls_solution_free(b);
  rls_solution_free(mp);
  rls_instance_free(inst);
  rls_policy_free(policy);
  rls_policy_free(loaded);
  fs::remove(path);
}

TEST_CASE("c api training produces a usable policy and log callbacks") {
  rls_train_options opts;
  rls_train_options_default(&opts, RLS_PROBLEM_TSP, 6);
  CHECK(opts.t_train == 200);
  CHECK(opts.gamma == 0.99);
  opts.epochs = 1;
  opts.instances_per_epoch = 8;
  opts.batches = 2;
  opts.t_train = 8;
  opts.n_step = 4;
  opts.d_model = 8;
  opts.seed = 11;

  int calls = 0;
  const auto cb = [](int, int, double mean_reward, double, double, double, void* user) {
    ++*static_cast<int*>(user);
    return mean_reward >= 0 ? 0 : 1;
  };
  rls_policy* policy = nullptr;
  REQUIRE(rls_train(&opts, nullptr, cb, &calls, &policy) == RLS_OK);
  CHECK(calls == 2);
  CHECK(rls_policy_epoch(policy) == 1);
  rls_policy_free(policy);

  // invalid config surfaces as a typed error
  opts.epochs = 0;
  rls_policy* none = nullptr;
  CHECK(rls_train(&opts, nullptr, nullptr, nullptr, &none) == RLS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("c api gradcheck passes clean and fails under fault injection") {
  double err = 1;
  REQUIRE(rls_gradcheck(RLS_PROBLEM_TSP, 8, 5, 3, 0, &err) == RLS_OK);
  CHECK(err <= 1e-4);
  double faulty = 0;
  REQUIRE(rls_gradcheck(RLS_PROBLEM_TSP, 8, 5, 3, 1, &faulty) == RLS_OK);
  CHECK(faulty > 1e-4);
}

TEST_CASE("c api benchmark loading exposes reference optima") {
  const std::string path = std::string(RLSEARCH_DATA_DIR) + "/benchmarks/eil51.tsp";
  rls_instance* inst = nullptr;
  REQUIRE(rls_instance_load(path.c_str(), &inst) == RLS_OK);
  CHECK(rls_instance_locations(inst) == 51);
  double opt = 0;
  REQUIRE(rls_instance_known_optimum(inst, &opt) == RLS_OK);
  CHECK(opt == 426);
  rls_instance_free(inst);

  rls_instance* missing = nullptr;
  CHECK(rls_instance_load("/no/such/file.tsp", &missing) == RLS_ERR_IO);
}

TEST_CASE("c api results writer round-trips through the reader format") {
  const fs::path path = fs::temp_directory_path() / "rlsearch_capi_results.csv";
  rls_results* results = nullptr;
  REQUIRE(rls_results_open(path.string().c_str(), &results) == RLS_OK);
  REQUIRE(rls_results_append(results, "tsp10-s1", "learned", 1000, 7, 2.85, 2.78, 12.5) == RLS_OK);
  REQUIRE(rls_results_append(results, "tsp10-s2", "best-improvement", 1000, 7, 2.9, NAN, 8.0) == RLS_OK);
  REQUIRE(rls_results_close(results) == RLS_OK);

  std::ifstream in(path);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(header == "instance_id,method,T,seed,cost,ref,gap,runtime_ms");
  CHECK(row1.find("tsp10-s1,learned,1000,7,") == 0);
  CHECK(row2.find(",,") != std::string::npos);  // empty ref and gap columns
  fs::remove(path);
}

TEST_CASE("c api cvrp solutions stay feasible and padded") {
  rls_instance* inst = nullptr;
  REQUIRE(rls_instance_generate(RLS_PROBLEM_CVRP, 12, 0, 21, &inst) == RLS_OK);
  CHECK(rls_instance_capacity(inst) == 30);
  rls_solution* initial = nullptr;
  REQUIRE(rls_solution_initial(inst, RLS_INITIAL_NEAREST_INSERTION, 0, 3, &initial) == RLS_OK);
  CHECK(rls_solution_len(initial) == 24);

  std::vector<int> seq(24);
  CHECK(rls_solution_seq(initial, seq.data(), 24) == 24);
  rls_solution* copy = nullptr;
  REQUIRE(rls_solution_from_seq(inst, seq.data(), 24, &copy) == RLS_OK);
  double c1 = 0, c2 = 0;
  rls_solution_cost(inst, initial, &c1);
  rls_solution_cost(inst, copy, &c2);
  CHECK(c1 == c2);

  // an over-capacity route is rejected as infeasible
  std::vector<int> bad = seq;
  std::sort(bad.begin(), bad.end(), std::greater<int>());  // all customers in one run
  rls_solution* rejected = nullptr;
  CHECK(rls_solution_from_seq(inst, bad.data(), 24, &rejected) == RLS_ERR_INFEASIBLE);

  rls_solution_free(copy);
  rls_solution_free(initial);
  rls_instance_free(inst);
}
