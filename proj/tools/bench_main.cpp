/*
 * Copyright 2026 The csmtables Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csm/bench/bench.hpp"

namespace {

struct Common {
  std::string out;
  std::string cost_model;
  std::string trace;
  std::uint64_t seed = 1;
  bool calibrated = false;
};

csm::sim::CostModel load_costs(const Common& c) {
  csm::sim::CostModel m;
  if (!c.cost_model.empty()) {
    std::ifstream in(c.cost_model);
    if (!in) throw csm::Error(csm::Errc::invalid_argument, "cannot open " + c.cost_model);
    m = csm::sim::CostModel::from_json(nlohmann::json::parse(in), m);
  }
  return c.calibrated ? csm::bench::calibrated(m) : m;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// JSON unless the output file ends in .csv.
void emit(const Common& c, const nlohmann::ordered_json& json, const std::string& csv) {
  if (c.out.empty()) {
    std::cout << json.dump(2) << '\n';
    return;
  }
  std::ofstream out(c.out);
  if (!out) throw csm::Error(csm::Errc::invalid_argument, "cannot write " + c.out);
  if (ends_with(c.out, ".csv")) {
    out << csv;
  } else {
    out << json.dump(2) << '\n';
  }
  std::cerr << "wrote " << c.out << '\n';
}

void save_trace(const Common& c, const csm::bench::RunTrace& t) {
  if (c.trace.empty()) return;
  std::ofstream out(c.trace);
  out << t.jsonl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated cluster-shared-memory table benchmarks"};
  app.require_subcommand(1);

  Common common;
  std::string size = "16MiB";
  std::string type = "uint64";
  std::string method = "csm";
  std::string mode = "remote";
  std::uint32_t nodes = 2;
  std::uint64_t stride = 1;
  bool sweep = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Report file (.json or .csv); stdout when omitted");
    sub->add_option("--seed", common.seed, "Scheduler and data seed");
    sub->add_option("--cost-model", common.cost_model, "JSON file overriding cost model fields");
    sub->add_option("--trace", common.trace, "Write the ledger trace as JSON lines");
    sub->add_flag("--calibrated", common.calibrated, "Fit flush and allocation constants");
    sub->add_option("--size", size, "Table size, e.g. 1GiB or 16MiB");
    sub->add_option("--nodes", nodes, "Cluster size")->check(CLI::Range(2u, 64u));
    sub->add_option("--type", type, "Element type")
        ->check(CLI::IsMember({"uint64", "int64", "float64"}));
  };

  auto* init = app.add_subcommand("init-table", "Table-build cost breakdown");
  add_common(init);
  auto* transfer = app.add_subcommand("transfer", "Descriptor sharing vs ethernet copy");
  add_common(transfer);
  transfer->add_option("--method", method)->check(CLI::IsMember({"ethernet", "csm"}));
  auto* strided = app.add_subcommand("strided", "Strided read throughput");
  add_common(strided);
  strided->add_option("--stride", stride, "Stride in elements")->check(CLI::PositiveNumber);
  strided->add_option("--mode", mode)->check(CLI::IsMember({"local", "remote"}));
  strided->add_flag("--sweep", sweep, "Run strides 1, 2, 4, ..., 1024");

  CLI11_PARSE(app, argc, argv);

  try {
    csm::bench::BenchConfig cfg;
    cfg.nodes = nodes;
    cfg.table_bytes = csm::bench::parse_size(size);
    cfg.element_type = csm::bench::parse_type(type);
    cfg.seed = common.seed;
    cfg.costs = load_costs(common);
    csm::bench::RunTrace trace;

    if (init->parsed()) {
      const auto r = csm::bench::bench_init_table(cfg, &trace);
      emit(common, r.to_json(), r.to_csv());
    } else if (transfer->parsed()) {
      cfg.method = csm::bench::parse_method(method);
      const auto r = csm::bench::bench_transfer(cfg, &trace);
      emit(common, r.to_json(), r.to_csv());
    } else {
      cfg.mode = csm::bench::parse_mode(mode);
      std::vector<std::uint64_t> strides{stride};
      if (sweep) {
        strides.clear();
        for (std::uint64_t s = 1; s <= 1024; s *= 2) strides.push_back(s);
      }
      nlohmann::ordered_json all = nlohmann::ordered_json::array();
      std::string csv;
      for (std::uint64_t s : strides) {
        cfg.stride = s;
        const auto r = csm::bench::bench_strided(cfg, &trace);
        all.push_back(r.to_json());
        const std::string rows = r.to_csv();
        csv += csv.empty() ? rows : rows.substr(rows.find('\n') + 1);
      }
      emit(common, strides.size() == 1 ? all[0] : all, csv);
    }
    save_trace(common, trace);
  } catch (const csm::Error& e) {
    std::cerr << "bench: " << csm::errc_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
