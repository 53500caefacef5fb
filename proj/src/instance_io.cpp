#include "mirls/instance_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mirls {

using nlohmann::json;

std::string instance_to_json(const ProblemInstance& inst) {
  const auto& t = inst.truth;
  const auto& pat = *inst.observations.pattern();
  json entries = json::array();
  for (Index l = 0; l < pat.size(); ++l) entries.push_back({pat.row_indices()[l], pat.col_indices()[l]});
  const auto& v = inst.observations.values();
  json j = {{"d1", t.rows()},
            {"d2", t.cols()},
            {"r", t.rank()},
            {"kappa", t.kappa},
            {"decay", to_string(t.decay)},
            {"seed", t.seed},
            {"entries", std::move(entries)},
            {"values", std::vector<double>(v.data(), v.data() + v.size())}};
  return j.dump();
}

ProblemInstance instance_from_json(const std::string& text) {
  const json j = json::parse(text);
  const Index d1 = j.at("d1").get<Index>();
  const Index d2 = j.at("d2").get<Index>();
  GroundTruth truth =
      generate_ground_truth(d1, d2, j.at("r").get<Index>(), j.at("kappa").get<double>(),
                            parse_decay(j.at("decay").get<std::string>()),
                            j.at("seed").get<std::uint64_t>());
  std::vector<IndexPair> entries;
  for (const auto& e : j.at("entries")) entries.push_back({e.at(0).get<Index>(), e.at(1).get<Index>()});
  const auto vals = j.at("values").get<std::vector<double>>();
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Index>(vals.size()));
  return {std::move(truth), ObservationSet::from_entries(d1, d2, entries, v)};
}

void save_instance(const ProblemInstance& instance, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << instance_to_json(instance) << '\n';
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return instance_from_json(ss.str());
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path + "': " + e.what());
  }
}

}  // namespace mirls
