#pragma once

// JSON and CSV serialization of analysis results (the wire formats of the
// C API and the CLI).

#include "ctmctail/analysis.hpp"
#include "ctmctail/asymptotics.hpp"
#include "ctmctail/classify.hpp"
#include "ctmctail/solver.hpp"
#include "ctmctail/simulate.hpp"

#include <json.hpp>

#include <string>

namespace ctmc {

nlohmann::json to_json(const JumpStructure &js);
nlohmann::json to_json(const AsymptoticParams &p);
nlohmann::json to_json(const TailClassification &c);
nlohmann::json to_json(const ConsistencyReport &r);
nlohmann::json to_json(const ResidualReport &r);
nlohmann::json to_json(const TailFit &f);
nlohmann::json to_json(const ErgodicityReport &r);
nlohmann::json to_json(const ObstructionReport &r);

// columns x, p(x), T(x); header row mandatory
std::string dist_to_csv(const DistVector &d);
DistVector dist_from_csv(const std::string &csv);

// columns t, x
std::string trajectory_to_csv(const Trajectory &t);

} // namespace ctmc
