#pragma once
// JSON and CSV bindings: matrices, Markov measures, partitions, schedules,
// tracking/orbit/shadow series, and small text helpers for words.

#include <string>
#include <vector>

#include "json.hpp"

#include "ergolab/katok.hpp"
#include "ergolab/saturation.hpp"
#include "ergolab/sft.hpp"
#include "ergolab/shadowing.hpp"
#include "ergolab/toral.hpp"

namespace ergolab {

using nlohmann::json;

// {"size": l, "rows": [[0|1,...], ...]}
json matrix_to_json(const TransitionMatrix& B);
TransitionMatrix matrix_from_json(const json& j);

// {"p": [...], "P": [[...], ...]}; the 0/1 structure is recovered from P
json measure_to_json(const MarkovMeasure& m);
MarkovMeasure measure_from_json(const json& j);

// {"matrix": [[a,b],[c,d]], "rectangles": [{"corner": [s,u], "lengths": [S,U]}, ...]}
struct PartitionFile {
  i64 a = 1, b = 0, c = 0, d = 1;
  std::vector<PartRect> rects;
};
json partition_to_json(const PartitionFile& pf);
PartitionFile partition_from_json(const json& j);

// integers exact; rationals as [num, den]
json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const json& j);

// one line per checkpoint: checkpoint,k,i,n,D,threshold,pass
std::string tracking_csv(const TrackingReport& rep);
// t,x,y,in_disk,chi_plus_running
std::string orbit_csv(const std::vector<OrbitRow>& rows);
// n,x,y,jump,correction (correction column zero without a shadow result)
std::string shadow_csv(const PseudoOrbit& po, const ShadowResult* sr);

// digit string when every symbol is a single digit, else space-separated
std::string word_to_text(const Word& w);
Word word_from_text(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ergolab
