#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qkd/protocols.hpp"

namespace qkd {

// One JSON object per record, keys in a fixed order so identical sessions
// produce byte-identical logs:
//   {"id":..,"a_bit":..,"a_basis":"X","n":..,"eve":"none","ann":"+y",
//    "b_basis":"Y","c0":false,"c1":true,"sift":"kept","disc":false}
// "ann" (the announced partner state) appears only for pair-protocol
// records. "eve" is one of none, ir:<basis><outcome>, pns:block, pns:fwd,
// pns:pass.
std::string serialize_record(const PulseRecord& rec);

// Inverse of serialize_record; accepts any JSON object with the same fields
// and throws std::invalid_argument on malformed input.
PulseRecord parse_record(const std::string& line);

// JSONL: one serialized record per line.
void write_records(std::ostream& out, const std::vector<PulseRecord>& records);
std::vector<PulseRecord> read_records(std::istream& in);

}  // namespace qkd
