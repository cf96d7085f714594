#include "qkd/record_io.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace qkd {

namespace {

std::string eve_token(const EveActionRecord& eve) {
    switch (eve.tag) {
        case EveActionRecord::Tag::None:
            return "none";
        case EveActionRecord::Tag::InterceptResend:
            return std::string("ir:") + to_string(eve.ir_basis) +
                   std::to_string(eve.ir_outcome);
        case EveActionRecord::Tag::PnsBlock:
            return "pns:block";
        case EveActionRecord::Tag::PnsForward:
            return "pns:fwd";
        case EveActionRecord::Tag::PnsPass:
            return "pns:pass";
    }
    throw std::logic_error("eve_token: unhandled tag");
}

EveActionRecord eve_from_token(const std::string& token) {
    EveActionRecord eve;
    if (token == "none") {
        return eve;
    }
    if (token == "pns:block") {
        eve.tag = EveActionRecord::Tag::PnsBlock;
        return eve;
    }
    if (token == "pns:fwd") {
        eve.tag = EveActionRecord::Tag::PnsForward;
        return eve;
    }
    if (token == "pns:pass") {
        eve.tag = EveActionRecord::Tag::PnsPass;
        return eve;
    }
    if (token.size() == 5 && token.compare(0, 3, "ir:") == 0 &&
        (token[3] == 'X' || token[3] == 'Y') && (token[4] == '0' || token[4] == '1')) {
        eve.tag = EveActionRecord::Tag::InterceptResend;
        eve.ir_basis = token[3] == 'X' ? Basis::X : Basis::Y;
        eve.ir_outcome = token[4] - '0';
        return eve;
    }
    throw std::invalid_argument("parse_record: unknown eve token '" + token + "'");
}

const char* sift_token(SiftStatus s) {
    switch (s) {
        case SiftStatus::Kept:
            return "kept";
        case SiftStatus::Discarded:
            return "discarded";
        case SiftStatus::Inconclusive:
            return "inconclusive";
    }
    throw std::logic_error("sift_token: unhandled status");
}

SiftStatus sift_from_token(const std::string& token) {
    if (token == "kept") return SiftStatus::Kept;
    if (token == "discarded") return SiftStatus::Discarded;
    if (token == "inconclusive") return SiftStatus::Inconclusive;
    throw std::invalid_argument("parse_record: unknown sift token '" + token + "'");
}

const char* bool_token(bool b) {
    return b ? "true" : "false";
}

Basis basis_from_token(const std::string& token) {
    if (token == "X") return Basis::X;
    if (token == "Y") return Basis::Y;
    throw std::invalid_argument("parse_record: unknown basis '" + token + "'");
}

}  // namespace

std::string serialize_record(const PulseRecord& rec) {
    std::string out;
    out.reserve(160);
    out += "{\"id\":";
    out += std::to_string(rec.pulse_id);
    out += ",\"a_bit\":";
    out += std::to_string(rec.alice_bit);
    out += ",\"a_basis\":\"";
    out += to_string(rec.alice_basis);
    out += "\",\"n\":";
    out += std::to_string(rec.photon_number);
    out += ",\"eve\":\"";
    out += eve_token(rec.eve);
    out += '"';
    if (rec.has_announcement) {
        out += ",\"ann\":\"";
        out += to_label(rec.announced_partner);
        out += '"';
    }
    out += ",\"b_basis\":\"";
    out += to_string(rec.bob_basis);
    out += "\",\"c0\":";
    out += bool_token(rec.click0);
    out += ",\"c1\":";
    out += bool_token(rec.click1);
    out += ",\"sift\":\"";
    out += sift_token(rec.sift_status);
    out += "\",\"disc\":";
    out += bool_token(rec.disclosed);
    out += '}';
    return out;
}

PulseRecord parse_record(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("parse_record: bad JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("parse_record: expected a JSON object");
    }
    try {
        PulseRecord rec;
        rec.pulse_id = j.at("id").get<std::uint64_t>();
        rec.alice_bit = j.at("a_bit").get<int>();
        rec.alice_basis = basis_from_token(j.at("a_basis").get<std::string>());
        rec.photon_number = j.at("n").get<int>();
        rec.eve = eve_from_token(j.at("eve").get<std::string>());
        if (j.contains("ann")) {
            rec.has_announcement = true;
            rec.announced_partner = state_ref_from_label(j.at("ann").get<std::string>());
        }
        rec.bob_basis = basis_from_token(j.at("b_basis").get<std::string>());
        rec.click0 = j.at("c0").get<bool>();
        rec.click1 = j.at("c1").get<bool>();
        rec.sift_status = sift_from_token(j.at("sift").get<std::string>());
        rec.disclosed = j.at("disc").get<bool>();
        if (rec.alice_bit != 0 && rec.alice_bit != 1) {
            throw std::invalid_argument("parse_record: a_bit must be 0 or 1");
        }
        if (rec.photon_number < 0) {
            throw std::invalid_argument("parse_record: n must be >= 0");
        }
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("parse_record: missing or mistyped field: ") +
                                    e.what());
    }
}

void write_records(std::ostream& out, const std::vector<PulseRecord>& records) {
    for (const PulseRecord& rec : records) {
        out << serialize_record(rec) << '\n';
    }
}

std::vector<PulseRecord> read_records(std::istream& in) {
    std::vector<PulseRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        records.push_back(parse_record(line));
    }
    return records;
}

}  // namespace qkd
