#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qkd/analysis.hpp"
#include "qkd/cli.hpp"
#include "qkd/protocols.hpp"
#include "qkd/record_io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Invoke the tool in-process with captured stdout/stderr.
CliResult run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("qkdsim");
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
    std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
    CliResult result;
    try {
        result.code = qkd::cli_main(static_cast<int>(argv.size()), argv.data());
    } catch (...) {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
        throw;
    }
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

// Scratch file under the system temp dir, removed on destruction.
class TempFile {
public:
    explicit TempFile(const std::string& name, const std::string& contents = "")
        : path_((fs::temp_directory_path() / ("qkdsim_test_" + name)).string()) {
        if (!contents.empty()) {
            std::ofstream out(path_, std::ios::binary);
            out << contents;
        }
    }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;
    ~TempFile() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Unsets QKDSIM_SEED for the test body and restores the outer value.
class SeedEnvGuard {
public:
    SeedEnvGuard() {
        if (const char* old = std::getenv("QKDSIM_SEED")) {
            saved_ = old;
            had_value_ = true;
        }
        unsetenv("QKDSIM_SEED");
    }
    ~SeedEnvGuard() {
        if (had_value_) {
            setenv("QKDSIM_SEED", saved_.c_str(), 1);
        } else {
            unsetenv("QKDSIM_SEED");
        }
    }

private:
    std::string saved_;
    bool had_value_ = false;
};

std::map<std::string, std::string> parse_summary(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto sep = line.find(" = ");
        REQUIRE(sep != std::string::npos);
        kv[line.substr(0, sep)] = line.substr(sep + 3);
    }
    return kv;
}

std::string ideal_config_text(std::uint64_t pulses, std::uint64_t seed) {
    std::ostringstream cfg;
    cfg << "protocol = bb84\n"
        << "pulses = " << pulses << "\n"
        << "seed = " << seed << "\n"
        << "sample_fraction = 0.5\n"
        << "source.kind = truncated\n"
        << "detector.efficiency = 1\n"
        << "detector.dark_prob = 0\n";
    return cfg.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) {
        n += c == '\n';
    }
    return n;
}

}  // namespace

TEST_CASE("simulate prints a parseable summary and a full record log") {
    SeedEnvGuard env;
    TempFile cfg("sim.cfg", ideal_config_text(2000, 42));
    TempFile records("sim.jsonl");

    const CliResult r =
        run_cli({"simulate", "--config", cfg.path(), "--records", records.path()});
    CHECK(r.code == 0);
    CHECK(r.err.empty());

    const auto kv = parse_summary(r.out);
    CHECK(kv.at("protocol") == "bb84");
    CHECK(kv.at("pulses") == "2000");
    CHECK(kv.at("seed") == "42");
    CHECK(kv.at("source") == "truncated p1=1 p_multi=0");
    CHECK(kv.at("eve") == "none");
    CHECK(kv.at("detections") == "2000");
    CHECK(kv.at("detection_rate") == "1");
    CHECK(kv.at("double_clicks") == "0");
    CHECK(kv.at("qber") == "0");
    CHECK(kv.at("coincidence_alarm") == "no");
    CHECK(kv.at("qber_above_individual_threshold") == "no");
    CHECK(kv.at("qber_above_shor_preskill_threshold") == "no");

    // one record per emitted pulse, ids dense, and the log agrees with the
    // printed counters
    std::ifstream in(records.path());
    REQUIRE(in.good());
    const std::vector<qkd::PulseRecord> log = qkd::read_records(in);
    REQUIRE(log.size() == 2000);
    std::size_t kept = 0;
    std::size_t disclosed = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(log[i].pulse_id == i);
        kept += log[i].sift_status == qkd::SiftStatus::Kept;
        disclosed += log[i].disclosed;
    }
    CHECK(std::to_string(kept) == kv.at("sifted"));
    CHECK(std::to_string(disclosed) == kv.at("disclosed"));
    CHECK(std::to_string(kept - disclosed) == kv.at("remaining_key"));
}

TEST_CASE("QKDSIM_SEED overrides the configured seed") {
    SeedEnvGuard env;
    TempFile cfg_env("seed_a.cfg", ideal_config_text(500, 123));
    TempFile cfg_direct("seed_b.cfg", ideal_config_text(500, 7));

    setenv("QKDSIM_SEED", "7", 1);
    const CliResult overridden = run_cli({"simulate", "--config", cfg_env.path()});
    unsetenv("QKDSIM_SEED");
    const CliResult direct = run_cli({"simulate", "--config", cfg_direct.path()});

    CHECK(overridden.code == 0);
    CHECK(overridden.out.find("seed = 7\n") != std::string::npos);
    CHECK(overridden.out == direct.out);

    setenv("QKDSIM_SEED", "abc", 1);
    const CliResult bad = run_cli({"simulate", "--config", cfg_direct.path()});
    unsetenv("QKDSIM_SEED");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("QKDSIM_SEED") != std::string::npos);
}

TEST_CASE("usage and config errors exit 1 with a diagnostic") {
    SeedEnvGuard env;

    const CliResult missing =
        run_cli({"simulate", "--config", "/nonexistent/qkdsim.cfg"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("cannot open") != std::string::npos);

    TempFile bad_key("bad_key.cfg", "protocol = bb84\nturbo = on\n");
    const CliResult unknown = run_cli({"simulate", "--config", bad_key.path()});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("turbo") != std::string::npos);
    CHECK(unknown.err.find("is not recognized") != std::string::npos);

    CHECK(run_cli({}).code == 1);                         // subcommand required
    CHECK(run_cli({"simulate"}).code == 1);               // --config required
    CHECK(run_cli({"simulate", "--bogus"}).code == 1);    // unknown option

    const CliResult help = run_cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("simulate") != std::string::npos);
    CHECK(help.out.find("sweep") != std::string::npos);
    CHECK(help.out.find("curves") != std::string::npos);
    CHECK(help.out.find("selftest") != std::string::npos);
}

TEST_CASE("simulate exits 2 when the coincidence monitor fires") {
    SeedEnvGuard env;
    // heavy multi-photon fraction: splitting doubles far exceed the
    // accidental-coincidence expectation, whatever the seed
    TempFile cfg("alarm.cfg",
                 "protocol = bb84\n"
                 "pulses = 20000\n"
                 "seed = 42\n"
                 "source.kind = truncated\n"
                 "source.p1 = 0.01\n"
                 "source.p_multi = 0.05\n"
                 "detector.efficiency = 1\n"
                 "detector.dark_prob = 1e-5\n");
    const CliResult r = run_cli({"simulate", "--config", cfg.path()});
    CHECK(r.code == 2);
    const auto kv = parse_summary(r.out);
    CHECK(kv.at("coincidence_alarm") == "yes");
}

TEST_CASE("sweep writes the same CSV to stdout and --out") {
    SeedEnvGuard env;
    const std::string spec_text =
        "pulses = 400\n"
        "seed = 9\n"
        "sample_fraction = 0.5\n"
        "source.kind = truncated\n"
        "detector.efficiency = 1\n"
        "sweep.parameter = channel.length_km\n"
        "sweep.values = 0, 12\n"
        "sweep.trials = 2\n";
    TempFile spec("sweep.cfg", spec_text);

    const CliResult to_stdout = run_cli({"sweep", "--spec", spec.path()});
    CHECK(to_stdout.code == 0);
    REQUIRE(count_lines(to_stdout.out) == 3);  // header + one row per value
    std::istringstream parsed_in(to_stdout.out);
    const qkd::KeyRateReport report = qkd::parse_key_rate_csv(parsed_in);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].value == 0.0);
    CHECK(report.rows[1].value == 12.0);
    CHECK(report.rows[0].detection_rate == 1.0);  // lossless point
    CHECK(report.rows[0].qber == 0.0);
    CHECK(report.rows[0].alarms == 0);
    CHECK(report.rows[1].detection_rate < 0.7);

    TempFile out_file("sweep.csv");
    const CliResult to_file =
        run_cli({"sweep", "--spec", spec.path(), "--out", out_file.path()});
    CHECK(to_file.code == 0);
    CHECK(to_file.out.empty());
    std::ifstream in(out_file.path(), std::ios::binary);
    std::stringstream file_content;
    file_content << in.rdbuf();
    CHECK(file_content.str() == to_stdout.out);

    TempFile bad_spec("bad_sweep.cfg", "pulses = 100\nsweep.values = 1\n");
    const CliResult bad = run_cli({"sweep", "--spec", bad_spec.path()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("sweep.parameter") != std::string::npos);

    const CliResult unwritable = run_cli(
        {"sweep", "--spec", spec.path(), "--out", "/nonexistent/dir/out.csv"});
    CHECK(unwritable.code == 1);
    CHECK(unwritable.err.find("cannot open") != std::string::npos);
}

TEST_CASE("curves matches the library writer byte for byte") {
    SeedEnvGuard env;
    const CliResult r = run_cli({"curves"});
    CHECK(r.code == 0);
    std::ostringstream expected;
    qkd::write_attack_curves_csv(expected, 0.25, 100);
    CHECK(r.out == expected.str());
    CHECK(count_lines(r.out) == 102);
    CHECK(r.out.rfind("d,i_ab,i_ae,rate_individual,rate_shor_preskill\n0,1,0,1,1\n", 0) ==
          0);

    const CliResult custom = run_cli({"curves", "--dmax", "0.1", "--steps", "10"});
    CHECK(custom.code == 0);
    std::ostringstream expected_custom;
    qkd::write_attack_curves_csv(expected_custom, 0.1, 10);
    CHECK(custom.out == expected_custom.str());

    TempFile out_file("curves.csv");
    const CliResult to_file = run_cli({"curves", "--out", out_file.path()});
    CHECK(to_file.code == 0);
    std::ifstream in(out_file.path(), std::ios::binary);
    std::stringstream file_content;
    file_content << in.rdbuf();
    CHECK(file_content.str() == r.out);

    CHECK(run_cli({"curves", "--dmax", "0.6"}).code == 1);   // beyond d = 1/2
    CHECK(run_cli({"curves", "--steps", "0"}).code == 1);
}
