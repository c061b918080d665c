#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rdc/digest.hpp"
#include "rdc/ledger.hpp"
#include "rdc/render.hpp"
#include "rdc/runner.hpp"
#include "support.hpp"

#include <fstream>
#include <sstream>
#include <set>
#include <thread>

using namespace rdc;
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario small(std::int64_t steps = 400) {
  Scenario s;
  s.name = "small";
  s.width = 48;
  s.height = 36;
  s.total_steps = steps;
  s.events = {{0, {10, 18}, 3}};
  s.detectors = {{"near", {14, 16, 4, 4}, 0.1}, {"far", {44, 0, 4, 4}, 0.1}};
  s.strokes = {{StrokeKind::line, {{30, 0}, {30, 35}}, 2, StrokeMode::add}};
  s.snapshot_steps = {0, steps};
  s.timelapse_stride = 50;
  return s;
}

ExecuteOptions threads(int n, KernelKind kernel = KernelKind::parallel) {
  ExecuteOptions opt;
  opt.threads = n;
  opt.kernel = kernel;
  return opt;
}

}  // namespace

TEST_CASE("execute with zero steps") {
  testing::TempDir dir("run0");
  const Scenario s = with_total_steps(small(), 0);
  REQUIRE(s.snapshot_steps == std::vector<std::int64_t>{0});
  const RunRecord r = execute(s, dir.path());
  CHECK(r.status == RunStatus::completed);
  CHECK(r.final_step == 0);
  CHECK(r.scenario_hash == scenario_hash(s));
  for (const auto& [name, outcome] : r.detector_outcomes) {
    CAPTURE(name);
    CHECK_FALSE(outcome.fired);
  }
  REQUIRE_FALSE(r.output_files.empty());
  for (const OutputFile& f : r.output_files) CHECK(sha256_file(dir.path() / f.path) == f.sha256);
  CHECK(fs::exists(dir.path() / image_file_name(r.scenario_hash, 0, ImageKind::snapshot)));
}

TEST_CASE("execute is deterministic across runs and thread counts") {
  testing::TempDir a("runa"), b("runb"), c("runc");
  const RunRecord ra = execute(small(), a.path(), threads(4));
  const RunRecord rb = execute(small(), b.path(), threads(4));
  const RunRecord rc = execute(small(), c.path(), threads(1, KernelKind::reference));
  for (const RunRecord* r : {&rb, &rc}) {
    CHECK(r->status == RunStatus::completed);
    CHECK(r->field_checksum == ra.field_checksum);
    CHECK(r->output_files == ra.output_files);
    CHECK(r->detector_outcomes == ra.detector_outcomes);
  }
  CHECK(ra.final_step == 400);
  CHECK(ra.detector_outcomes.at("near").fired);
  CHECK_FALSE(ra.detector_outcomes.at("far").fired);
}

TEST_CASE("events fire at their boundary") {
  Scenario late = small(400);
  late.events[0].step = 200;
  testing::TempDir dir("late");
  const RunRecord r = execute(late, dir.path());
  REQUIRE(r.detector_outcomes.at("near").first_fire_step.has_value());
  CHECK(*r.detector_outcomes.at("near").first_fire_step >= 200);
}

TEST_CASE("a diverging run is recorded as failed") {
  Scenario s = small(200);
  s.params.epsilon = 1e-5;
  s.params.dt = 0.03;
  testing::TempDir dir("nan");
  RunRecord r;
  REQUIRE_NOTHROW(r = execute(s, dir.path()));
  CHECK(r.status == RunStatus::failed);
  CHECK_FALSE(r.error.empty());
  CHECK(r.final_step < 200);
}

TEST_CASE("progress reports every detector boundary") {
  testing::TempDir dir("progress");
  std::vector<std::int64_t> seen;
  ExecuteOptions opt;
  opt.progress = [&](std::int64_t step) { seen.push_back(step); };
  execute(small(200), dir.path(), opt);
  REQUIRE_FALSE(seen.empty());
  CHECK(seen.back() == 200);
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i] > seen[i - 1]);
}

TEST_CASE("records round-trip and reject a tampered hash") {
  testing::TempDir dir("rec");
  const RunRecord r = execute(small(), dir.path());
  const std::string text = serialize_record(r);
  const RunRecord back = parse_record(text);
  CHECK(back == r);
  CHECK(serialize_record(back) == text);
  const auto at = text.find(r.scenario_hash);
  REQUIRE(at != std::string::npos);
  std::string bad = text;
  bad[at] = bad[at] == 'a' ? 'b' : 'a';
  CHECK_THROWS_AS(parse_record(bad), ValidationError);
}

TEST_CASE("reproduce") {
  testing::TempDir a("repa"), b("repb");
  RunRecord r = execute(small(), a.path());
  SUBCASE("match") {
    const ReproductionCheck c = reproduce(r, b.path());
    CHECK(c.ok());
  }
  SUBCASE("a wrong checksum is caught") {
    r.field_checksum = std::string(64, '0');
    const ReproductionCheck c = reproduce(r, b.path());
    CHECK_FALSE(c.checksum_matches);
    CHECK(c.hash_matches);
    CHECK(c.images_match);
    CHECK_FALSE(c.ok());
  }
  SUBCASE("a wrong outcome is caught") {
    r.detector_outcomes.at("far").fired = true;
    r.detector_outcomes.at("far").first_fire_step = 50;
    CHECK_FALSE(reproduce(r, b.path()).outcomes_match);
  }
}

TEST_CASE("ledger append and read") {
  testing::TempDir dir("ledger");
  testing::TempDir out("ledger-out");
  ResultLedger ledger(dir.path());
  CHECK(ledger.entries().empty());
  const RunRecord r1 = execute(small(200), out.path());
  const RunRecord r2 = execute(small(300), out.path());

  const LedgerEntry e1 = ledger.append(r1);
  const std::string first_file = read_text(ledger.records_dir() / e1.file);
  const std::string first_index = read_text(ledger.index_path());
  const LedgerEntry e2 = ledger.append(r2);

  CHECK(ledger.entries() == std::vector<LedgerEntry>{e1, e2});
  CHECK(ledger.read(e1) == r1);
  CHECK(ledger.read(e2) == r2);
  CHECK(e1.file.rfind(r1.scenario_hash, 0) == 0);
  // Earlier bytes are never rewritten.
  CHECK(read_text(ledger.records_dir() / e1.file) == first_file);
  const std::string index = read_text(ledger.index_path());
  CHECK(index.rfind(first_index, 0) == 0);
  CHECK(sha256_file(ledger.records_dir() / e1.file) == e1.sha256);
  // Record files are read-only.
  const auto perms = fs::status(ledger.records_dir() / e1.file).permissions();
  CHECK((perms & fs::perms::owner_write) == fs::perms::none);
  // A fresh handle sees the same ledger.
  CHECK(ResultLedger(dir.path()).entries() == ledger.entries());
}

TEST_CASE("ledger recovers a record written before a crash") {
  testing::TempDir dir("crash");
  testing::TempDir out("crash-out");
  const RunRecord r = execute(small(100), out.path());
  LedgerEntry orphan;
  {
    ResultLedger ledger(dir.path());
    ledger.append(r);
    orphan = ledger.write_record_file(r);  // process dies before commit_index
  }
  ResultLedger reopened(dir.path());
  CHECK(reopened.entries().size() == 1);
  const auto added = reopened.recover();
  REQUIRE(added.size() == 1);
  CHECK(added[0] == orphan);
  CHECK(reopened.entries().size() == 2);
  CHECK(reopened.read(orphan) == r);
  CHECK(reopened.recover().empty());
  // append() recovers on its own, too.
  {
    ResultLedger ledger(dir.path());
    ledger.write_record_file(r);
    ledger.append(r);
    CHECK(ledger.entries().size() == 4);
  }
}

TEST_CASE("ledger detects tampering") {
  testing::TempDir dir("tamper");
  testing::TempDir out("tamper-out");
  ResultLedger ledger(dir.path());
  const LedgerEntry e = ledger.append(execute(small(100), out.path()));
  const fs::path file = ledger.records_dir() / e.file;
  fs::permissions(file, fs::perms::owner_write, fs::perm_options::add);
  {
    std::ofstream o(file, std::ios::app);
    o << "# edited\n";
  }
  CHECK_THROWS_AS(ledger.recover(), IoError);
  fs::remove(file);
  CHECK_THROWS_AS(ledger.recover(), IoError);
}

TEST_CASE("concurrent appends are serialised") {
  testing::TempDir dir("concurrent");
  testing::TempDir out("concurrent-out");
  const RunRecord r = execute(small(50), out.path());
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&] {
      ResultLedger ledger(dir.path());
      for (int i = 0; i < 5; ++i) ledger.append(r);
    });
  }
  for (auto& w : workers) w.join();
  ResultLedger ledger(dir.path());
  const auto entries = ledger.entries();
  CHECK(entries.size() == 20);
  std::set<std::string> files;
  for (const LedgerEntry& e : entries) {
    files.insert(e.file);
    CHECK(ledger.read(e) == r);
  }
  CHECK(files.size() == 20);
  CHECK(ledger.recover().empty());
}
