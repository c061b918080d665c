#include "rdc/ledger.hpp"

#include "rdc/digest.hpp"
#include "rdc/errors.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

namespace fs = std::filesystem;

namespace rdc {

namespace {

[[noreturn]] void sys_fail(const std::string& what, const fs::path& path) {
  throw IoError(what + " " + path.string() + ": " + std::strerror(errno));
}

class Fd {
public:
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }

private:
  int fd_;
};

class LockGuard {
public:
  explicit LockGuard(const fs::path& path) : fd_(::open(path.c_str(), O_RDWR | O_CREAT, 0644)) {
    if (fd_.get() < 0) sys_fail("cannot open lock", path);
    while (::flock(fd_.get(), LOCK_EX) != 0) {
      if (errno != EINTR) sys_fail("cannot lock", path);
    }
  }

private:
  Fd fd_;
};

void write_all(int fd, const std::string& data, const fs::path& path) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      sys_fail("cannot write", path);
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) sys_fail("cannot sync", path);
}

void sync_dir(const fs::path& dir) {
  Fd fd(::open(dir.c_str(), O_RDONLY | O_DIRECTORY));
  if (fd.get() >= 0) ::fsync(fd.get());
}

std::string compact_timestamp() {
  std::string ts = utc_timestamp();  // 2026-01-02T03:04:05.678901Z
  std::erase(ts, '-');
  std::erase(ts, ':');
  return ts;
}

std::vector<LedgerEntry> read_index(const fs::path& path) {
  std::vector<LedgerEntry> out;
  std::ifstream in(path);
  if (!in) {
    if (!fs::exists(path)) return out;
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream fields(line);
    LedgerEntry e;
    std::string extra;
    if (!(fields >> e.file >> e.sha256) || (fields >> extra) || e.sha256.size() != 64) {
      throw IoError(path.string() + ":" + std::to_string(number) + ": malformed index line");
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

ResultLedger::ResultLedger(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(records_dir(), ec);
  if (ec) throw IoError("cannot create ledger at " + root_.string() + ": " + ec.message());
}

std::vector<LedgerEntry> ResultLedger::entries() const { return read_index(index_path()); }

RunRecord ResultLedger::read(const LedgerEntry& entry) const {
  const fs::path path = records_dir() / entry.file;
  if (sha256_file(path) != entry.sha256) {
    throw IoError(path.string() + ": digest does not match the index");
  }
  return load_record(path);
}

LedgerEntry ResultLedger::write_record_file(const RunRecord& record) {
  record.validate();
  const std::string text = serialize_record(record);
  const std::string stem = record.scenario_hash + "-" + compact_timestamp();
  for (int attempt = 0;; ++attempt) {
    const std::string name = stem + (attempt ? "-" + std::to_string(attempt) : "") + ".yaml";
    const fs::path path = records_dir() / name;
    Fd fd(::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0444));
    if (fd.get() < 0) {
      if (errno == EEXIST) continue;
      sys_fail("cannot create", path);
    }
    write_all(fd.get(), text, path);
    sync_dir(records_dir());
    return {name, sha256_hex(text)};
  }
}

void ResultLedger::write_index(const std::vector<LedgerEntry>& entries) {
  std::string text;
  for (const LedgerEntry& e : entries) text += e.file + " " + e.sha256 + "\n";
  const fs::path tmp = root_ / "index.tmp";
  {
    Fd fd(::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644));
    if (fd.get() < 0) sys_fail("cannot create", tmp);
    write_all(fd.get(), text, tmp);
  }
  if (::rename(tmp.c_str(), index_path().c_str()) != 0) sys_fail("cannot replace", index_path());
  sync_dir(root_);
}

void ResultLedger::commit_index(const LedgerEntry& entry) {
  std::vector<LedgerEntry> all = entries();
  if (std::find(all.begin(), all.end(), entry) != all.end()) return;
  all.push_back(entry);
  write_index(all);
}

namespace {

std::vector<LedgerEntry> recover_unlocked(ResultLedger& ledger,
                                          const std::function<void(const std::vector<LedgerEntry>&)>& write) {
  const std::vector<LedgerEntry> indexed = ledger.entries();
  std::set<std::string> known;
  for (const LedgerEntry& e : indexed) {
    const fs::path path = ledger.records_dir() / e.file;
    if (!fs::exists(path)) throw IoError("ledger: indexed record " + path.string() + " is missing");
    if (sha256_file(path) != e.sha256) {
      throw IoError("ledger: record " + path.string() + " was modified after it was written");
    }
    known.insert(e.file);
  }

  struct Orphan {
    std::string started_at;
    LedgerEntry entry;
  };
  std::vector<Orphan> orphans;
  for (const auto& item : fs::directory_iterator(ledger.records_dir())) {
    const std::string name = item.path().filename().string();
    if (!item.is_regular_file() || item.path().extension() != ".yaml" || known.count(name)) continue;
    try {
      const RunRecord r = load_record(item.path());
      orphans.push_back({r.started_at, {name, sha256_file(item.path())}});
    } catch (const ValidationError&) {
      // Torn write: never committed, set aside rather than indexed.
      const fs::path aside = ledger.root() / "quarantine";
      fs::create_directories(aside);
      fs::rename(item.path(), aside / name);
    }
  }
  std::sort(orphans.begin(), orphans.end(), [](const Orphan& a, const Orphan& b) {
    return std::tie(a.started_at, a.entry.file) < std::tie(b.started_at, b.entry.file);
  });

  std::vector<LedgerEntry> added;
  for (const Orphan& o : orphans) added.push_back(o.entry);
  if (!added.empty()) {
    std::vector<LedgerEntry> all = indexed;
    all.insert(all.end(), added.begin(), added.end());
    write(all);
  }
  return added;
}

}  // namespace

std::vector<LedgerEntry> ResultLedger::recover() {
  LockGuard lock(root_ / "lock");
  return recover_unlocked(*this, [this](const auto& all) { write_index(all); });
}

LedgerEntry ResultLedger::append(const RunRecord& record) {
  LockGuard lock(root_ / "lock");
  recover_unlocked(*this, [this](const auto& all) { write_index(all); });
  const LedgerEntry entry = write_record_file(record);
  commit_index(entry);
  return entry;
}

}  // namespace rdc
