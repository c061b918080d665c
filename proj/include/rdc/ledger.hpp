#pragma once

#include "rdc/runner.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rdc {

struct LedgerEntry {
  std::string file;  // name under records/
  std::string sha256;
  bool operator==(const LedgerEntry&) const = default;
};

/**
 * Append-only, file-based results ledger:
 *
 *   <root>/index              one "<file> <sha256>" line per record
 *   <root>/records/<hash>-<timestamp>.yaml
 *
 * Record files are created exclusively and never rewritten. The index is
 * replaced atomically (write temp, rename). Appends from several processes
 * are serialised by an advisory lock on <root>/lock.
 */
class ResultLedger {
public:
  explicit ResultLedger(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path records_dir() const { return root_ / "records"; }
  std::filesystem::path index_path() const { return root_ / "index"; }

  /// Recovers, then writes the record and commits it to the index.
  LedgerEntry append(const RunRecord& record);

  std::vector<LedgerEntry> entries() const;
  RunRecord read(const LedgerEntry& entry) const;

  /// Indexes record files left behind by an interrupted append. Returns the
  /// entries added. Throws IoError if an indexed record is missing or its
  /// digest no longer matches.
  std::vector<LedgerEntry> recover();

  // The two halves of append(), exposed for fault-injection tests.
  LedgerEntry write_record_file(const RunRecord& record);
  void commit_index(const LedgerEntry& entry);

private:
  void write_index(const std::vector<LedgerEntry>& entries);

  std::filesystem::path root_;
};

}  // namespace rdc
