#pragma once

#include <filesystem>
#include <fstream>

namespace synql {

/// Output file written to a sibling temporary and renamed into place on
/// commit(). An uncommitted file is removed on destruction, so an aborted run
/// never leaves partial output behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target);
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile();

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

}  // namespace synql
