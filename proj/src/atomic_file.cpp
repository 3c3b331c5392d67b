#include "synql/atomic_file.hpp"

#include <unistd.h>

#include <string>
#include <system_error>

#include "synql/error.hpp"

namespace synql {

AtomicFile::AtomicFile(std::filesystem::path target) : target_(std::move(target)) {
  temp_ = target_;
  temp_ += ".tmp." + std::to_string(::getpid());
  out_.open(temp_, std::ios::binary | std::ios::trunc);
  if (!out_) {
    throw Error("cannot open '" + temp_.string() + "' for writing");
  }
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(temp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) {
    throw Error("write to '" + temp_.string() + "' failed");
  }
  out_.close();
  std::error_code ec;
  std::filesystem::rename(temp_, target_, ec);
  if (ec) {
    throw Error("cannot rename '" + temp_.string() + "' to '" + target_.string() + "': " + ec.message());
  }
  committed_ = true;
}

}  // namespace synql
