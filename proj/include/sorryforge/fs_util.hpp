#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sorryforge {

/// Throws Error(IoError).
std::string read_file(const std::filesystem::path& path);

/// Write to a sibling temp file, fsync, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Exclusive advisory lock (flock) held for the lifetime of the object.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& lock_path);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

/// A name unique within this process, for temp files next to their target.
std::string unique_suffix();

}  // namespace sorryforge
