#pragma once

#include <filesystem>
#include <string>

#include <doctest.h>

#include "burstcast/darshan.hpp"
#include "burstcast/error.hpp"

namespace testsupport {

inline constexpr const char* kListing1 =
    "# uid: 336263\t\t\t\n"
    "# jobid: 7738588\t\t\t\n"
    "# start_time: 1509271803\t\t\t\n"
    "# start_time_asci: Sun Oct 29 03:10:03 2017\t\t\t\n"
    "# end_time: 1509355904\t\t\t\n"
    "# end_time_asci: Mon Oct 30 02:31:44 2017\t\t\t\n"
    "# nprocs: 48\t\t\t\n"
    "# run time: 84102\n"
    "#<module>\t<rank>\t<record id>\t<counter>\t<value>\t<file name>\t<mount pt>\t<fs type>\"\n"
    "POSIX\t0\t129625958266154176\tPOSIX_READS\t8409\t/mnt/c/1218605708\t/mnt/c\tlustre\n"
    "POSIX\t0\t129625958266154176\tPOSIX_BYTES_READ\t5924503\t/mnt/c/1218605708\t/mnt/c\tlustre\n"
    "POSIX\t0\t129625958266154176\tPOSIX_F_READ_START_TIMESTAMP\t15924.384187\t/mnt/c/1218605708\t/mnt/c\tlustre\n"
    "POSIX\t0\t129625958266154176\tPOSIX_F_READ_END_TIMESTAMP\t77689.803174\t/mnt/c/1218605708\t/mnt/c\tlustre\n";

// Kind of the Error thrown by fn; fails the test if nothing is thrown.
inline burstcast::ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const burstcast::Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return burstcast::ErrorKind::IoError;
}

// Fresh empty directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::path(BURSTCAST_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testsupport
