#include "pcd/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "pcd/error.hpp"

namespace pcd {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  require(!in.bad(), ErrorCode::Io, "read failed for '" + path.string() + "'");
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    require(!ec, ErrorCode::Io,
            "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    require(static_cast<bool>(out), ErrorCode::Io, "write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorCode::Io, "cannot move '" + tmp.string() + "' to '" + path.string() +
                                  "': " + ec.message());
}

}  // namespace pcd
