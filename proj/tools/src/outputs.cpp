#include "hotspot_cli/outputs.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hotspot/error.hpp"

namespace hotspot::cli {

OutputSet::~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) std::filesystem::remove(p, ec);
}

void OutputSet::write(const std::string& path, const std::function<void(std::ostream&)>& body) {
    const std::string tmp = path + ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidInput("cli", "cannot open '" + path + "' for writing");
        try {
            body(out);
        } catch (...) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw;
        }
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw InvalidInput("cli", "failed writing '" + path + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw InvalidInput("cli", "cannot move output into '" + path + "'");
    }
    written_.push_back(path);
}

}  // namespace hotspot::cli
