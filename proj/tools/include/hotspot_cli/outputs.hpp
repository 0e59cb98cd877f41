#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hotspot::cli {

// Files written during one command. Each file is written to a temporary
// sibling and renamed into place; if the command fails, everything written so
// far is removed (`commit` disarms the cleanup).
class OutputSet {
public:
    OutputSet() = default;
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;
    ~OutputSet();

    void write(const std::string& path, const std::function<void(std::ostream&)>& body);
    void commit() { committed_ = true; }

private:
    std::vector<std::string> written_;
    bool committed_ = false;
};

}  // namespace hotspot::cli
