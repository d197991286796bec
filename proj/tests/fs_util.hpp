#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gibbsim/io/tensor_file.hpp"

namespace testfs {

namespace fs = std::filesystem;

inline fs::path fresh_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("gibbsim_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// FNV-1a over every regular file (relative path, then contents) in path order.
inline std::uint64_t directory_digest(const fs::path& root)
{
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            files.push_back(fs::relative(e.path(), root));
    std::sort(files.begin(), files.end());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::uint8_t b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    };
    for (const auto& f : files) {
        for (char c : f.generic_string())
            mix(static_cast<std::uint8_t>(c));
        mix(0);
        for (auto b : gibbsim::read_file_bytes(root / f))
            mix(b);
    }
    return h;
}

inline std::vector<std::string> listing(const fs::path& root)
{
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out.push_back(fs::relative(e.path(), root).generic_string());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace testfs
