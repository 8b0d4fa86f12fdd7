#pragma once

#include "trendlab/csv.h"
#include "trendlab/market_data.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <random>
#include <string>
#include <vector>

namespace testutil {

namespace fs = std::filesystem;

/// Fresh directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("trendlab_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline fs::path write(const fs::path& path, const std::string& text) {
    trendlab::csv::write_text(path, text);
    return path;
}

inline std::string read(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Series on consecutive business days from 2010-01-04 with the given closes.
/// Open = close, high/low 1% around it, constant volume.
inline trendlab::data::QuoteSeries series_from_closes(const std::vector<double>& closes,
                                                      const std::string& name = "ACME",
                                                      double volume = 1000.0) {
    trendlab::data::QuoteSeries s;
    s.stockname = name;
    trendlab::Date d(2010, 1, 4);
    for (double c : closes) {
        s.bars.push_back({d, c, c * 1.01, c * 0.99, c, volume});
        d = d.next_business_day();
    }
    return s;
}

}  // namespace testutil
