#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace netfail {

// Shortest round-trip decimal form, locale-independent.
std::string format_double(double v);

// Minimal CSV emitter: '\n' line ends, '.' decimal separator, no quoting
// (field values here never contain commas).
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void field(const std::string& v);
    void field(double v);
    void field(long v);
    void end_row();
    void close();

private:
    std::ofstream out_;
    bool row_started_ = false;
    std::size_t columns_ = 0;
    std::size_t written_ = 0;
};

}  // namespace netfail
