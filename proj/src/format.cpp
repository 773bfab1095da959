#include "netfail/format.hpp"

#include <charconv>
#include <stdexcept>

namespace netfail {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void CsvWriter::field(const std::string& v) {
    if (row_started_) out_ << ',';
    out_ << v;
    row_started_ = true;
    ++written_;
}

void CsvWriter::field(double v) { field(format_double(v)); }
void CsvWriter::field(long v) { field(std::to_string(v)); }

void CsvWriter::end_row() {
    if (written_ != columns_)
        throw std::logic_error("csv row width mismatch");
    out_ << '\n';
    row_started_ = false;
    written_ = 0;
}

void CsvWriter::close() { out_.close(); }

}  // namespace netfail
