#include "dfc/csv.hpp"

#include <filesystem>
#include <limits>
#include <stdexcept>

namespace dfc {

CsvWriter::CsvWriter(std::string path) : path_(std::move(path)), out_(path_ + ".tmp") {
    if (!out_) throw std::runtime_error("cannot open " + path_ + ".tmp for writing");
    out_.precision(std::numeric_limits<double>::max_digits10);
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
    }
}

void CsvWriter::close() {
    if (closed_) return;
    closed_ = true;
    out_.close();
    std::filesystem::rename(path_ + ".tmp", path_);
}

void CsvWriter::sep() {
    if (!at_row_start_) out_ << ',';
    at_row_start_ = false;
}

void CsvWriter::header(const std::vector<std::string>& names) {
    for (const auto& name : names) {
        sep();
        out_ << name;
    }
    end_row();
}

void CsvWriter::value(double v) {
    sep();
    out_ << v;
}

void CsvWriter::value(const std::string& v) {
    sep();
    out_ << v;
}

void CsvWriter::end_row() {
    out_ << '\n';
    at_row_start_ = true;
}

}  // namespace dfc
