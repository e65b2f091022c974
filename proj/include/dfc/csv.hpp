#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace dfc {

// Minimal CSV emitter, full double precision. Writes to <path>.tmp and
// renames into place on close so partially written files never appear.
class CsvWriter {
  public:
    explicit CsvWriter(std::string path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void header(const std::vector<std::string>& names);
    void value(double v);
    void value(const std::string& v);
    void end_row();
    void close();

  private:
    void sep();
    std::string path_;
    std::ofstream out_;
    bool at_row_start_ = true;
    bool closed_ = false;
};

}  // namespace dfc
