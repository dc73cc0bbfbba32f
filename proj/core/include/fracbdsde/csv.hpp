#pragma once

#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracbdsde {

// Minimal CSV emitter: header once, numeric rows at full precision.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns) : out_(path) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
        out_ << std::setprecision(17);
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
        n_cols_ = columns.size();
    }

    void row(const std::vector<double>& vals) {
        if (vals.size() != n_cols_) throw std::runtime_error("CsvWriter: column count mismatch");
        for (std::size_t i = 0; i < vals.size(); ++i) out_ << (i ? "," : "") << vals[i];
        out_ << "\n";
    }

    // First cell is a label (e.g. a functional name), the rest numeric.
    void row(const std::string& label, const std::vector<double>& vals) {
        if (vals.size() + 1 != n_cols_) throw std::runtime_error("CsvWriter: column count mismatch");
        out_ << label;
        for (double v : vals) out_ << "," << v;
        out_ << "\n";
    }

private:
    std::ofstream out_;
    std::size_t n_cols_ = 0;
};

}  // namespace fracbdsde
