#include "sfv/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sfv/error.hpp"

namespace sfv::csv {

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw Error("failed to format a floating-point value");
    return {buf, end};
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

} // namespace

bool parse_double(std::string_view cell, double& out) {
    cell = trim(cell);
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc{} && ptr == cell.data() + cell.size();
}

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ostringstream os;
    write_matrix(os, m);
    write_text(path, os.str());
}

void write_vector(const std::filesystem::path& path, const Eigen::VectorXd& v) {
    std::ostringstream os;
    for (Eigen::Index i = 0; i < v.size(); ++i) os << format_double(v[i]) << '\n';
    write_text(path, os.str());
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool first_content_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (line_no == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
        if (view.empty()) continue;

        auto cells = split_row(view);
        std::vector<double> values(cells.size());
        std::size_t bad_col = cells.size();
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_double(cells[c], values[c])) {
                bad_col = c;
                break;
            }
        }
        if (first_content_row) {
            first_content_row = false;
            width = cells.size();
            if (bad_col != cells.size()) continue; // header
        }
        if (cells.size() != width) {
            throw ParseError(path.string() + ": ragged row at line " + std::to_string(line_no) + " (expected " +
                             std::to_string(width) + " columns, found " + std::to_string(cells.size()) + ")");
        }
        if (bad_col != cells.size()) {
            throw ParseError(path.string() + ": non-numeric cell at line " + std::to_string(line_no) +
                             ", column " + std::to_string(bad_col + 1));
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError(path.string() + ": no numeric rows");

    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

Eigen::VectorXd read_vector(const std::filesystem::path& path) {
    Eigen::MatrixXd m = read_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw ParseError(path.string() + ": expected a single column of values");
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

} // namespace sfv::csv
