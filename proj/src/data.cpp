#include "diproperm/data.hpp"

#include "diproperm/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace diproperm {

SamplePair::SamplePair(Matrix x_rows, Matrix y_rows, std::string label_x, std::string label_y)
    : x_(std::move(x_rows)), y_(std::move(y_rows)), label_x_(std::move(label_x)), label_y_(std::move(label_y)) {
    if (x_.rows() < 1 || y_.rows() < 1)
        throw EmptyGroupError("both groups need at least one observation (m=" + std::to_string(x_.rows()) +
                              ", n=" + std::to_string(y_.rows()) + ")");
    if (x_.cols() < 1) throw InvalidArgument("dimension must be at least 1");
    if (x_.cols() != y_.cols())
        throw InvalidArgument("dimension mismatch: X has " + std::to_string(x_.cols()) + " columns, Y has " +
                              std::to_string(y_.cols()));
    if (!x_.allFinite() || !y_.allFinite()) throw InvalidArgument("sample contains NaN or infinite entries");
}

PooledSample pool(const SamplePair& sp) {
    PooledSample out;
    out.z_rows.resize(sp.total(), sp.d());
    out.z_rows.topRows(sp.m()) = sp.x();
    out.z_rows.bottomRows(sp.n()) = sp.y();
    out.split_m = sp.m();
    out.label_x = sp.label_x();
    out.label_y = sp.label_y();
    return out;
}

SamplePair unpool(const PooledSample& pooled) {
    return SamplePair(pooled.z_rows.topRows(pooled.split_m),
                      pooled.z_rows.bottomRows(pooled.total() - pooled.split_m), pooled.label_x, pooled.label_y);
}

namespace {

struct Cell {
    std::string text;
    std::size_t row;  // 1-based file position
    std::size_t col;
};
using Table = std::vector<std::vector<Cell>>;

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            current.push_back(c);
        } else if (c == delim && !quoted) {
            fields.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(trim(current));
    return fields;
}

std::optional<double> to_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    double value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return value;
}

Table read_table(const std::string& text, std::optional<char> delimiter) {
    std::istringstream in(text);
    std::string line;
    Table table;
    std::size_t row = 0;
    char delim = delimiter.value_or('\0');
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (row == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        if (delim == '\0') delim = line.find('\t') != std::string::npos ? '\t' : ',';
        auto fields = split_line(line, delim);
        std::vector<Cell> cells;
        cells.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) cells.push_back({std::move(fields[c]), row, c + 1});
        table.push_back(std::move(cells));
    }
    if (table.empty()) throw ParseError("empty input", 1, 1);
    const std::size_t width = table.front().size();
    for (const auto& r : table)
        if (r.size() != width)
            throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(r.size()),
                             r.front().row, r.size() + 1);
    return table;
}

Table transposed(const Table& t) {
    Table out(t.front().size(), std::vector<Cell>(t.size()));
    for (std::size_t r = 0; r < t.size(); ++r)
        for (std::size_t c = 0; c < t[r].size(); ++c) out[c][r] = t[r][c];
    return out;
}

std::vector<std::string> read_label_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open label file " + path);
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty()) labels.push_back(line);
    }
    return labels;
}

}  // namespace

SamplePair parse_dataset(const std::string& text, const LoadOptions& options) {
    Table table = read_table(text, options.delimiter);
    if (options.transpose) table = transposed(table);
    const std::size_t width = table.front().size();

    std::optional<std::size_t> label_col;
    bool header = false;
    if (const auto* byname = std::get_if<LabelColumnName>(&options.labels)) {
        const auto& first = table.front();
        auto it = std::find_if(first.begin(), first.end(), [&](const Cell& c) { return c.text == byname->name; });
        if (it == first.end()) throw LabelError("label column '" + byname->name + "' not found in header");
        label_col = static_cast<std::size_t>(it - first.begin());
        header = true;
    } else if (const auto* byindex = std::get_if<LabelColumnIndex>(&options.labels)) {
        if (byindex->index >= width)
            throw LabelError("label column index " + std::to_string(byindex->index) + " out of range");
        label_col = byindex->index;
    }
    if (options.id_column && *options.id_column >= width) throw InvalidArgument("id column out of range");

    auto is_feature = [&](std::size_t c) { return c != label_col && c != options.id_column; };
    if (!header) {
        for (std::size_t c = 0; c < width; ++c)
            if (is_feature(c) && !to_number(table.front()[c].text)) header = true;
    }

    const std::size_t first_row = header ? 1 : 0;
    const std::size_t n_obs = table.size() - first_row;
    std::size_t d = 0;
    for (std::size_t c = 0; c < width; ++c) d += is_feature(c) ? 1 : 0;
    if (n_obs == 0) throw EmptyGroupError("no observations in input");
    if (d == 0) throw ParseError("no feature columns", table.front().front().row, 1);

    std::vector<std::string> labels;
    if (const auto* file = std::get_if<LabelFile>(&options.labels)) {
        labels = read_label_file(file->path);
        if (labels.size() != n_obs)
            throw LabelError("label file has " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(n_obs) + " observations");
    } else {
        for (std::size_t r = first_row; r < table.size(); ++r) labels.push_back(table[r][*label_col].text);
    }

    Matrix values(static_cast<Index>(n_obs), static_cast<Index>(d));
    for (std::size_t r = first_row; r < table.size(); ++r) {
        Index j = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (!is_feature(c)) continue;
            const Cell& cell = table[r][c];
            auto v = to_number(cell.text);
            if (!v) throw ParseError("non-numeric cell '" + cell.text + "'", cell.row, cell.col);
            if (!std::isfinite(*v)) throw ParseError("non-finite cell '" + cell.text + "'", cell.row, cell.col);
            values(static_cast<Index>(r - first_row), j++) = *v;
        }
    }

    std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() != 2)
        throw LabelError("expected exactly 2 distinct labels, found " + std::to_string(distinct.size()));
    std::string label_x = *distinct.begin();
    std::string label_y = *std::next(distinct.begin());
    if (options.positive_label) {
        if (!distinct.contains(*options.positive_label))
            throw LabelError("positive label '" + *options.positive_label + "' does not occur");
        if (*options.positive_label != label_x) std::swap(label_x, label_y);
    }

    std::vector<Index> xs, ys;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] == label_x ? xs : ys).push_back(static_cast<Index>(i));
    return SamplePair(values(xs, Eigen::all), values(ys, Eigen::all), label_x, label_y);
}

SamplePair load_dataset(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset(buffer.str(), options);
}

std::string to_csv(const SamplePair& sp) {
    std::ostringstream out;
    out.precision(17);
    out << "group";
    for (Index j = 0; j < sp.d(); ++j) out << ",f" << (j + 1);
    out << '\n';
    auto rows = [&](const Matrix& m, const std::string& label) {
        for (Index i = 0; i < m.rows(); ++i) {
            out << label;
            for (Index j = 0; j < m.cols(); ++j) out << ',' << m(i, j);
            out << '\n';
        }
    };
    rows(sp.x(), sp.label_x());
    rows(sp.y(), sp.label_y());
    return out.str();
}

}  // namespace diproperm
