#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <variant>

namespace diproperm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Two samples X (m x d) and Y (n x d), one observation per row.
/// Immutable once built; every entry is finite.
class SamplePair {
public:
    SamplePair(Matrix x_rows, Matrix y_rows, std::string label_x = "X", std::string label_y = "Y");

    const Matrix& x() const noexcept { return x_; }
    const Matrix& y() const noexcept { return y_; }
    Index m() const noexcept { return x_.rows(); }
    Index n() const noexcept { return y_.rows(); }
    Index d() const noexcept { return x_.cols(); }
    Index total() const noexcept { return m() + n(); }
    const std::string& label_x() const noexcept { return label_x_; }
    const std::string& label_y() const noexcept { return label_y_; }

    Vector mean_x() const { return x_.colwise().mean().transpose(); }
    Vector mean_y() const { return y_.colwise().mean().transpose(); }

private:
    Matrix x_;
    Matrix y_;
    std::string label_x_;
    std::string label_y_;
};

/// Rows of X followed by rows of Y; the first split_m rows form group 1.
struct PooledSample {
    Matrix z_rows;
    Index split_m = 0;
    std::string label_x = "X";
    std::string label_y = "Y";

    Index total() const noexcept { return z_rows.rows(); }
    Index d() const noexcept { return z_rows.cols(); }
};

PooledSample pool(const SamplePair& sp);
SamplePair unpool(const PooledSample& pooled);

struct LabelColumnName {
    std::string name;
};
struct LabelColumnIndex {
    std::size_t index;  ///< 0-based, counted after any transpose
};
struct LabelFile {
    std::string path;  ///< one label per line, in observation order
};
using LabelSpec = std::variant<LabelColumnName, LabelColumnIndex, LabelFile>;

struct LoadOptions {
    LabelSpec labels = LabelColumnIndex{0};
    /// File stores features as rows and observations as columns.
    bool transpose = false;
    /// Label that becomes group X; default is the lexicographically smaller one.
    std::optional<std::string> positive_label;
    /// Column (0-based, after transpose) of row identifiers to ignore.
    std::optional<std::size_t> id_column;
    /// Field separator; detected from the first line (tab, otherwise comma) when unset.
    std::optional<char> delimiter;
};

/// Reads a delimited numeric table with a label per observation. A header row
/// is recognised when any of its non-label, non-id cells is not a number.
SamplePair load_dataset(const std::string& path, const LoadOptions& options = {});

/// Same as load_dataset but parses already-read text.
SamplePair parse_dataset(const std::string& text, const LoadOptions& options = {});

/// Writes the pair as CSV with a header: group,f1,...,fd (X rows first).
std::string to_csv(const SamplePair& sp);

}  // namespace diproperm
