#include "derham/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace derham {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

CsrMatrix read_matrix_market(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("matrix market: empty input");
    }
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix" ||
        lower(format) != "coordinate") {
        throw std::runtime_error("matrix market: only coordinate matrices are supported");
    }
    field = lower(field);
    symmetry = lower(symmetry);
    const bool pattern = field == "pattern";
    if (!pattern && field != "real" && field != "integer" && field != "double") {
        throw std::runtime_error("matrix market: unsupported field '" + field + "'");
    }
    const bool symmetric = symmetry == "symmetric";
    const bool skew = symmetry == "skew-symmetric";
    if (!symmetric && !skew && symmetry != "general") {
        throw std::runtime_error("matrix market: unsupported symmetry '" + symmetry + "'");
    }

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') {
            break;
        }
    }
    std::istringstream sizes(line);
    long long nrows = 0, ncols = 0, nnz = 0;
    if (!(sizes >> nrows >> ncols >> nnz)) {
        throw std::runtime_error("matrix market: bad size line");
    }

    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(symmetric || skew ? 2 * nnz : nnz));
    for (long long e = 0; e < nnz; ++e) {
        long long i = 0, j = 0;
        double v = 1.0;
        if (!(in >> i >> j)) {
            throw std::runtime_error("matrix market: truncated entry list");
        }
        if (!pattern && !(in >> v)) {
            throw std::runtime_error("matrix market: missing value");
        }
        const auto r = static_cast<Index>(i - 1);
        const auto c = static_cast<Index>(j - 1);
        entries.push_back({r, c, v});
        if ((symmetric || skew) && r != c) {
            entries.push_back({c, r, skew ? -v : v});
        }
    }
    return CsrMatrix::from_triplets(static_cast<Index>(nrows), static_cast<Index>(ncols),
                                    std::move(entries));
}

CsrMatrix read_matrix_market(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CsrMatrix& a)
{
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    out << std::setprecision(17);
    for (Index i = 0; i < a.rows(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t q = 0; q < cols.size(); ++q) {
            out << (i + 1) << ' ' << (cols[q] + 1) << ' ' << vals[q] << '\n';
        }
    }
}

void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& a)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    write_matrix_market(out, a);
}

}  // namespace derham
