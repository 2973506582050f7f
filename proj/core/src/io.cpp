#include "bomm/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace bomm {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    double v = 0.0;
    auto res = std::from_chars(text.data() + b, text.data() + e, v);
    if (res.ec != std::errc() || res.ptr != text.data() + e)
        throw InvalidDataError("cannot parse number from '" + text + "'");
    return v;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Table read_table(std::istream& is) {
    Table t;
    std::string line;
    if (!std::getline(is, line)) throw InvalidDataError("empty CSV input");
    t.header = split_csv(strip_cr(line));
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != t.header.size()) {
            std::ostringstream os;
            os << "CSV line " << lineno << " has " << cells.size() << " fields, header has "
               << t.header.size();
            throw InvalidDataError(os.str());
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_header(std::ostream& os, std::size_t d, bool with_f) {
    for (std::size_t l = 0; l < d; ++l) os << (l ? "," : "") << 'x' << (l + 1);
    if (with_f) os << ",f";
    os << '\n';
}

}  // namespace

void write_design_csv(std::ostream& os, const MatrixXd& points) {
    write_header(os, static_cast<std::size_t>(points.cols()), false);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index l = 0; l < points.cols(); ++l) os << (l ? "," : "") << format_double(points(i, l));
        os << '\n';
    }
}

MatrixXd read_design_csv(std::istream& is) {
    auto t = read_table(is);
    MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t l = 0; l < t.header.size(); ++l)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = t.rows[i][l];
    return m;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    const auto& p = data.design().points();
    write_header(os, data.dims(), true);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index l = 0; l < p.cols(); ++l) os << format_double(p(i, l)) << ',';
        os << format_double(data.responses()[i]) << '\n';
    }
}

Dataset read_dataset_csv(std::istream& is) {
    auto t = read_table(is);
    if (t.header.size() < 2 || t.header.back() != "f")
        throw InvalidDataError("dataset CSV needs header x1,...,xd,f");
    const auto d = static_cast<Eigen::Index>(t.header.size() - 1);
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    MatrixXd x(n, d);
    VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index l = 0; l < d; ++l) x(i, l) = t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
        f[i] = t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
    }
    return Dataset(DesignMatrix(std::move(x)), std::move(f));
}

std::string domain_to_json(const Domain& dom) {
    nlohmann::json j;
    j["lower"] = dom.lower();
    j["upper"] = dom.upper();
    return j.dump();
}

Domain domain_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        return Domain(j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidDataError(std::string("malformed domain JSON: ") + e.what());
    }
}

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidDataError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidDataError("cannot write '" + path + "'");
    return out;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
    auto in = open_in(path);
    return read_dataset_csv(in);
}

void save_dataset(const std::string& path, const Dataset& data) {
    auto out = open_out(path);
    write_dataset_csv(out, data);
}

Domain load_domain(const std::string& path) {
    auto in = open_in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return domain_from_json(ss.str());
}

void save_domain(const std::string& path, const Domain& dom) {
    auto out = open_out(path);
    out << domain_to_json(dom) << '\n';
}

}  // namespace bomm
