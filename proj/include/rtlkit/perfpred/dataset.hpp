#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rtlkit/common/io.hpp"
#include "rtlkit/common/random.hpp"
#include "rtlkit/common/text.hpp"
#include "rtlkit/embedcore/rte2.hpp"

namespace rtlkit::perfpred {

enum class Target { Area, Delay };

inline std::string to_string(Target t) { return t == Target::Area ? "area" : "delay"; }

inline Target target_from_string(const std::string& s) {
    if (s == "area") return Target::Area;
    if (s == "delay") return Target::Delay;
    fail(ErrorKind::InvalidInput, "unknown target '" + s + "' (expected area or delay)");
}

/// Embeddings aligned with synthesized area and delay.
/// `ids` keeps the source row of each sample so splits stay traceable.
struct RegressionDataset {
    embedcore::EmbeddingMatrix embeddings;
    std::vector<double> area;
    std::vector<double> delay;
    std::vector<std::size_t> ids;

    std::size_t size() const { return area.size(); }
    std::size_t features() const { return embeddings.dim; }

    const std::vector<double>& target(Target t) const { return t == Target::Area ? area : delay; }

    void validate() const {
        require(embeddings.dim > 0, ErrorKind::Precondition, "dataset has no feature dimensions");
        require(embeddings.count() == area.size() && area.size() == delay.size() && ids.size() == area.size(),
                ErrorKind::Precondition, "dataset columns have different lengths");
        for (std::size_t i = 0; i < size(); ++i)
            require(std::isfinite(area[i]) && std::isfinite(delay[i]), ErrorKind::NumericError,
                    "non-finite target at row " + std::to_string(ids[i]));
    }

    RegressionDataset subset(const std::vector<std::size_t>& rows) const {
        RegressionDataset out;
        out.embeddings.dim = embeddings.dim;
        for (std::size_t r : rows) {
            auto src = embeddings.row(r);
            out.embeddings.values.insert(out.embeddings.values.end(), src.begin(), src.end());
            out.area.push_back(area[r]);
            out.delay.push_back(delay[r]);
            out.ids.push_back(ids[r]);
        }
        return out;
    }
};

struct PerfRow {
    std::size_t id = 0;
    double area = 0;
    double delay = 0;
};

namespace detail {

inline double parse_double(std::string_view field, std::size_t line) {
    const auto t = text::trim(field);
    double v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        fail(ErrorKind::ParseError, "line " + std::to_string(line) + ": '" + std::string(t) + "' is not a number");
    return v;
}

} // namespace detail

/// Parses `id,area,delay` rows. A header line is required.
inline std::vector<PerfRow> parse_perf_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    std::vector<PerfRow> rows;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        std::vector<std::string_view> cols;
        std::string_view rest = line;
        for (auto pos = rest.find(','); pos != std::string_view::npos; pos = rest.find(',')) {
            cols.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        cols.push_back(rest);
        if (header) {
            require(cols.size() == 3 && text::trim(cols[0]) == "id" && text::trim(cols[1]) == "area" &&
                        text::trim(cols[2]) == "delay",
                    ErrorKind::ParseError, "perf CSV header must be 'id,area,delay'");
            header = false;
            continue;
        }
        require(cols.size() == 3, ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected 3 columns");
        const double id = detail::parse_double(cols[0], lineno);
        require(id >= 0 && id == std::floor(id), ErrorKind::ParseError,
                "line " + std::to_string(lineno) + ": id must be a non-negative integer");
        rows.push_back({static_cast<std::size_t>(id), detail::parse_double(cols[1], lineno),
                        detail::parse_double(cols[2], lineno)});
    }
    require(!header, ErrorKind::ParseError, "perf CSV is empty");
    return rows;
}

/// Joins CSV rows with embedding rows; `id` is the row index in the embedding file.
inline RegressionDataset join_dataset(const std::vector<PerfRow>& rows, const embedcore::EmbeddingMatrix& emb) {
    RegressionDataset ds;
    ds.embeddings.dim = emb.dim;
    std::vector<bool> used(emb.count(), false);
    for (const auto& r : rows) {
        require(r.id < emb.count(), ErrorKind::InvalidInput,
                "perf row id " + std::to_string(r.id) + " has no embedding (file holds " +
                    std::to_string(emb.count()) + ")");
        require(!used[r.id], ErrorKind::InvalidInput, "duplicate perf row id " + std::to_string(r.id));
        used[r.id] = true;
        auto src = emb.row(r.id);
        ds.embeddings.values.insert(ds.embeddings.values.end(), src.begin(), src.end());
        ds.area.push_back(r.area);
        ds.delay.push_back(r.delay);
        ds.ids.push_back(r.id);
    }
    ds.validate();
    return ds;
}

inline RegressionDataset load_dataset(const std::filesystem::path& csv, const std::filesystem::path& rte2) {
    return join_dataset(parse_perf_csv(read_file(csv)), embedcore::read_rte2(rte2));
}

inline std::string write_perf_csv(const RegressionDataset& ds) {
    std::ostringstream out;
    out.precision(17);
    out << "id,area,delay\n";
    for (std::size_t i = 0; i < ds.size(); ++i) out << ds.ids[i] << ',' << ds.area[i] << ',' << ds.delay[i] << '\n';
    return out.str();
}

/// Seeded shuffle, then the first floor(0.8 n) rows train and the rest test.
inline std::pair<RegressionDataset, RegressionDataset> split_80_20(const RegressionDataset& ds, std::uint64_t seed) {
    ds.validate();
    require(ds.size() >= 5, ErrorKind::Precondition, "an 80:20 split needs at least 5 samples");
    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    const std::size_t n_train = ds.size() * 4 / 5;
    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return {ds.subset(train), ds.subset(test)};
}

} // namespace rtlkit::perfpred
