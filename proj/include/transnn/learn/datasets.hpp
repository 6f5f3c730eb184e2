#pragma once

// Datasets: synthetic two-cluster classification and CSV loading.
//
// CSV layout: a header row, then one sample per row. Columns whose name
// starts with 'x' are inputs; columns starting with 'y' are regression
// targets; a single column named 'label' holds class indices instead.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "transnn/learn/train.hpp"
#include "transnn/types.hpp"

namespace transnn::learn {

/// Two Gaussian clouds in the plane centred at (-c, -c) and (c, c), c =
/// separation / (2 sqrt 2), with isotropic standard deviation `spread`.
/// Samples alternate between the classes.
inline Dataset make_two_clusters(std::size_t samples, std::uint64_t seed, double separation = 4.0,
                                 double spread = 0.6) {
    if (samples < 2) throw ValidationError("samples", "need at least two samples");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, spread);
    const double c = separation / (2.0 * std::sqrt(2.0));
    Dataset ds{Matrix(samples, 2), Matrix(samples, 1)};
    for (std::size_t i = 0; i < samples; ++i) {
        const std::size_t label = i % 2;
        const double centre = label ? c : -c;
        ds.inputs(i, 0) = centre + noise(rng);
        ds.inputs(i, 1) = centre + noise(rng);
        ds.targets(i, 0) = static_cast<double>(label);
    }
    return ds;
}

/// Splits off the last `fraction` of the rows as a validation set.
inline std::pair<Dataset, Dataset> split(const Dataset& data, double fraction) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw ValidationError("validation_fraction", "must lie in [0,1)");
    const auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(data.size())));
    const std::size_t n_train = data.size() - n_val;
    auto take = [&](std::size_t lo, std::size_t hi) {
        Dataset d{Matrix(hi - lo, data.inputs.cols()), Matrix(hi - lo, data.targets.cols())};
        for (std::size_t r = lo; r < hi; ++r) {
            std::copy(data.inputs.row(r).begin(), data.inputs.row(r).end(), d.inputs.row(r - lo).begin());
            std::copy(data.targets.row(r).begin(), data.targets.row(r).end(), d.targets.row(r - lo).begin());
        }
        return d;
    };
    return {take(0, n_train), take(n_train, data.size())};
}

inline Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> xcols, ycols;
    std::size_t ncols = 0;
    bool labels = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        break;
    }
    if (line.empty()) throw ValidationError("header", "dataset has no header row");
    {
        std::istringstream hs(line);
        std::string name;
        for (std::size_t c = 0; std::getline(hs, name, ','); ++c, ++ncols) {
            if (!name.empty() && name.front() == 'x') xcols.push_back(c);
            else if (!name.empty() && name.front() == 'y') ycols.push_back(c);
            else if (name == "label") {
                ycols.push_back(c);
                labels = true;
            } else {
                throw ValidationError("line " + std::to_string(line_no), "unrecognised column '" + name + "'");
            }
        }
    }
    if (xcols.empty()) throw ValidationError("header", "no input columns (names starting with 'x')");
    if (ycols.empty()) throw ValidationError("header", "no target columns ('y*' or 'label')");
    if (labels && ycols.size() != 1) throw ValidationError("header", "'label' cannot be combined with 'y' columns");

    std::vector<double> xs, ys;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<double> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
                if (!std::isfinite(v)) throw std::invalid_argument(cell);
                cells.push_back(v);
            } catch (const std::logic_error&) {
                throw ValidationError("line " + std::to_string(line_no), "malformed or non-finite number '" + cell + "'");
            }
        }
        if (cells.size() != ncols) {
            throw ValidationError("line " + std::to_string(line_no),
                                  "expected " + std::to_string(ncols) + " columns, found " + std::to_string(cells.size()));
        }
        for (std::size_t c : xcols) xs.push_back(cells[c]);
        for (std::size_t c : ycols) ys.push_back(cells[c]);
        ++rows;
    }
    if (rows == 0) throw ValidationError("dataset", "no samples");
    Dataset ds{Matrix(rows, xcols.size()), Matrix(rows, ycols.size())};
    ds.inputs.data() = std::move(xs);
    ds.targets.data() = std::move(ys);
    return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open file");
    return read_dataset_csv(in);
}

/// Writes inputs as x0.. and targets as y0.. (or `label` when `labels`).
inline void write_dataset_csv(std::ostream& out, const Dataset& data, bool labels) {
    for (std::size_t c = 0; c < data.inputs.cols(); ++c) out << (c ? "," : "") << 'x' << c;
    if (labels) out << ",label";
    else
        for (std::size_t c = 0; c < data.targets.cols(); ++c) out << ",y" << c;
    out << '\n' << std::setprecision(17);
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < data.inputs.cols(); ++c) out << (c ? "," : "") << data.inputs(r, c);
        for (std::size_t c = 0; c < data.targets.cols(); ++c) out << ',' << data.targets(r, c);
        out << '\n';
    }
}

}  // namespace transnn::learn
