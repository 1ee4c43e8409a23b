/// @file agreement.cpp

#include "medtrap/analytics/agreement.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"
#include "medtrap/core/types.hpp"

namespace medtrap::analytics {

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(text::trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(text::trim(cur));
    return out;
}

}  // namespace

void RatingMatrix::validate() const {
    if (ratings.size() != items.size()) throw ValidationError("ratings: row count differs from item count");
    const std::set<std::string> declared(categories.begin(), categories.end());
    for (const auto& row : ratings) {
        if (row.size() != raters.size()) throw ValidationError("ratings: ragged row");
        for (const auto& cell : row) {
            if (cell && !declared.empty() && !declared.count(*cell)) {
                throw ValidationError("ratings: value '" + *cell + "' is not a declared category");
            }
        }
    }
}

std::vector<std::string> RatingMatrix::category_set() const {
    if (!categories.empty()) return categories;
    std::set<std::string> seen;
    for (const auto& row : ratings) {
        for (const auto& cell : row) {
            if (cell) seen.insert(*cell);
        }
    }
    return {seen.begin(), seen.end()};
}

RatingMatrix RatingMatrix::from_rows(const std::vector<std::vector<std::string>>& rows,
                                     std::vector<std::string> categories) {
    RatingMatrix m;
    m.categories = std::move(categories);
    const auto width = rows.empty() ? 0 : rows.front().size();
    for (std::size_t r = 0; r < width; ++r) m.raters.push_back("rater-" + std::to_string(r + 1));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.items.push_back("item-" + std::to_string(i + 1));
        std::vector<std::optional<std::string>> row;
        for (const auto& v : rows[i]) row.emplace_back(v);
        m.ratings.push_back(std::move(row));
    }
    m.validate();
    return m;
}

RatingMatrix parse_rating_csv(std::string_view csv, const std::optional<std::string>& task_kind) {
    std::vector<std::vector<std::string>> lines;
    for (auto& raw : text::split(csv, '\n')) {
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (text::trim(raw).empty()) continue;
        lines.push_back(split_csv_line(raw));
    }
    if (lines.empty()) throw ValidationError("csv: no header");
    const auto& header = lines.front();
    RatingMatrix m;
    if (header.size() == 4 && header[0] == "item_id" && header[1] == "annotator_id" && header[2] == "task_kind" &&
        header[3] == "value") {
        std::map<std::string, std::size_t> item_ix, rater_ix;
        std::vector<std::tuple<std::string, std::string, std::string>> cells;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto& f = lines[i];
            if (f.size() != 4) throw ValidationError("csv: line " + std::to_string(i + 1) + " needs 4 fields");
            if (task_kind && f[2] != *task_kind) continue;
            if (!item_ix.count(f[0])) {
                item_ix[f[0]] = m.items.size();
                m.items.push_back(f[0]);
            }
            if (!rater_ix.count(f[1])) {
                rater_ix[f[1]] = m.raters.size();
                m.raters.push_back(f[1]);
            }
            cells.emplace_back(f[0], f[1], f[3]);
        }
        m.ratings.assign(m.items.size(), std::vector<std::optional<std::string>>(m.raters.size()));
        for (const auto& [item, rater, value] : cells) m.ratings[item_ix[item]][rater_ix[rater]] = value;
    } else {
        for (std::size_t c = 1; c < header.size(); ++c) m.raters.push_back(header[c]);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto& f = lines[i];
            if (f.size() != header.size()) throw ValidationError("csv: line " + std::to_string(i + 1) + " is ragged");
            m.items.push_back(f[0]);
            std::vector<std::optional<std::string>> row;
            for (std::size_t c = 1; c < f.size(); ++c) {
                row.push_back(f[c].empty() ? std::nullopt : std::optional<std::string>(f[c]));
            }
            m.ratings.push_back(std::move(row));
        }
    }
    m.validate();
    return m;
}

RatingMatrix read_rating_csv(const std::filesystem::path& path, const std::optional<std::string>& task_kind) {
    if (!std::filesystem::is_regular_file(path)) throw ValidationError("csv: file not found: " + path.string());
    return parse_rating_csv(read_file(path), task_kind);
}

Ac1Terms gwet_ac1_terms(const RatingMatrix& m) {
    m.validate();
    if (m.raters.size() < 2) throw std::invalid_argument("gwet_ac1: needs at least two raters");
    if (m.items.empty()) throw std::invalid_argument("gwet_ac1: needs at least one item");
    const auto cats = m.category_set();
    std::map<std::string, std::size_t> cat_ix;
    for (std::size_t k = 0; k < cats.size(); ++k) cat_ix[cats[k]] = k;

    Ac1Terms out;
    out.categories = cats.size();
    std::vector<double> pi(cats.size(), 0.0);
    double pa_sum = 0.0;
    std::size_t pa_items = 0;
    std::size_t pi_items = 0;
    for (const auto& row : m.ratings) {
        std::vector<double> counts(cats.size(), 0.0);
        double r = 0;
        for (const auto& cell : row) {
            if (!cell) continue;
            counts[cat_ix.at(*cell)] += 1;
            r += 1;
        }
        if (r >= 1) {
            for (std::size_t k = 0; k < cats.size(); ++k) pi[k] += counts[k] / r;
            ++pi_items;
        }
        if (r >= 2) {
            double agree = 0;
            for (double c : counts) agree += c * (c - 1);
            pa_sum += agree / (r * (r - 1));
            ++pa_items;
        }
    }
    if (pa_items == 0) throw std::invalid_argument("gwet_ac1: no item has two or more ratings");
    out.pa = pa_sum / static_cast<double>(pa_items);
    if (cats.size() < 2) {
        out.pe = 0.0;
        out.ac1 = 1.0;
        return out;
    }
    double pe = 0.0;
    for (double& p : pi) {
        p /= static_cast<double>(pi_items);
        pe += p * (1 - p);
    }
    out.pe = pe / static_cast<double>(cats.size() - 1);
    out.ac1 = (out.pa - out.pe) / (1.0 - out.pe);
    return out;
}

double gwet_ac1(const RatingMatrix& m) { return gwet_ac1_terms(m).ac1; }

}  // namespace medtrap::analytics
