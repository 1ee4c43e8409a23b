/// @file agreement.hpp
/// @brief Rating matrices and Gwet's AC1 chance-corrected agreement.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace medtrap::analytics {

/// items × raters table of categorical ratings. A cell may be empty when a
/// rater skipped an item.
struct RatingMatrix {
    std::vector<std::string> items;
    std::vector<std::string> raters;
    std::vector<std::vector<std::optional<std::string>>> ratings;  // [item][rater]
    /// Declared category set; empty means "the categories observed".
    std::vector<std::string> categories;

    /// Throws ValidationError when the table is ragged or a rating lies
    /// outside the declared categories.
    void validate() const;
    std::vector<std::string> category_set() const;

    static RatingMatrix from_rows(const std::vector<std::vector<std::string>>& rows,
                                  std::vector<std::string> categories = {});
};

/// Parses either the long export format (header item_id,annotator_id,
/// task_kind,value) or a wide table (first column item id, one column per
/// rater). `task_kind` filters long-format rows when given.
RatingMatrix parse_rating_csv(std::string_view csv, const std::optional<std::string>& task_kind = std::nullopt);
RatingMatrix read_rating_csv(const std::filesystem::path& path,
                             const std::optional<std::string>& task_kind = std::nullopt);

struct Ac1Terms {
    double pa = 0.0;
    double pe = 0.0;
    double ac1 = 0.0;
    std::size_t categories = 0;
};

/// AC1 = (Pa − Pe)/(1 − Pe), with Pa the mean per-item pairwise agreement
/// over items rated at least twice, π_k the mean per-item proportion of
/// category k and Pe = Σ π_k(1 − π_k)/(K − 1). A single category gives 1.
/// Requires at least two raters and one item.
Ac1Terms gwet_ac1_terms(const RatingMatrix& m);
double gwet_ac1(const RatingMatrix& m);

}  // namespace medtrap::analytics
