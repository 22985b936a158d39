#pragma once
// Published benchmark rows for the segmentation model comparison, as printed
// (three decimals). The second block repeats the two nano models under the
// two contrast pre-processing variants.

#include <array>
#include <string_view>

namespace reference {

struct ModelRow {
    std::string_view model;
    std::string_view preprocessing;  ///< "" none, "B" binarized, "H" histogram equalized
    double f1, precision, recall, map50, map50_95;
};

inline constexpr std::array<ModelRow, 12> kModelComparison{{
    {"8n-seg", "", 0.661, 0.644, 0.678, 0.678, 0.468},
    {"8s-seg", "", 0.677, 0.719, 0.639, 0.668, 0.457},
    {"8m-seg", "", 0.656, 0.726, 0.599, 0.652, 0.441},
    {"8l-seg", "", 0.651, 0.685, 0.621, 0.637, 0.391},
    {"8x-seg", "", 0.607, 0.612, 0.603, 0.610, 0.369},
    {"9c-seg", "", 0.626, 0.742, 0.542, 0.610, 0.361},
    {"9e-seg", "", 0.581, 0.603, 0.560, 0.571, 0.347},
    {"11n-seg", "", 0.666, 0.727, 0.614, 0.655, 0.458},
    {"11s-seg", "", 0.644, 0.660, 0.628, 0.635, 0.447},
    {"11m-seg", "", 0.624, 0.653, 0.598, 0.615, 0.406},
    {"11l-seg", "", 0.617, 0.579, 0.661, 0.627, 0.399},
    {"11x-seg", "", 0.585, 0.674, 0.516, 0.583, 0.361},
}};

inline constexpr std::array<ModelRow, 6> kPreprocessingComparison{{
    {"8n-seg", "", 0.661, 0.644, 0.678, 0.678, 0.468},
    {"8n-seg", "B", 0.660, 0.720, 0.610, 0.636, 0.399},
    {"8n-seg", "H", 0.675, 0.733, 0.625, 0.670, 0.460},
    {"11n-seg", "", 0.666, 0.727, 0.614, 0.655, 0.458},
    {"11n-seg", "B", 0.667, 0.687, 0.649, 0.628, 0.385},
    {"11n-seg", "H", 0.684, 0.767, 0.617, 0.665, 0.442},
}};

}  // namespace reference
