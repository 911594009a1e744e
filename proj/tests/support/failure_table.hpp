#pragma once

#include <array>

namespace endorse::testing {

struct FailureTableRow {
  int n;
  double half;   // adversary ratio 1/2
  double third;  // adversary ratio 1/3
};

/// Reference endorsement-group failure probabilities, n = 10..30.
inline constexpr std::array<FailureTableRow, 21> kFailureTable = {{
    {10, 5.8594e-03, 1.6936e-03}, {11, 3.4180e-03, 9.0326e-04}, {12, 1.9531e-03, 4.7983e-04},
    {13, 9.7656e-04, 2.5389e-04}, {14, 5.4932e-04, 1.3461e-04}, {15, 3.0518e-04, 7.1295e-05},
    {16, 1.5259e-04, 3.7724e-05}, {17, 8.3923e-05, 1.9971e-05}, {18, 4.5776e-05, 1.0570e-05},
    {19, 2.2888e-05, 5.5929e-06}, {20, 1.2398e-05, 2.9598e-06}, {21, 6.6757e-06, 1.5662e-06},
    {22, 3.3379e-06, 8.2873e-07}, {23, 1.7881e-06, 4.3852e-07}, {24, 9.5367e-07, 2.3204e-07},
    {25, 4.7684e-07, 1.2278e-07}, {26, 2.5332e-07, 6.4968e-08}, {27, 1.3411e-07, 3.4377e-08},
    {28, 6.7055e-08, 1.8190e-08}, {29, 3.5390e-08, 9.6249e-09}, {30, 1.8626e-08, 5.0929e-09},
}};

}  // namespace endorse::testing
