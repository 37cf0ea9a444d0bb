#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hatelab::testing {

using CountRows = std::vector<std::vector<std::int64_t>>;

// Confusion matrices as printed (gold rows, predicted columns).
inline const CountRows kD1Matrix{{1538, 14, 371}, {17, 1800, 1054}, {539, 441, 9702}};
inline const CountRows kD2Matrix{{415, 861, 154}, {334, 18347, 509}, {43, 306, 3814}};
inline const CountRows kD3CvMatrix{{1601, 1285, 533}, {921, 2842, 1534}, {371, 1531, 4383}};

struct PrintedRates {
  std::string name;
  const CountRows* matrix;
  std::size_t row;
  double tp, fp, fn;
};

// Printed per-class percentages and the matrix row each one comes from.
inline const std::array<PrintedRates, 6> kPrintedRates{{
    {"Racism", &kD1Matrix, 0, 79.97, 26.58, 20.02},
    {"Sexism", &kD1Matrix, 1, 62.69, 20.17, 37.30},
    {"Hate", &kD2Matrix, 0, 29.02, 47.60, 70.97},
    {"Offensive", &kD2Matrix, 1, 95.60, 5.98, 4.40},
    {"Overtly", &kD3CvMatrix, 0, 46.82, 44.65, 53.18},
    {"Covertly", &kD3CvMatrix, 1, 53.65, 49.77, 46.34},
}};

}  // namespace hatelab::testing
