#pragma once

// Published optimal-test tables for five Bernoulli hypothesis pairs at
// alpha = beta in {0.1, 0.05, 0.025, 0.01, 0.005, 0.001, 0.0005}.
// SPRT fields are absent for the symmetric pair (0.45, 0.55).

#include <array>
#include <optional>

namespace kwseq::reference {

inline constexpr std::array<double, 7> levels{0.1, 0.05, 0.025, 0.01, 0.005, 0.001, 0.0005};

struct SprtColumn {
    double log_lower;  // printed as "log A"
    double log_upper;  // printed as "log B"
    double asn;
    int q99;
    double r;
    double qr;
};

struct Cell {
    double level;
    double theta_star;
    double lambda0;
    double lambda1;
    int h;
    double asn;
    double delta;
    int q99;
    int fss;
    double r;
    double qr;
    std::optional<SprtColumn> sprt;
};

struct Table {
    double theta0;
    double theta1;
    std::array<Cell, 7> cells;
};

inline const std::array<Table, 5> tables{{
    {0.05, 0.15,
     {{{0.1, 0.0768, 157.70, 193.35, 128, 38.62, -4e-8, 89, 60, 1.55, 0.67, SprtColumn{-2.13, 1.85, 40.53, 149, 1.48, 0.40}},
       {0.05, 0.0823, 356.55, 430.27, 182, 64.75, 1e-4, 134, 93, 1.44, 0.69, SprtColumn{-2.90, 2.59, 71.93, 269, 1.29, 0.35}},
       {0.025, 0.0848, 785.75, 952.99, 237, 93.79, 9e-5, 187, 136, 1.45, 0.73, SprtColumn{-3.60, 3.27, 109.81, 414, 1.24, 0.33}},
       {0.01, 0.0865, 2067.24, 2512.30, 302, 134.33, 4e-5, 244, 181, 1.35, 0.74, SprtColumn{-4.54, 4.22, 173.09, 660, 1.05, 0.27}},
       {0.005, 0.0874, 4334.60, 5183.48, 345, 167.10, 4e-5, 291, 224, 1.34, 0.77, SprtColumn{-5.24, 4.91, 228.77, 884, 0.98, 0.25}},
       {0.001, 0.0885, 22957.0, 27541.8, 465, 246.23, -3e-6, 397, 322, 1.31, 0.81, SprtColumn{-6.85, 6.53, 388.01, 1502, 0.83, 0.21}},
       {0.0005, 0.0888, 46319.1, 56073.6, 508, 281.64, -4e-5, 442, 365, 1.30, 0.83, SprtColumn{-7.55, 7.22, 469.32, 1819, 0.78, 0.20}}}}},
    {0.1, 0.2,
     {{{0.1, 0.1364, 246.64, 275.38, 232, 56.45, 5e-5, 135, 86, 1.52, 0.64, SprtColumn{-2.13, 1.95, 59.48, 224, 1.45, 0.38}},
       {0.05, 0.1394, 557.46, 620.37, 308, 95.03, 9e-7, 205, 135, 1.42, 0.66, SprtColumn{-2.88, 2.70, 106.66, 410, 1.27, 0.33}},
       {0.025, 0.1409, 1204.68, 1343.38, 384, 138.06, 9e-5, 274, 190, 1.38, 0.69, SprtColumn{-3.60, 3.42, 163.68, 636, 1.15, 0.30}},
       {0.01, 0.1420, 3212.66, 3595.28, 480, 198.54, 5e-7, 364, 272, 1.37, 0.75, SprtColumn{-4.53, 4.35, 258.59, 1007, 1.05, 0.27}},
       {0.005, 0.1425, 6701.95, 7471.57, 549, 246.92, 2e-5, 434, 328, 1.33, 0.76, SprtColumn{-5.24, 5.04, 342.82, 1337, 0.96, 0.25}},
       {0.001, 0.1432, 35404.1, 39608.9, 721, 364.39, 2e-5, 592, 479, 1.31, 0.81, SprtColumn{-6.85, 6.66, 583.22, 2280, 0.82, 0.21}},
       {0.0005, 0.1434, 72301.3, 80459.6, 783, 416.74, 4e-5, 657, 541, 1.30, 0.82, SprtColumn{-7.54, 7.35, 705.82, 2759, 0.77, 0.20}}}}},
    {0.2, 0.3,
     {{{0.1, 0.2435, 381.04, 403.11, 414, 84.43, 2e-5, 204, 127, 1.50, 0.62, SprtColumn{-2.12, 2.05, 89.41, 346, 1.42, 0.37}},
       {0.05, 0.2450, 866.23, 912.57, 539, 142.50, 1e-5, 309, 204, 1.43, 0.66, SprtColumn{-2.88, 2.78, 160.30, 627, 1.27, 0.33}},
       {0.025, 0.2457, 1870.27, 1971.23, 653, 206.73, 1e-8, 410, 289, 1.40, 0.70, SprtColumn{-3.59, 3.51, 247.69, 968, 1.17, 0.30}},
       {0.01, 0.2462, 4985.94, 5256.63, 786, 297.74, 1e-7, 547, 402, 1.35, 0.73, SprtColumn{-4.53, 4.44, 389.73, 1527, 1.03, 0.26}},
       {0.005, 0.2464, 10346.1, 10880.4, 895, 370.24, 2e-5, 649, 495, 1.34, 0.76, SprtColumn{-5.23, 5.14, 517.48, 2027, 0.96, 0.24}},
       {0.001, 0.2468, 54837.5, 57566.7, 1133, 546.67, 1e-5, 886, 713, 1.30, 0.80, SprtColumn{-6.84, 6.75, 880.57, 3453, 0.81, 0.21}},
       {0.0005, 0.2469, 111392, 117078, 1242, 625.28, 1e-5, 989, 806, 1.29, 0.82, SprtColumn{-7.54, 7.44, 1066.27, 4181, 0.76, 0.19}}}}},
    {0.4, 0.5,
     {{{0.1, 0.4490, 519.98, 524.39, 575, 111.82, -6e-6, 272, 168, 1.50, 0.62, SprtColumn{-2.12, 2.10, 118.79, 465, 1.41, 0.36}},
       {0.05, 0.4493, 1177.67, 1186.52, 744, 189.19, -2e-5, 409, 268, 1.42, 0.66, SprtColumn{-2.86, 2.85, 213.16, 835, 1.26, 0.32}},
       {0.025, 0.4494, 2540.72, 2561.23, 893, 274.56, 6e-7, 546, 384, 1.40, 0.70, SprtColumn{-3.58, 3.57, 330.10, 1293, 1.16, 0.30}},
       {0.01, 0.4494, 6804.60, 6853.52, 1082, 395.75, 3e-5, 726, 535, 1.35, 0.74, SprtColumn{-4.51, 4.50, 519.05, 2037, 1.03, 0.26}},
       {0.005, 0.4495, 14096.5, 14170.5, 1231, 491.95, 8e-5, 862, 655, 1.33, 0.76, SprtColumn{-5.21, 5.20, 688.86, 2703, 0.95, 0.24}},
       {0.001, 0.4495, 74239.7, 74851.8, 1558, 726.33, 1e-4, 1177, 944, 1.30, 0.80, SprtColumn{-6.82, 6.81, 1172.59, 4605, 0.81, 0.21}},
       {0.0005, 0.4495, 151569, 152375, 1698, 830.78, 8e-5, 1313, 1071, 1.29, 0.82, SprtColumn{-7.52, 7.51, 1420.01, 5576, 0.75, 0.19}}}}},
    {0.45, 0.55,
     {{{0.1, 0.5000, 526.61, 526.61, 571, 112.71, 0.0, 274, 163, 1.45, 0.59, std::nullopt},
       {0.05, 0.5000, 1193.78, 1193.78, 733, 191.27, 0.0, 414, 269, 1.41, 0.65, std::nullopt},
       {0.025, 0.5000, 2577.11, 2577.11, 887, 277.26, 6e-14, 551, 383, 1.38, 0.70, std::nullopt},
       {0.01, 0.5000, 6878.97, 6878.97, 1081, 399.83, -1e-13, 733, 539, 1.35, 0.74, std::nullopt},
       {0.005, 0.5000, 14273.4, 14273.4, 1227, 497.03, -3e-13, 871, 661, 1.33, 0.76, std::nullopt},
       {0.001, 0.5000, 75384.0, 75383.2, 1557, 733.80, 2e-13, 1190, 951, 1.30, 0.80, std::nullopt},
       {0.0005, 0.5000, 153475, 153475, 1699, 839.32, 2e-13, 1328, 1077, 1.28, 0.81, std::nullopt}}}},
}};

}  // namespace kwseq::reference
