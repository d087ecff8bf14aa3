//! Reference route tables for the bundled fixtures.
#![allow(dead_code)]

use optiroute::{NodeId, RouteTable};

/// Eight-node primary routes, row = source 1..8, column = destination 1..8.
pub const EIGHT_PRIMARY: [[&str; 8]; 8] = [
    ["-", "1-2", "1-4-3", "1-4", "1-2-5", "1-2-5-6", "1-4-8-7", "1-4-8"],
    ["2-1", "-", "2-3", "2-1-4", "2-5", "2-5-6", "2-5-6-7", "2-1-4-8"],
    ["3-4-1", "3-2", "-", "3-4", "3-2-5", "3-2-5-6", "3-4-8-7", "3-4-8"],
    ["4-1", "4-1-2", "4-3", "-", "4-1-2-5", "4-1-2-5-6", "4-8-7", "4-8"],
    ["5-2-1", "5-2", "5-2-3", "5-2-1-4", "-", "5-6", "5-6-7", "5-2-1-4-8"],
    ["6-5-2-1", "6-5-2", "6-5-2-3", "6-5-2-1-4", "6-5", "-", "6-7", "6-7-8"],
    ["7-8-4-1", "7-6-5-2", "7-8-4-3", "7-8-4", "7-6-5", "7-6", "-", "7-8"],
    ["8-4-1", "8-4-1-2", "8-4-3", "8-4", "8-4-1-2-5", "8-7-6", "8-7", "-"],
];

/// Eight-node routes after BER degradation of links 3-4 and 7-8, as
/// published. Cells (1,3) and (1,7) keep degraded links although cheaper
/// detours exist; see [`ERRATA`].
pub const EIGHT_SECONDARY: [[&str; 8]; 8] = [
    ["-", "1-2", "1-4-3", "1-4", "1-2-5", "1-2-5-6", "1-4-8-7", "1-4-8"],
    ["2-1", "-", "2-3", "2-1-4", "2-5", "2-5-6", "2-5-6-7", "2-1-4-8"],
    [
        "3-2-1",
        "3-2",
        "-",
        "3-2-1-4",
        "3-2-5",
        "3-2-5-6",
        "3-2-5-6-7",
        "3-2-1-4-8",
    ],
    [
        "4-1",
        "4-1-2",
        "4-1-2-3",
        "-",
        "4-1-2-5",
        "4-1-2-5-6",
        "4-1-2-5-6-7",
        "4-8",
    ],
    ["5-2-1", "5-2", "5-2-3", "5-2-1-4", "-", "5-6", "5-6-7", "5-2-1-4-8"],
    [
        "6-5-2-1",
        "6-5-2",
        "6-5-2-3",
        "6-5-2-1-4",
        "6-5",
        "-",
        "6-7",
        "6-5-2-1-4-8",
    ],
    [
        "7-6-5-2-1",
        "7-6-5-2",
        "7-6-5-2-3",
        "7-6-5-2-1-4",
        "7-6-5",
        "7-6",
        "-",
        "7-6-5-2-1-4-8",
    ],
    [
        "8-4-1",
        "8-4-1-2",
        "8-4-1-2-3",
        "8-4",
        "8-4-1-2-5",
        "8-4-1-2-5-6",
        "8-4-1-2-5-6-7",
        "-",
    ],
];

/// Published secondary cells that are not optimal under any positive
/// weights, with the optimal replacement.
pub const ERRATA: [(u32, u32, &str); 2] = [(1, 3, "1-2-3"), (1, 7, "1-2-5-6-7")];

/// Cells whose published route changes between the primary and secondary
/// tables.
pub const CHANGED: [(u32, u32); 14] = [
    (3, 1),
    (3, 4),
    (3, 7),
    (3, 8),
    (4, 3),
    (4, 7),
    (6, 8),
    (7, 1),
    (7, 3),
    (7, 4),
    (7, 8),
    (8, 3),
    (8, 6),
    (8, 7),
];

/// Tokyo pairs: (src, dst, primary, primary reward, secondary, secondary reward).
pub const TOKYO: [(u32, u32, &str, f64, &str, f64); 4] = [
    (1, 22, "1-6-7-22", -123.55, "1-5-18-21-22", -151.00),
    (4, 7, "4-1-6-7", -121.88, "4-5-18-21-7", -157.61),
    (4, 11, "4-13-10-11", -121.01, "4-13-12-11", -122.83),
    (1, 19, "1-4-16-19", -101.81, "1-5-16-19", -108.21),
];

pub fn parse_path(s: &str) -> Vec<NodeId> {
    s.split('-').map(|x| NodeId(x.parse().unwrap())).collect()
}

pub fn cell(table: &RouteTable, src: u32, dst: u32) -> String {
    if src == dst {
        return "-".into();
    }
    table
        .get(NodeId(src), NodeId(dst))
        .map_or("missing".into(), |e| e.label())
}

/// Cells of `table` that differ from `expected`, as (src, dst, got, want).
pub fn mismatches(table: &RouteTable, expected: &[[&str; 8]; 8]) -> Vec<(u32, u32, String, String)> {
    let mut out = Vec::new();
    for s in 1..=8u32 {
        for d in 1..=8u32 {
            let want = expected[s as usize - 1][d as usize - 1];
            let got = cell(table, s, d);
            if got != want {
                out.push((s, d, got, want.to_string()));
            }
        }
    }
    out
}
