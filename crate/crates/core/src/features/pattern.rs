//! Point pairs for the 256 binary intensity tests of the descriptor.
//!
//! Generated once with SplitMix64 seeded at `0xB51EF`, four draws per pair,
//! each mapped to `draw % 27 - 13`; see `PATTERN_SEED`.

/// Seed the table below was drawn with.
pub const PATTERN_SEED: u64 = 0xB51EF;

/// `[x1, y1, x2, y2]` offsets from the keypoint, in pixels.
#[rustfmt::skip]
pub const PATTERN: [[i8; 4]; 256] = [
    [-13, -3, 4, -6], [4, -2, 8, 1], [13, -6, -1, 2], [0, -3, -12, -2],
    [8, -7, 13, -12], [-4, 0, -10, -3], [0, -13, -6, 1], [8, 6, 7, 8],
    [2, 6, -12, -7], [-1, 0, 11, 9], [2, -9, -10, 2], [-10, 10, -9, -6],
    [5, -8, -11, 3], [7, 1, 7, 11], [2, -3, 2, 7], [-13, 5, -2, 8],
    [-9, 4, 4, -10], [-12, 11, -4, -6], [7, 4, -11, 2], [10, -7, -12, -7],
    [-12, -6, -10, -9], [10, -12, 11, -6], [8, -13, 1, -13], [-3, 6, 5, -1],
    [9, -5, -8, 8], [4, 12, 3, -11], [3, 1, -1, 5], [-10, 12, -8, 3],
    [-9, 13, 5, 6], [-11, 1, -8, -13], [-4, -4, -5, 9], [1, 1, -11, 13],
    [8, 4, -13, -1], [3, -3, 1, 8], [-8, 13, -6, 7], [12, -13, 11, 9],
    [3, -2, 12, 13], [-5, -2, -6, -3], [3, 6, 4, 10], [-8, -10, 9, -4],
    [-2, 5, 0, 11], [-13, 7, 13, 9], [-6, -5, 12, 13], [2, 12, 4, 2],
    [-13, -6, 6, -6], [-3, -9, 8, -3], [5, -7, -8, 4], [1, -3, -2, -11],
    [11, 5, 2, -12], [-7, 3, -13, -4], [13, -5, 10, -2], [-1, 8, 7, 7],
    [8, 0, 13, 8], [5, 13, -3, 10], [-3, 12, 6, -3], [4, 7, 2, 9],
    [-6, 13, -10, -1], [6, -10, 10, -4], [12, -9, -5, 4], [13, 11, 12, 8],
    [1, 5, -10, -3], [10, 12, -5, -7], [-8, 1, 6, -2], [11, -12, 8, -9],
    [-11, 0, 5, 9], [-1, -12, 6, 13], [-2, 0, 7, 5], [-12, 5, 7, 5],
    [4, 1, 10, 6], [2, 13, -2, 10], [-8, 6, -13, -5], [0, 4, -2, -4],
    [-11, -8, 9, -2], [-3, 13, 11, 9], [0, 10, -6, 3], [3, -8, 4, -13],
    [-5, 2, -3, -5], [-1, -12, 7, -3], [-13, 13, 11, -10], [-4, 12, 13, 3],
    [-8, 7, 6, 0], [5, -11, 13, 13], [-4, 5, -3, -1], [-1, 0, 5, 9],
    [10, 4, -9, 10], [2, 9, -4, -10], [9, 7, 9, 1], [3, 3, 3, 6],
    [5, -6, 5, -6], [-5, 4, 5, -9], [11, -4, 6, 11], [10, -5, -8, 5],
    [-1, 6, 13, -10], [-9, -8, 11, -13], [-2, -4, -1, -2], [-12, -10, -12, 1],
    [4, -2, -7, -11], [-5, -4, 8, -3], [5, -3, -6, 0], [2, 0, 1, 3],
    [0, 9, -9, -3], [11, -10, 11, -5], [10, -8, -7, 4], [-11, -6, 11, -7],
    [0, -12, -7, 6], [11, -3, -9, 9], [4, -4, -2, 13], [-9, 4, -1, -8],
    [-5, 1, 4, 12], [-1, 9, -13, -13], [4, -1, -9, 13], [10, -12, 8, 7],
    [2, 2, 10, 3], [5, 11, 1, 6], [3, 4, 3, -8], [-10, -5, -4, -10],
    [-9, 8, -13, 9], [-6, -5, 8, 2], [-1, 2, -13, -8], [11, -9, -10, -6],
    [-2, 8, 7, 9], [0, 10, -10, -3], [6, 12, 8, 12], [11, -6, -4, -7],
    [1, -10, 1, -7], [2, -1, -6, 6], [4, -5, -11, 4], [-2, -1, 4, 4],
    [4, -9, -3, -5], [8, 8, -9, 4], [-12, -9, -5, 4], [-1, -6, -7, -5],
    [5, 10, -6, -1], [-10, -13, -4, 8], [1, 1, 1, 6], [13, -3, 4, -10],
    [4, -2, 11, 10], [0, 0, -2, -11], [3, -13, -3, 7], [2, -1, -2, -4],
    [-1, -1, -6, 9], [-12, 6, 4, -10], [-3, 8, 3, 12], [-10, 0, -2, 1],
    [6, 3, 6, 10], [-10, 4, 12, 13], [13, -4, 3, -4], [12, 7, -6, -11],
    [-6, 8, -3, -6], [1, -13, -7, -9], [-13, 1, -6, -9], [-3, 12, -9, -1],
    [8, 9, 1, -12], [-1, -10, 4, -1], [-11, 10, -12, -10], [-3, 5, -6, 12],
    [6, 5, -6, 8], [1, 12, 10, -9], [-1, 8, 11, 4], [0, -10, -6, -5],
    [13, 10, -4, -11], [2, -8, -4, 6], [12, -4, -11, -10], [-7, 6, 5, -10],
    [4, -3, 13, -10], [-1, 11, -11, -13], [-13, -6, 6, -8], [3, 6, 7, 3],
    [1, 12, -5, -3], [5, -5, -13, 10], [5, -4, 0, -13], [10, 10, -2, -7],
    [-3, 5, 10, -1], [11, -12, -12, -3], [4, 1, 4, 12], [1, -5, -6, -3],
    [2, -7, -8, 7], [9, -1, -3, 6], [10, -8, 9, -1], [9, -6, 13, 4],
    [7, 10, -1, -10], [5, -9, 1, -7], [-13, -7, 4, -7], [-10, 1, 3, 8],
    [-7, 5, 8, -12], [7, -11, -13, -11], [5, -13, -7, -4], [13, -13, 3, 8],
    [13, 7, 11, 4], [-7, -8, 9, 13], [-4, 11, -6, -6], [4, -4, -12, -2],
    [13, 11, 7, -4], [-13, -1, 11, 13], [12, -3, 1, 9], [7, -12, 4, 10],
    [-4, 9, 0, -3], [-13, 5, 12, 8], [13, -2, 9, -9], [-1, 7, -13, -10],
    [-11, -4, -6, -2], [8, -2, -8, 0], [2, 2, 5, -7], [-12, 8, 8, -7],
    [-7, -6, -2, 3], [-1, -1, 1, -3], [-3, 10, -7, -4], [7, -2, -13, -3],
    [-6, 9, 1, 5], [-4, 9, -3, -12], [-7, 1, -3, 12], [13, -11, -5, 0],
    [-13, -9, 10, -9], [12, -12, -13, 8], [-2, -8, -12, -10], [4, -10, 12, -1],
    [5, -8, -9, 4], [3, -6, -5, -11], [-7, -11, 2, 9], [-8, 6, 4, 11],
    [11, -10, 5, -10], [2, -6, -10, -8], [3, 8, -12, -2], [10, -1, -9, 1],
    [-12, 7, -12, -3], [10, -13, -6, -8], [9, -10, -9, 4], [-9, -6, -8, -9],
    [10, -3, -9, 0], [-10, 13, 4, 12], [-7, -6, 2, 1], [-5, 2, -10, 2],
    [-10, -9, -13, -5], [-9, 10, -1, -9], [4, -3, 4, 3], [-11, -13, 3, -1],
    [0, 7, -9, -12], [-6, -11, 1, 10], [-3, 4, 7, 11], [12, -7, 12, 2],
    [13, 5, 9, 8], [-11, 0, 0, 9], [7, 13, 1, -5], [-6, -5, 6, -7],
    [5, 12, 2, -2], [-11, 8, -9, -6], [-6, 6, 1, 4], [-1, 10, 4, -1],
    [-5, -2, 3, -10], [1, 6, -12, -5], [10, 2, -1, -4], [-10, 0, 1, -7],
    [12, -6, -5, -10], [4, -10, 4, -4], [10, 0, 10, 7], [12, -10, 1, 3],
];
