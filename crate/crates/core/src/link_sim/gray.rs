//! Gray-coded PAM4 mapping: `00 → -3`, `01 → -1`, `11 → +1`, `10 → +3`.

pub const PAM4_LEVELS: [i8; 4] = [-3, -1, 1, 3];

// Indexed by the bit pair read as a two-bit number.
const LEVEL_OF_PAIR: [i8; 4] = [-3, -1, 3, 1];

pub fn map_gray_pam4(bits: [u8; 2]) -> i8 {
    debug_assert!(bits[0] <= 1 && bits[1] <= 1);
    LEVEL_OF_PAIR[((bits[0] << 1) | bits[1]) as usize]
}

/// Inverse of [`map_gray_pam4`].
///
/// # Panics
///
/// Panics if `level` is not one of [`PAM4_LEVELS`].
pub fn demap_gray_pam4(level: i8) -> [u8; 2] {
    match level {
        -3 => [0, 0],
        -1 => [0, 1],
        1 => [1, 1],
        3 => [1, 0],
        other => panic!("{other} is not a PAM4 level"),
    }
}
