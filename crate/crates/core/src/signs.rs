//! The three sign conventions shared by the zeta, determinant and diagram
//! identities. Every exponent of `-1` in those identities goes through here.

use crate::scalar::parity_sign;

/// `(-1)^m`, `m` the rank of the stable bundle. Overall exponent of ζ.
pub fn rank_sign(m: usize) -> i64 {
    parity_sign(m as i64)
}

/// `(-1)^k` on form degree `k`, as in superdeterminants and the alternating
/// zeta assembly.
pub fn degree_sign(k: i64) -> i64 {
    parity_sign(k)
}

/// `(-1)^{k+1}`: the loop sign of form degree `k`, shifted because the
/// ghost grading of the fields is offset by one from the form degree.
pub fn loop_sign(k: i64) -> i64 {
    parity_sign(k + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table() {
        assert_eq!((rank_sign(0), rank_sign(1), rank_sign(2)), (1, -1, 1));
        assert_eq!((degree_sign(0), degree_sign(1), degree_sign(-1)), (1, -1, -1));
        for k in -3..4 {
            assert_eq!(loop_sign(k), -degree_sign(k));
        }
    }
}
