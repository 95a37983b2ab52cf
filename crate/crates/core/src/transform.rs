//! The polar transform `u = x * B_N * G_N` over GF(2).
//!
//! `G_N` is the n-th Kronecker power of `[[1,0],[1,1]]` and `B_N` the
//! bit-reversal permutation; vectors are rows. Public indices are 1-based.
//!
//! Splitting `x` into halves `x' = x[..N]`, `x'' = x[N..]` with
//! `u = T(x')`, `v = T(x'')`, the transform of the concatenation is the
//! interleaving `(u1+v1, v1, u2+v2, v2, ...)`. Equivalently the first half
//! of `T(x)` is the transform of the pairwise XORs `x[2k] ^ x[2k+1]` and the
//! second half is the transform of the odd-position bits `x[2k+1]`.

use std::fmt;

use crate::{Error, Result};

/// Bit-reversal permutation of `0..2^n`.
pub fn bit_reversal_perm(n: u32) -> Vec<usize> {
    let len = 1usize << n;
    (0..len).map(|j| reverse_bits(j, n)).collect()
}

#[inline]
pub(crate) fn reverse_bits(j: usize, n: u32) -> usize {
    if n == 0 {
        0
    } else {
        j.reverse_bits() >> (usize::BITS - n)
    }
}

fn check_len(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

fn butterflies(buf: &mut [u8]) {
    let len = buf.len();
    let mut h = 1;
    while h < len {
        for block in buf.chunks_exact_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x ^= *y;
            }
        }
        h *= 2;
    }
}

fn permute_bit_reversed(buf: &mut [u8], n: u32) {
    for j in 0..buf.len() {
        let r = reverse_bits(j, n);
        if r > j {
            buf.swap(j, r);
        }
    }
}

/// In-place transform; `buf.len()` must be a power of two.
pub(crate) fn encode_in_place(buf: &mut [u8]) {
    let n = buf.len().trailing_zeros();
    permute_bit_reversed(buf, n);
    butterflies(buf);
}

/// In-place inverse transform.
pub(crate) fn inverse_in_place(buf: &mut [u8]) {
    let n = buf.len().trailing_zeros();
    butterflies(buf);
    permute_bit_reversed(buf, n);
}

/// `u = x B_N G_N` in O(N log N).
pub fn polar_encode(x: &[u8]) -> Result<Vec<u8>> {
    check_len(x.len())?;
    let mut u: Vec<u8> = x.iter().map(|b| b & 1).collect();
    encode_in_place(&mut u);
    Ok(u)
}

/// Inverse of [`polar_encode`]. `G_N` is an involution over GF(2) and
/// commutes with `B_N`, so `x = u G_N B_N`.
pub fn polar_inverse(u: &[u8]) -> Result<Vec<u8>> {
    check_len(u.len())?;
    let mut x: Vec<u8> = u.iter().map(|b| b & 1).collect();
    inverse_in_place(&mut x);
    Ok(x)
}

/// Indices at block length `2N` of the minus and plus children of index `i`
/// (1-based) at block length `N`.
pub fn child_indices(i: usize, n: usize) -> Result<(usize, usize)> {
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok((2 * i - 1, 2 * i))
}

/// Splits an even-length prefix `t` of a size-2N transform into the
/// prefixes of the two half-block transforms: `u_k = t_{2k-1} + t_{2k}`,
/// `v_k = t_{2k}`.
pub fn deinterleave(t: &[u8]) -> Result<(Vec<u8>, Vec<u8>)> {
    if !t.len().is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "deinterleave needs an even-length prefix, got {}",
            t.len()
        )));
    }
    let u = t.chunks_exact(2).map(|p| (p[0] ^ p[1]) & 1).collect();
    let v = t.chunks_exact(2).map(|p| p[1] & 1).collect();
    Ok((u, v))
}

/// Binary expansion `b_1..b_n` of `i - 1`, most significant bit first.
/// Bit value 0 selects the minus child at each level, 1 the plus child.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BranchPath {
    bits: Vec<u8>,
}

impl BranchPath {
    pub fn from_index(i: usize, n: usize) -> Result<Self> {
        check_len(n)?;
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let depth = n.trailing_zeros();
        let bits = (0..depth)
            .rev()
            .map(|k| (((i - 1) >> k) & 1) as u8)
            .collect();
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// The 1-based index this path identifies.
    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
            + 1
    }

    pub fn child(&self, bit: u8) -> Self {
        let mut bits = self.bits.clone();
        bits.push(bit & 1);
        Self { bits }
    }
}

impl fmt::Display for BranchPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("-");
        }
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_reversal_small() {
        assert_eq!(bit_reversal_perm(0), vec![0]);
        assert_eq!(bit_reversal_perm(1), vec![0, 1]);
        assert_eq!(bit_reversal_perm(3), vec![0, 4, 2, 6, 1, 5, 3, 7]);
    }

    #[test]
    fn bit_reversal_is_involution() {
        for n in 0..=12 {
            let p = bit_reversal_perm(n);
            assert!(p.iter().enumerate().all(|(j, &r)| p[r] == j));
        }
    }

    #[test]
    fn encode_examples() {
        assert_eq!(polar_encode(&[1, 1]).unwrap(), vec![0, 1]);
        assert_eq!(polar_encode(&[1, 1, 1, 1]).unwrap(), vec![0, 0, 0, 1]);
        assert_eq!(polar_encode(&[0; 16]).unwrap(), vec![0; 16]);
        assert_eq!(polar_inverse(&[0, 1]).unwrap(), vec![1, 1]);
        assert_eq!(polar_inverse(&[0; 8]).unwrap(), vec![0; 8]);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(matches!(
            polar_encode(&[0, 1, 1]),
            Err(Error::NotPowerOfTwo(3))
        ));
        assert!(matches!(polar_inverse(&[]), Err(Error::NotPowerOfTwo(0))));
    }

    /// Rows of the N=8 transform as listed for the period-4 source analysis.
    #[test]
    fn n8_rows_match_published_table() {
        let rows: [&[usize]; 6] = [
            &[1, 2, 3, 4, 5, 6, 7, 8],
            &[5, 6, 7, 8],
            &[3, 4, 7, 8],
            &[7, 8],
            &[2, 4, 6, 8],
            &[6, 8],
        ];
        for t in 1..=8 {
            let mut x = vec![0u8; 8];
            x[t - 1] = 1;
            let u = polar_encode(&x).unwrap();
            for (r, row) in rows.iter().enumerate() {
                assert_eq!(u[r] == 1, row.contains(&t), "U{} vs X{}", r + 1, t);
            }
        }
    }

    #[test]
    fn child_indices_and_paths() {
        assert_eq!(child_indices(1, 4).unwrap(), (1, 2));
        assert_eq!(child_indices(4, 4).unwrap(), (7, 8));
        assert!(child_indices(5, 4).is_err());
        assert!(child_indices(0, 4).is_err());
        for n in [2usize, 4, 8, 16] {
            for i in 1..=n {
                let b = BranchPath::from_index(i, n).unwrap();
                assert_eq!(b.index(), i);
                let (odd, even) = child_indices(i, n).unwrap();
                assert_eq!(BranchPath::from_index(odd, 2 * n).unwrap(), b.child(0));
                assert_eq!(BranchPath::from_index(even, 2 * n).unwrap(), b.child(1));
            }
        }
        assert_eq!(BranchPath::from_index(6, 8).unwrap().to_string(), "101");
    }

    #[test]
    fn deinterleave_basic() {
        assert_eq!(deinterleave(&[1, 1]).unwrap(), (vec![0], vec![1]));
        assert_eq!(deinterleave(&[1, 0]).unwrap(), (vec![1], vec![0]));
        assert_eq!(deinterleave(&[0; 6]).unwrap(), (vec![0; 3], vec![0; 3]));
        assert!(deinterleave(&[1, 0, 1]).is_err());
    }
}
